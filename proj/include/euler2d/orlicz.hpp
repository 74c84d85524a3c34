#pragma once

#include <cmath>
#include <limits>

#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"

namespace euler2d {

/// Exponent of the L(log L)^alpha class. The theory of interest needs
/// alpha > 1/2; smaller values are allowed but flagged.
struct OrliczParams {
    double alpha = 1.0;

    explicit OrliczParams(double a) : alpha(a) {
        if (!(a > 0.0)) throw ConfigError("OrliczParams: alpha must be positive");
    }
    bool outside_theory_regime() const { return alpha <= 0.5; }
};

/// log^+(t): log t for t >= 1, zero otherwise.
inline double log_plus(double t) {
    return t >= 1.0 ? std::log(t) : 0.0;
}

/// Young function beta(s) = s (log(e + s))^alpha; convex, increasing, beta(0)=0.
inline double beta_fn(double s, double alpha) {
    if (s == 0.0) return 0.0;
    const double l = std::log(std::numbers::e + s);
    return alpha == 1.0 ? s * l : s * std::pow(l, alpha);
}

/// Midpoint-rule L^p norm; p = infinity gives the max. Vector fields use the
/// pointwise Euclidean magnitude.
template <int NC>
double lp_norm(const Field<NC>& f, double p) {
    if (std::isinf(p)) return f.max_abs();
    if (!(p >= 1.0)) throw DomainError("lp_norm: need p >= 1 or infinity");
    const double dA = f.spec.cell_area();
    double acc = 0.0;
    if (p == 1.0) {
        for (std::size_t n = 0; n < f.spec.size(); ++n) acc += f.magnitude(n);
    } else if (p == 2.0) {
        for (std::size_t n = 0; n < f.spec.size(); ++n) {
            const double m = f.magnitude(n);
            acc += m * m;
        }
    } else {
        for (std::size_t n = 0; n < f.spec.size(); ++n) acc += std::pow(f.magnitude(n), p);
    }
    return std::pow(acc * dA, 1.0 / p);
}

/// Modular integral of the Young function: int beta(|f|) dx (midpoint rule).
inline double modular(const ScalarField& f, double alpha) {
    const double dA = f.spec.cell_area();
    double acc = 0.0;
    for (std::size_t n = 0; n < f.spec.size(); ++n) {
        const double v = std::abs(f.data[n]);
        if (!std::isfinite(v)) throw DataError("modular: non-finite field value");
        acc += beta_fn(v, alpha);
    }
    return acc * dA;
}

namespace detail {

/// Luxemburg constraint Phi(k) = int (|f|/k) (log^+(|f|/k))^alpha dx;
/// strictly decreasing in k wherever positive.
inline double luxemburg_modular(const ScalarField& f, double alpha, double k) {
    const double dA = f.spec.cell_area();
    const bool plain = alpha == 1.0;
    double acc = 0.0;
    for (std::size_t n = 0; n < f.spec.size(); ++n) {
        const double t = std::abs(f.data[n]) / k;
        if (t > 1.0) {
            const double l = std::log(t);
            acc += plain ? t * l : t * std::pow(l, alpha);
        }
    }
    return acc * dA;
}

} // namespace detail

/// Luxemburg norm inf{k > 0 : int (|f|/k)(log^+(|f|/k))^alpha dx <= 1},
/// located by bracketed bisection on Phi(k) = 1 to 1e-10 relative.
inline double luxemburg_norm(const ScalarField& f, double alpha) {
    if (!f.all_finite()) throw DataError("luxemburg_norm: non-finite field value");
    const double l1 = lp_norm(f, 1.0);
    if (l1 == 0.0) return 0.0;
    const double area =
        f.spec.cell_area() * static_cast<double>(f.spec.size());

    double k_lo = l1 / (2.0 * (1.0 + area));
    double k_hi = modular(f, alpha) + l1;
    // Widen until the bracket straddles Phi = 1.
    int guard = 0;
    while (detail::luxemburg_modular(f, alpha, k_hi) > 1.0 && guard++ < 200) k_hi *= 2.0;
    guard = 0;
    while (detail::luxemburg_modular(f, alpha, k_lo) < 1.0 && guard++ < 2000) {
        k_lo *= 0.5;
        if (k_lo < std::numeric_limits<double>::min() * 1e8) {
            // Phi never exceeds 1: the norm is below any positive bracket.
            return k_lo;
        }
    }
    while (k_hi - k_lo > 1e-10 * k_hi) {
        const double mid = 0.5 * (k_lo + k_hi);
        if (detail::luxemburg_modular(f, alpha, mid) > 1.0)
            k_lo = mid;
        else
            k_hi = mid;
    }
    return 0.5 * (k_lo + k_hi);
}

} // namespace euler2d
