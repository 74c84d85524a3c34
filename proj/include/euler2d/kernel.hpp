#pragma once

#include <array>
#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/vec2.hpp"

namespace euler2d {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// ---------------------------------------------------------------------------
// Biot-Savart kernel K(x) = x_perp / (2 pi |x|^2) and its analytic derivatives.
// ---------------------------------------------------------------------------

/// K(x) = x_perp / (2 pi |x|^2). Throws DomainError when |x| is below the
/// machine-safe threshold 1e-300.
inline Vec2 biot_savart(const Vec2& x) {
    if (std::max(std::abs(x.x), std::abs(x.y)) < 1e-300)
        throw DomainError("biot_savart: evaluation at the origin");
    return x.perp() / (kTwoPi * x.norm2());
}

/// Gradient of K: entry (i,j) = d_j K_i.  Uses K_1 = -x2/(2 pi r^2),
/// K_2 = x1/(2 pi r^2) with d_j (x_m/r^2) = delta_jm/r^2 - 2 x_j x_m / r^4.
inline Mat2 biot_savart_grad(const Vec2& x) {
    if (std::max(std::abs(x.x), std::abs(x.y)) < 1e-300)
        throw DomainError("biot_savart_grad: evaluation at the origin");
    const double r2 = x.norm2();
    const double r4 = r2 * r2;
    const double c = 1.0 / (kTwoPi * r4);
    const double xy = x.x * x.y;
    const double dd = x.y * x.y - x.x * x.x; // (x2^2 - x1^2)
    Mat2 g;
    g.a11 = 2.0 * xy * c;  // d1 K1
    g.a12 = dd * c;        // d2 K1
    g.a21 = dd * c;        // d1 K2
    g.a22 = -2.0 * xy * c; // d2 K2
    return g;
}

namespace detail {

/// d_k d_j (x_m / r^2); K is harmonic away from the origin, which this
/// formula reproduces exactly.
inline double hess_over_r2(const Vec2& x, int j, int k, int m) {
    const double r2 = x.norm2();
    const double r4 = r2 * r2;
    const double r6 = r4 * r2;
    const double xs[2] = {x.x, x.y};
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    return -2.0 * (d(j, m) * xs[k] + d(k, m) * xs[j] + d(j, k) * xs[m]) / r4 +
           8.0 * xs[j] * xs[m] * xs[k] / r6;
}

} // namespace detail

/// Second derivatives of K: returns T[i](j,k) = d_j d_k K_i.
inline std::array<Mat2, 2> biot_savart_hess(const Vec2& x) {
    const double c = 1.0 / kTwoPi;
    std::array<Mat2, 2> t;
    // K_1 = -G_2/(2pi), K_2 = G_1/(2pi) with G_m = x_m/r^2.
    t[0].a11 = -c * detail::hess_over_r2(x, 0, 0, 1);
    t[0].a12 = -c * detail::hess_over_r2(x, 0, 1, 1);
    t[0].a21 = -c * detail::hess_over_r2(x, 1, 0, 1);
    t[0].a22 = -c * detail::hess_over_r2(x, 1, 1, 1);
    t[1].a11 = c * detail::hess_over_r2(x, 0, 0, 0);
    t[1].a12 = c * detail::hess_over_r2(x, 0, 1, 0);
    t[1].a21 = c * detail::hess_over_r2(x, 1, 0, 0);
    t[1].a22 = c * detail::hess_over_r2(x, 1, 1, 0);
    return t;
}

// ---------------------------------------------------------------------------
// Blob profiles (radial mollifiers of unit mass).
// ---------------------------------------------------------------------------

enum class ProfileKind { gaussian, bump };

inline const char* to_string(ProfileKind k) {
    return k == ProfileKind::gaussian ? "gaussian" : "bump";
}

namespace detail {

/// Monotone cubic Hermite interpolant (Fritsch-Carlson slopes) on a uniform
/// grid. Preserves monotonicity of the tabulated data.
class MonotoneCubicTable {
public:
    MonotoneCubicTable() = default;
    MonotoneCubicTable(double x0, double dx, std::vector<double> y)
        : x0_(x0), dx_(dx), y_(std::move(y)) {
        const std::size_t n = y_.size();
        m_.assign(n, 0.0);
        if (n < 2) return;
        std::vector<double> d(n - 1);
        for (std::size_t i = 0; i + 1 < n; ++i) d[i] = (y_[i + 1] - y_[i]) / dx_;
        m_[0] = d[0];
        m_[n - 1] = d[n - 2];
        for (std::size_t i = 1; i + 1 < n; ++i) m_[i] = 0.5 * (d[i - 1] + d[i]);
        // Fritsch-Carlson limiter
        for (std::size_t i = 0; i + 1 < n; ++i) {
            if (d[i] == 0.0) {
                m_[i] = m_[i + 1] = 0.0;
            } else {
                const double a = m_[i] / d[i];
                const double b = m_[i + 1] / d[i];
                const double s = a * a + b * b;
                if (s > 9.0) {
                    const double tau = 3.0 / std::sqrt(s);
                    m_[i] = tau * a * d[i];
                    m_[i + 1] = tau * b * d[i];
                }
            }
        }
    }

    double operator()(double x) const {
        const std::size_t n = y_.size();
        if (n == 0) return 0.0;
        if (x <= x0_) return y_.front();
        const double xe = x0_ + dx_ * static_cast<double>(n - 1);
        if (x >= xe) return y_.back();
        const double s = (x - x0_) / dx_;
        std::size_t i = static_cast<std::size_t>(s);
        if (i + 1 >= n) i = n - 2;
        const double t = s - static_cast<double>(i);
        const double h00 = (1 + 2 * t) * (1 - t) * (1 - t);
        const double h10 = t * (1 - t) * (1 - t);
        const double h01 = t * t * (3 - 2 * t);
        const double h11 = t * t * (t - 1);
        return h00 * y_[i] + h10 * dx_ * m_[i] + h01 * y_[i + 1] + h11 * dx_ * m_[i + 1];
    }

    bool empty() const { return y_.empty(); }

private:
    double x0_ = 0.0;
    double dx_ = 1.0;
    std::vector<double> y_;
    std::vector<double> m_;
};

/// Unnormalized bump density exp(-1/(1-s^2)) for s in [0,1).
inline double bump_raw(double s) {
    const double q = 1.0 - s * s;
    if (q <= 0.0) return 0.0;
    return std::exp(-1.0 / q);
}

struct BumpTables {
    double norm_c = 0.0;          // phi(x) = norm_c * exp(-1/(1-|x|^2))
    MonotoneCubicTable enclosed;  // mass within scaled radius rho in [0,1]

    BumpTables() {
        // Cumulative radial mass 2 pi int_0^rho bump_raw(s) s ds on 2048
        // intervals (composite Simpson per interval).
        constexpr int n = 2048;
        const double dr = 1.0 / n;
        std::vector<double> cum(n + 1, 0.0);
        for (int i = 0; i < n; ++i) {
            const double a = i * dr;
            const double b = a + dr;
            const double mid = 0.5 * (a + b);
            const double seg = (dr / 6.0) *
                (bump_raw(a) * a + 4.0 * bump_raw(mid) * mid + bump_raw(b) * b);
            cum[i + 1] = cum[i] + seg;
        }
        const double total = cum[n] * kTwoPi;
        norm_c = 1.0 / total;
        std::vector<double> mass(n + 1);
        for (int i = 0; i <= n; ++i) mass[i] = cum[i] / cum[n];
        mass[n] = 1.0;
        enclosed = MonotoneCubicTable(0.0, dr, std::move(mass));
    }
};

inline const BumpTables& bump_tables() {
    static const BumpTables t;
    return t;
}

} // namespace detail

/// Radial unit-mass mollifier. gaussian: phi_eps(x) = exp(-|x|^2/eps^2)/(pi eps^2);
/// bump: phi(x) = c exp(-1/(1-|x|^2)) on |x|<1, scaled by phi_eps = eps^-2 phi(x/eps).
struct BlobProfile {
    ProfileKind kind = ProfileKind::gaussian;

    /// Normalization constant of the unscaled bump (gaussian: 1/pi).
    double normalization() const {
        return kind == ProfileKind::gaussian ? 1.0 / kPi : detail::bump_tables().norm_c;
    }

    /// phi_eps at distance r from the blob center.
    double density(double r, double eps) const {
        const double s = r / eps;
        if (kind == ProfileKind::gaussian)
            return std::exp(-s * s) / (kPi * eps * eps);
        return detail::bump_tables().norm_c * detail::bump_raw(s) / (eps * eps);
    }

    /// Radial derivative d/dr of phi_eps at distance r.
    double density_deriv(double r, double eps) const {
        const double s = r / eps;
        if (kind == ProfileKind::gaussian)
            return -2.0 * s / (eps * eps * eps) * std::exp(-s * s) / kPi;
        const double q = 1.0 - s * s;
        if (q <= 0.0) return 0.0;
        return detail::bump_tables().norm_c * std::exp(-1.0 / q) *
               (-2.0 * s / (q * q)) / (eps * eps * eps);
    }

    /// Mass of the unit-scale profile enclosed in radius rho (= r/eps).
    double enclosed_mass(double rho) const {
        if (rho <= 0.0) return 0.0;
        if (kind == ProfileKind::gaussian) return -std::expm1(-rho * rho);
        if (rho >= 1.0) return 1.0;
        return detail::bump_tables().enclosed(rho);
    }

    /// Scaled radius beyond which the blob is indistinguishable from a point
    /// vortex at double precision (mass deficit below ~1e-21).
    double far_radius_factor() const {
        return kind == ProfileKind::gaussian ? 7.0 : 1.0;
    }

    /// Scaled radius beyond which the mass deficit drops below tol.
    double far_radius_factor(double tol) const {
        if (kind == ProfileKind::bump) return 1.0;
        return std::sqrt(std::max(1.0, -std::log(tol)));
    }
};

/// K_eps = K * phi_eps. For a radial profile this is K(x) times the enclosed
/// mass fraction at |x|/eps; K_eps(0) = 0 and the field is smooth everywhere.
inline Vec2 mollified_kernel(const Vec2& x, double eps, const BlobProfile& profile) {
    const double r2 = x.norm2();
    if (r2 == 0.0) return {0.0, 0.0};
    const double r = std::sqrt(r2);
    const double m = profile.enclosed_mass(r / eps);
    return x.perp() * (m / (kTwoPi * r2));
}

/// Velocity contribution of one blob of circulation gamma at displacement d
/// from the target. far2 is the squared radius beyond which the enclosed mass
/// is 1 at double precision; passing it in keeps the direct sum and the
/// treecode leaf loop bit-identical.
inline Vec2 blob_induced_velocity(const Vec2& d, double gamma, double eps, double far2,
                                  const BlobProfile& profile) {
    const double r2 = d.norm2();
    if (r2 == 0.0) return {0.0, 0.0}; // K_eps(0) = 0
    double m = 1.0;
    if (r2 < far2) m = profile.enclosed_mass(std::sqrt(r2) / eps);
    return d.perp() * (gamma * m / (kTwoPi * r2));
}

// ---------------------------------------------------------------------------
// Radial cutoff a(x) and the far-field kernels of the Serfati identity.
// ---------------------------------------------------------------------------

/// C^2 radial cutoff: a = 1 inside r1, 0 outside r2, quintic smoothstep in
/// between (analytic first and second derivatives).
struct CutoffPair {
    double r1 = 1.0;
    double r2 = 2.0;

    CutoffPair() = default;
    CutoffPair(double inner, double outer) : r1(inner), r2(outer) {
        if (!(outer > inner) || !(inner > 0.0))
            throw ConfigError("CutoffPair: need 0 < r1 < r2");
    }

    double value(double r) const {
        if (r <= r1) return 1.0;
        if (r >= r2) return 0.0;
        const double u = (r - r1) / (r2 - r1);
        return 1.0 - u * u * u * (10.0 + u * (-15.0 + 6.0 * u));
    }
    double deriv(double r) const {
        if (r <= r1 || r >= r2) return 0.0;
        const double w = r2 - r1;
        const double u = (r - r1) / w;
        return -30.0 * u * u * (1.0 - u) * (1.0 - u) / w;
    }
    double deriv2(double r) const {
        if (r <= r1 || r >= r2) return 0.0;
        const double w = r2 - r1;
        const double u = (r - r1) / w;
        return -60.0 * u * (1.0 - u) * (1.0 - 2.0 * u) / (w * w);
    }
};

/// a(x) for the radial cutoff; values in [0,1].
inline double cutoff_eval(const CutoffPair& cut, const Vec2& x) {
    return cut.value(x.norm());
}

namespace detail {

/// d_j (x_perp_k / r): P_jk / r - x_perp_k x_j / r^3 with P = [[0,1],[-1,0]].
inline double grad_perp_over_r(const Vec2& x, int j, int k) {
    const double r = x.norm();
    const double r3 = r * r * r;
    const double xs[2] = {x.x, x.y};
    const double xp[2] = {-x.y, x.x};
    const double p[2][2] = {{0.0, 1.0}, {-1.0, 0.0}};
    return p[j][k] / r - xp[k] * xs[j] / r3;
}

} // namespace detail

/// Far-field tensor of the Serfati identity: M[i](j,k) = d_j (grad_perp [(1-a) K_i])_k,
/// assembled from the four-term product expansion with analytic derivatives.
/// Identically zero for |x| <= r1.
inline std::array<Mat2, 2> serfati_far_kernel(const Vec2& x, const CutoffPair& cut) {
    std::array<Mat2, 2> out{};
    const double r = x.norm();
    if (r <= cut.r1) return out;

    const double a = cut.value(r);
    const Vec2 k = biot_savart(x);
    const Mat2 gk = biot_savart_grad(x);
    const auto hk = biot_savart_hess(x);

    // (grad_perp g)_1 = -d2 g, (grad_perp g)_2 = d1 g.
    const double kvals[2] = {k.x, k.y};
    const double gkv[2][2] = {{gk.a11, gk.a12}, {gk.a21, gk.a22}}; // [i][j] = d_j K_i
    for (int i = 0; i < 2; ++i) {
        // perp-gradient of K_i as a 2-vector in k-index
        const double pgk[2] = {-gkv[i][1], gkv[i][0]};
        // d_j (grad_perp K_i)_k
        const double hkv[2][2] = {{hk[i].a11, hk[i].a12}, {hk[i].a21, hk[i].a22}}; // d_j d_k K_i
        double hpk[2][2];
        for (int j = 0; j < 2; ++j) {
            hpk[j][0] = -hkv[j][1]; // d_j (-d2 K_i)
            hpk[j][1] = hkv[j][0];  // d_j ( d1 K_i)
        }
        double m[2][2];
        if (a == 0.0) {
            for (int j = 0; j < 2; ++j)
                for (int kk = 0; kk < 2; ++kk) m[j][kk] = hpk[j][kk];
        } else {
            const double ap = cut.deriv(r);
            const double app = cut.deriv2(r);
            const double xs[2] = {x.x, x.y};
            const double xp[2] = {-x.y, x.x};
            for (int j = 0; j < 2; ++j) {
                for (int kk = 0; kk < 2; ++kk) {
                    // (grad grad_perp a)_{jk}
                    const double gga = app * (xs[j] / r) * (xp[kk] / r) +
                                       ap * detail::grad_perp_over_r(x, j, kk);
                    const double ga_j = ap * xs[j] / r;       // (grad a)_j
                    const double gpa_k = ap * xp[kk] / r;     // (grad_perp a)_k
                    m[j][kk] = -gga * kvals[i] - gkv[i][j] * gpa_k - ga_j * pgk[kk] +
                               (1.0 - a) * hpk[j][kk];
                }
            }
        }
        out[i] = Mat2{m[0][0], m[0][1], m[1][0], m[1][1]};
    }
    return out;
}

/// Gradient of the once-differentiated far kernel: entry (i,j) = d_j [(1-a) K_i].
/// Used by the vortex-blob correction term of the Serfati identity.
inline Mat2 grad_far_kernel(const Vec2& x, const CutoffPair& cut) {
    const double r = x.norm();
    if (r <= cut.r1) return {};
    const double a = cut.value(r);
    const double ap = cut.deriv(r);
    const Vec2 k = biot_savart(x);
    const Mat2 gk = biot_savart_grad(x);
    const double gax = ap * x.x / r, gay = ap * x.y / r;
    Mat2 g;
    g.a11 = -gax * k.x + (1.0 - a) * gk.a11;
    g.a12 = -gay * k.x + (1.0 - a) * gk.a12;
    g.a21 = -gax * k.y + (1.0 - a) * gk.a21;
    g.a22 = -gay * k.y + (1.0 - a) * gk.a22;
    return g;
}

/// Laplacian of the far kernel: component i = Delta[(1-a) K_i].
/// K is harmonic away from the origin, so the result is supported in the
/// cutoff annulus r1 <= |x| <= r2 and vanishes outside it.
inline Vec2 viscous_far_kernel(const Vec2& x, const CutoffPair& cut) {
    const double r = x.norm();
    if (r <= cut.r1 || r >= cut.r2) return {0.0, 0.0};
    const double ap = cut.deriv(r);
    const double app = cut.deriv2(r);
    const double lap_a = app + ap / r;
    const Vec2 k = biot_savart(x);
    const Mat2 gk = biot_savart_grad(x);
    const Vec2 grad_a{ap * x.x / r, ap * x.y / r};
    // Delta[(1-a)K_i] = -(Delta a) K_i - 2 grad a . grad K_i
    return {-lap_a * k.x - 2.0 * (grad_a.x * gk.a11 + grad_a.y * gk.a12),
            -lap_a * k.y - 2.0 * (grad_a.x * gk.a21 + grad_a.y * gk.a22)};
}

// ---------------------------------------------------------------------------
// L^1 norm of g_eps(x) = chi_{B_2eps}(x) / (|x|^2 (log(1/|x|))^{2 alpha}).
// ---------------------------------------------------------------------------

/// Exact value 2 pi (log(1/(2 eps)))^{1-2 alpha} / (2 alpha - 1).
/// Requires 2 eps < 1 and alpha > 1/2 (the integral diverges otherwise).
inline double g_eps_l1(double eps, double alpha) {
    if (!(eps > 0.0) || !(2.0 * eps < 1.0))
        throw DomainError("g_eps_l1: need 0 < eps < 1/2");
    if (!(alpha > 0.5))
        throw DomainError("g_eps_l1: integral diverges for alpha <= 1/2");
    const double t0 = std::log(1.0 / (2.0 * eps));
    return kTwoPi * std::pow(t0, 1.0 - 2.0 * alpha) / (2.0 * alpha - 1.0);
}

namespace detail {

template <typename Fn>
double adaptive_simpson(Fn&& f, double a, double b, double fa, double fm, double fb,
                        double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double s = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    const double sl = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double sr = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(sl + sr - s) < 15.0 * tol) return sl + sr + (sl + sr - s) / 15.0;
    return adaptive_simpson(f, a, m, fa, flm, fm, tol / 2, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, tol / 2, depth - 1);
}

template <typename Fn>
double integrate(Fn&& f, double a, double b, double tol = 1e-12, int depth = 24) {
    const double m = 0.5 * (a + b);
    return adaptive_simpson(f, a, b, f(a), f(m), f(b), tol, depth);
}

} // namespace detail

/// Companion quadrature for g_eps_l1: integrates 2 pi tau^{-2 alpha} over
/// tau = log(1/r) in [log(1/(2 eps)), infinity) by geometric panels, stopping
/// once panel contributions are negligible.
inline double g_eps_l1_quadrature(double eps, double alpha) {
    if (!(eps > 0.0) || !(2.0 * eps < 1.0))
        throw DomainError("g_eps_l1_quadrature: need 0 < eps < 1/2");
    if (!(alpha > 0.5))
        throw DomainError("g_eps_l1_quadrature: integral diverges for alpha <= 1/2");
    auto f = [alpha](double tau) { return std::pow(tau, -2.0 * alpha); };
    double lo = std::log(1.0 / (2.0 * eps));
    double acc = 0.0;
    for (int panel = 0; panel < 4000; ++panel) {
        const double hi = lo * 1.5;
        const double part = detail::integrate(f, lo, hi, 1e-14);
        acc += part;
        lo = hi;
        if (part < 1e-11 * acc && panel > 4) break;
    }
    return kTwoPi * acc;
}

} // namespace euler2d
