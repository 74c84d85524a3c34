#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/kernel.hpp"
#include "euler2d/orlicz.hpp"

namespace euler2d {

enum class PresetKind { smooth_dipole, patch_pair, loglog_pair };

inline const char* to_string(PresetKind k) {
    switch (k) {
        case PresetKind::smooth_dipole: return "smooth_dipole";
        case PresetKind::patch_pair: return "patch_pair";
        case PresetKind::loglog_pair: return "loglog_pair";
    }
    return "?";
}

/// Analytic initial-vorticity descriptor plus sampler. All presets are
/// mean-zero by antisymmetry. The loglog pair carries the borderline-Orlicz
/// radial profile f_beta(x) = min(cap, |x|^-2 (log(e/|x|))^-beta) on |x| <= r0,
/// in L^1 iff beta > 1 and in L(log L)^alpha iff beta > alpha + 1.
struct Preset {
    PresetKind kind = PresetKind::smooth_dipole;
    // smooth_dipole / patch_pair geometry: lobes centered at (0, +-offset)
    double width = 0.35;     // gaussian width (smooth_dipole)
    double offset = 0.45;    // lobe center distance from the x-axis
    double amplitude = 1.0;
    double skew = 1.0;       // negative-lobe factor; != 1 breaks the zero mean
    double patch_radius = 0.4;
    // loglog_pair: lobes centered at (+-x0, 0)
    double beta = 2.5;
    double r0 = 0.5;
    double cap = 1e6;
    double x0 = 0.75;

    static Preset named(const std::string& name) {
        Preset p;
        if (name == "smooth_dipole")
            p.kind = PresetKind::smooth_dipole;
        else if (name == "patch_pair")
            p.kind = PresetKind::patch_pair;
        else if (name == "loglog_pair")
            p.kind = PresetKind::loglog_pair;
        else
            throw ConfigError("unknown preset '" + name + "'");
        return p;
    }

    /// Uncapped radial profile of one loglog lobe.
    double loglog_profile_raw(double r) const {
        if (r <= 0.0 || r > r0) return r > r0 ? 0.0 : cap;
        const double t = std::log(std::numbers::e / r);
        return 1.0 / (r * r * std::pow(t, beta));
    }

    double eval(Vec2 x) const {
        switch (kind) {
            case PresetKind::smooth_dipole: {
                const double dy1 = x.y - offset, dy2 = x.y + offset;
                const double a = std::exp(-(x.x * x.x + dy1 * dy1) / (width * width));
                const double b = std::exp(-(x.x * x.x + dy2 * dy2) / (width * width));
                return amplitude * (a - skew * b);
            }
            case PresetKind::patch_pair: {
                const double dy1 = x.y - offset, dy2 = x.y + offset;
                double v = 0.0;
                if (x.x * x.x + dy1 * dy1 < patch_radius * patch_radius) v += amplitude;
                if (x.x * x.x + dy2 * dy2 < patch_radius * patch_radius) v -= skew * amplitude;
                return v;
            }
            case PresetKind::loglog_pair: {
                const double rp = std::hypot(x.x - x0, x.y);
                const double rm = std::hypot(x.x + x0, x.y);
                double v = 0.0;
                if (rp <= r0) v += std::min(cap, loglog_profile_raw(rp));
                if (rm <= r0) v -= skew * std::min(cap, loglog_profile_raw(rm));
                return v;
            }
        }
        return 0.0;
    }

    /// Radius beyond which |omega0| falls below rel * amplitude.
    double support_radius(double rel = 1e-6) const {
        switch (kind) {
            case PresetKind::smooth_dipole:
                return offset + width * std::sqrt(-std::log(rel));
            case PresetKind::patch_pair:
                return offset + patch_radius;
            case PresetKind::loglog_pair:
                return x0 + r0;
        }
        return 1.0;
    }

    /// Largest |omega0| actually sampled (patch/loglog lobes are capped).
    double max_value() const {
        switch (kind) {
            case PresetKind::smooth_dipole:
            case PresetKind::patch_pair: return amplitude;
            case PresetKind::loglog_pair: return std::min(cap, loglog_profile_raw(r0));
        }
        return 1.0;
    }
};

// ---------------------------------------------------------------------------
// Membership verification in L(log L)^alpha via capped radial quadrature
// ---------------------------------------------------------------------------

enum class Membership { IN, OUT, UNDECIDED };

inline const char* to_string(Membership m) {
    switch (m) {
        case Membership::IN: return "IN";
        case Membership::OUT: return "OUT";
        case Membership::UNDECIDED: return "UNDECIDED";
    }
    return "?";
}

struct MembershipResult {
    Membership verdict = Membership::UNDECIDED;
    std::vector<std::pair<double, double>> trace; // (cap, modular under cap)
    double tail_exponent = 0.0;                   // fitted d log(inc/dt) / d log t
};

namespace preset_detail {

/// Modular of the capped loglog pair, integrated in t = log(e/r) where the
/// profile is f = r^-2 t^-beta; stable for caps far beyond overflow of f
/// itself because only logarithms of f enter.
inline double loglog_pair_modular(const Preset& p, double alpha, double cap) {
    const double t0 = std::log(std::numbers::e / p.r0);
    const double ln_cap = std::log(cap);
    auto log_f = [&](double t) { return 2.0 * (t - 1.0) - p.beta * std::log(t); };

    // Solve f(r(t)) = cap for the cap boundary; f increases with t.
    double t_cap = t0;
    if (log_f(t0) < ln_cap) {
        double lo = t0, hi = std::max(2.0 * t0, 4.0);
        while (log_f(hi) < ln_cap) hi *= 2.0;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (lo + hi);
            (log_f(mid) < ln_cap ? lo : hi) = mid;
        }
        t_cap = 0.5 * (lo + hi);
    }

    auto integrand = [&](double t) {
        const double lf = log_f(t);
        const double log_e_plus_f =
            lf > 40.0 ? lf : std::log(std::numbers::e + std::exp(lf));
        return std::pow(t, -p.beta) * std::pow(log_e_plus_f, alpha);
    };
    const double outer =
        t_cap > t0 ? detail::integrate(integrand, t0, t_cap, 1e-12, 28) : 0.0;
    // capped disc: 2 pi * B(cap) * r_cap^2 / 2 per lobe, r_cap^2 = t^-beta/cap
    const double inner =
        std::pow(std::log(std::numbers::e + cap), alpha) * std::pow(t_cap, -p.beta);
    return 2.0 * (kTwoPi * outer + kPi * inner);
}

} // namespace preset_detail

/// Default cap schedule: geometric in log(cap), which turns the capped
/// modular of a borderline profile into geometrically shrinking (IN) or
/// growing (OUT) increments.
inline std::vector<double> default_cap_schedule() {
    return {1e2, 1e4, 1e8, 1e16, 1e32, 1e64, 1e128, 1e256};
}

/// Classifies the preset's membership in L(log L)^alpha by evaluating the
/// modular under increasing caps. Verdicts: IN when the trace is Cauchy
/// (relative increments below 1%) or its increment decay fits an integrable
/// tail exponent (< -1); OUT when increments grow or the fit is divergent;
/// UNDECIDED in the margin.
inline MembershipResult membership_verifier(const Preset& p, double alpha,
                                            std::vector<double> caps = {}) {
    if (caps.empty()) caps = default_cap_schedule();
    if (caps.size() < 3) throw ConfigError("membership_verifier: need >= 3 caps");
    MembershipResult res;

    if (p.kind != PresetKind::loglog_pair) {
        // Bounded compactly supported data: the modular saturates as soon as
        // the cap clears the sup; a flat trace is IN trivially.
        GridSpec g = GridSpec::centered_square(p.support_radius() * 1.05 + 0.1, 256);
        ScalarField f(g);
        const double vmax = p.max_value();
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) f.at(i, j) = p.eval(g.node(i, j));
        for (double cap : caps) {
            ScalarField capped = f;
            for (auto& v : capped.data) v = std::clamp(v, -cap, cap);
            res.trace.emplace_back(cap, modular(capped, alpha));
        }
        const double last = res.trace.back().second;
        const double prev = res.trace[res.trace.size() - 2].second;
        res.verdict = (last - prev) <= 1e-2 * std::max(last, 1e-300) ? Membership::IN
                                                                     : Membership::UNDECIDED;
        (void)vmax;
        return res;
    }

    for (double cap : caps)
        res.trace.emplace_back(cap, preset_detail::loglog_pair_modular(p, alpha, cap));

    const std::size_t n = res.trace.size();
    std::vector<double> inc(n - 1), tmid(n - 1), dt(n - 1);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        inc[k] = res.trace[k + 1].second - res.trace[k].second;
        const double ta = std::log(res.trace[k].first);
        const double tb = std::log(res.trace[k + 1].first);
        dt[k] = tb - ta;
        tmid[k] = 0.5 * (ta + tb);
    }
    const double value = res.trace.back().second;
    const double rel_last = inc.back() / std::max(value, 1e-300);
    if (rel_last < 1e-2) {
        res.verdict = Membership::IN;
        return res;
    }
    // growing increments: divergent by inspection
    if (inc.size() >= 3 && inc[inc.size() - 1] > inc[inc.size() - 2] &&
        inc[inc.size() - 2] > inc[inc.size() - 3]) {
        res.verdict = Membership::OUT;
        return res;
    }
    // Fit the density exponent p: inc/dt ~ t^p; membership <=> p < -1.
    const std::size_t fit = std::min<std::size_t>(4, inc.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t cnt = 0;
    for (std::size_t k = inc.size() - fit; k < inc.size(); ++k) {
        if (!(inc[k] > 0.0)) continue;
        const double lx = std::log(tmid[k]);
        const double ly = std::log(inc[k] / dt[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++cnt;
    }
    if (cnt >= 2) {
        res.tail_exponent = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
        if (res.tail_exponent < -1.05)
            res.verdict = Membership::IN;
        else if (res.tail_exponent > -0.95)
            res.verdict = Membership::OUT;
        else
            res.verdict = Membership::UNDECIDED;
    } else {
        res.verdict = Membership::IN; // increments vanished entirely
    }
    return res;
}

} // namespace euler2d
