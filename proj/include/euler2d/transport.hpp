#pragma once

#include <cmath>
#include <vector>

#include "euler2d/blob.hpp"
#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/orlicz.hpp"

namespace euler2d {

struct TransportComparisonResult {
    double l1_difference = 0.0;   // || omega_eps(t) - phi_eps * omega_bar(t) ||_L1
    double excluded_fraction = 0.0;
};

namespace transport_detail {

/// Bilinear sample of a scalar field; reports whether the point was inside.
inline bool bilinear(const ScalarField& f, const Vec2& x, double& out) {
    const GridSpec& g = f.spec;
    const double fx = (x.x - g.origin.x) / g.spacing.x;
    const double fy = (x.y - g.origin.y) / g.spacing.y;
    const int i = static_cast<int>(std::floor(fx));
    const int j = static_cast<int>(std::floor(fy));
    if (i < 0 || j < 0 || i + 1 >= g.nx || j + 1 >= g.ny) return false;
    const double tx = fx - i, ty = fy - j;
    out = (1 - tx) * (1 - ty) * f.at(i, j) + tx * (1 - ty) * f.at(i + 1, j) +
          (1 - tx) * ty * f.at(i, j + 1) + tx * ty * f.at(i + 1, j + 1);
    return true;
}

/// Same-grid discrete mollification with the sampled unit-mass blob kernel
/// (support truncated at the profile's far radius). Mass leaking past the
/// grid edge is the caller's margin responsibility.
inline ScalarField convolve_profile(const ScalarField& f, double eps,
                                    const BlobProfile& profile) {
    const GridSpec& g = f.spec;
    const double radius = eps * profile.far_radius_factor();
    const int mx = static_cast<int>(std::ceil(radius / g.spacing.x));
    const int my = static_cast<int>(std::ceil(radius / g.spacing.y));
    std::vector<double> kern(static_cast<std::size_t>(2 * mx + 1) * (2 * my + 1));
    double sum = 0.0;
    for (int oy = -my; oy <= my; ++oy)
        for (int ox = -mx; ox <= mx; ++ox) {
            const double v =
                profile.density(std::hypot(ox * g.spacing.x, oy * g.spacing.y), eps);
            kern[static_cast<std::size_t>(oy + my) * (2 * mx + 1) + (ox + mx)] = v;
            sum += v;
        }
    for (double& v : kern) v /= sum;
    ScalarField out(g, f.time);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double v = f.at(i, j);
            if (v == 0.0) continue;
            const int oy0 = std::max(-my, -j), oy1 = std::min(my, g.ny - 1 - j);
            const int ox0 = std::max(-mx, -i), ox1 = std::min(mx, g.nx - 1 - i);
            for (int oy = oy0; oy <= oy1; ++oy)
                for (int ox = ox0; ox <= ox1; ++ox)
                    out.at(i + ox, j + oy) +=
                        v * kern[static_cast<std::size_t>(oy + my) * (2 * mx + 1) + (ox + mx)];
        }
    return out;
}

} // namespace transport_detail

/// Compares the blob vorticity with the mollified solution of the linear
/// transport problem along the blob velocity: grid nodes are traced backward
/// through the stored trajectory (RK4 on reversed time, positions linearly
/// interpolated between stored states), the initial data is read at the foot,
/// and the traced field is mollified with phi_eps before the L^1 comparison.
/// Nodes whose characteristics leave the initial-data grid are excluded and
/// reported as a fraction.
inline TransportComparisonResult transport_comparison(const std::vector<BlobEnsemble>& history,
                                                      const ScalarField& w0eps,
                                                      const GridSpec& grid,
                                                      const VelocityOptions& opt = {}) {
    if (history.empty()) throw ConfigError("transport_comparison: empty history");
    for (std::size_t k = 1; k < history.size(); ++k)
        if (!(history[k].t > history[k - 1].t))
            throw ConfigError("transport_comparison: history not time-ordered");

    const BlobEnsemble& last = history.back();
    const double eps = last.eps;
    const BlobProfile profile = last.profile;

    // Velocity of the interpolated ensemble at arbitrary (t, x) batches.
    auto velocity_at_time = [&](double t, const std::vector<Vec2>& targets) {
        std::size_t k = 0;
        while (k + 2 < history.size() && history[k + 1].t <= t) ++k;
        const BlobEnsemble& a = history[k];
        if (k + 1 >= history.size()) return velocity_eval(a, targets, opt);
        const BlobEnsemble& b = history[k + 1];
        const double span = b.t - a.t;
        const double w = span > 0.0 ? std::clamp((t - a.t) / span, 0.0, 1.0) : 0.0;
        BlobEnsemble mid;
        mid.eps = a.eps;
        mid.profile = a.profile;
        mid.gamma = a.gamma;
        mid.t = t;
        mid.pos.resize(a.pos.size());
        for (std::size_t i = 0; i < a.pos.size(); ++i)
            mid.pos[i] = a.pos[i] + (b.pos[i] - a.pos[i]) * w;
        return velocity_eval(mid, targets, opt);
    };

    // Backward trace of all grid nodes at once.
    std::vector<Vec2> feet(grid.size());
    for (int j = 0; j < grid.ny; ++j)
        for (int i = 0; i < grid.nx; ++i) feet[grid.index(i, j)] = grid.node(i, j);

    if (history.size() > 1) {
        for (std::size_t k = history.size(); k-- > 1;) {
            const double t1 = history[k].t;
            const double t0 = history[k - 1].t;
            const double dt = t1 - t0; // backward step
            const auto k1 = velocity_at_time(t1, feet);
            std::vector<Vec2> tmp(feet.size());
            for (std::size_t q = 0; q < feet.size(); ++q) tmp[q] = feet[q] - (0.5 * dt) * k1[q];
            const auto k2 = velocity_at_time(t1 - 0.5 * dt, tmp);
            for (std::size_t q = 0; q < feet.size(); ++q) tmp[q] = feet[q] - (0.5 * dt) * k2[q];
            const auto k3 = velocity_at_time(t1 - 0.5 * dt, tmp);
            for (std::size_t q = 0; q < feet.size(); ++q) tmp[q] = feet[q] - dt * k3[q];
            const auto k4 = velocity_at_time(t0, tmp);
            for (std::size_t q = 0; q < feet.size(); ++q)
                feet[q] -= (dt / 6.0) * (k1[q] + 2.0 * k2[q] + 2.0 * k3[q] + k4[q]);
        }
    }

    ScalarField traced(grid, last.t);
    std::size_t excluded = 0;
    for (std::size_t q = 0; q < feet.size(); ++q) {
        double v = 0.0;
        if (transport_detail::bilinear(w0eps, feet[q], v))
            traced.data[q] = v;
        else
            ++excluded;
    }

    const ScalarField smoothed = transport_detail::convolve_profile(traced, eps, profile);
    const ScalarField omega_eps = reconstruct_vorticity(last, grid);

    double l1 = 0.0;
    for (std::size_t q = 0; q < grid.size(); ++q)
        l1 += std::abs(omega_eps.data[q] - smoothed.data[q]);
    TransportComparisonResult res;
    res.l1_difference = l1 * grid.cell_area();
    res.excluded_fraction =
        static_cast<double>(excluded) / static_cast<double>(grid.size());
    return res;
}

} // namespace euler2d
