#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/kernel.hpp"
#include "euler2d/parallel.hpp"

namespace euler2d {

enum class MethodTag { ES, VV, VB };

inline const char* to_string(MethodTag m) {
    switch (m) {
        case MethodTag::ES: return "ES";
        case MethodTag::VV: return "VV";
        case MethodTag::VB: return "VB";
    }
    return "?";
}

/// One time sample of a run viewed on a fixed grid. F carries the blob error
/// field and is only populated on VB runs.
struct SerfatiSnapshot {
    double t = 0.0;
    ScalarField omega;
    VectorField u;
    VectorField F;
};

/// Residual configuration: the identity's main cutoff a, the inner split
/// radius of the auxiliary cutoff a_{eps_cut} (must stay inside the plateau
/// of a), the evaluation grid and its extent.
struct SerfatiConfig {
    CutoffPair cutoff{};
    double eps_cut = 0.25;
    int eval_n = 17;
    double eval_extent = 0.0; // half-width of the evaluation box; 0 = auto

    void validate() const {
        if (!(eps_cut > 0.0) || !(eps_cut < cutoff.r1))
            throw ConfigError("SerfatiConfig: eps_cut must lie in (0, r1)");
        if (eval_n < 2) throw ConfigError("SerfatiConfig: eval_n must be >= 2");
    }
};

namespace serfati_detail {

/// Offset-lattice tables of the identity's kernels, shared by every snapshot
/// of a series. Offsets are (di, dj) grid steps from the integration node to
/// the evaluation node.
struct KernelTables {
    int n = 0;        // grid nodes per side
    int near_r = 0;   // offset radius of the near table
    Vec2 spacing{};
    // near: a(y) K(y), 2 components, dense (2 near_r + 1)^2
    std::vector<double> near;
    // far: d_j (grad_perp [(1-a)K_i])_k contracted layout: for each offset,
    // 2 components x (t11, t12+t21, t22) against (u1 u1, u1 u2, u2 u2).
    std::vector<double> far;
    // viscous: Delta[(1-a)K_i], 2 per offset, dense (2 visc_r + 1)^2
    int visc_r = 0;
    std::vector<double> visc;
    // blob: d_j[(1-a)K_i], 4 per offset (same dense layout as far)
    std::vector<double> blob;

    std::size_t far_index(int di, int dj) const {
        return (static_cast<std::size_t>(dj + n - 1) * (2 * n - 1) + (di + n - 1));
    }
};

inline KernelTables build_tables(const GridSpec& g, const SerfatiConfig& cfg, bool want_visc,
                                 bool want_blob) {
    KernelTables tb;
    tb.n = g.nx;
    tb.spacing = g.spacing;
    const CutoffPair& cut = cfg.cutoff;

    tb.near_r = static_cast<int>(std::ceil(cut.r2 / g.spacing.x)) + 1;
    const int nr = tb.near_r;
    tb.near.assign(static_cast<std::size_t>(2 * nr + 1) * (2 * nr + 1) * 2, 0.0);
    for (int dj = -nr; dj <= nr; ++dj)
        for (int di = -nr; di <= nr; ++di) {
            if (di == 0 && dj == 0) continue; // singular cell handled analytically
            const Vec2 y{di * g.spacing.x, dj * g.spacing.y};
            const double r = y.norm();
            if (r >= cut.r2) continue;
            const double a = cut.value(r);
            if (a == 0.0) continue;
            const Vec2 k = biot_savart(y);
            const std::size_t p =
                (static_cast<std::size_t>(dj + nr) * (2 * nr + 1) + (di + nr)) * 2;
            tb.near[p] = a * k.x;
            tb.near[p + 1] = a * k.y;
        }

    const int n = tb.n;
    tb.far.assign(static_cast<std::size_t>(2 * n - 1) * (2 * n - 1) * 6, 0.0);
    parallel_for(static_cast<std::size_t>(2 * n - 1), [&](std::size_t row) {
        const int dj = static_cast<int>(row) - (n - 1);
        for (int di = -(n - 1); di <= n - 1; ++di) {
            const Vec2 y{di * g.spacing.x, dj * g.spacing.y};
            if (y.norm() <= cut.r1) continue; // identically zero inside
            const auto m = serfati_far_kernel(y, cut);
            const std::size_t p = tb.far_index(di, dj) * 6;
            tb.far[p] = m[0].a11;
            tb.far[p + 1] = m[0].a12 + m[0].a21;
            tb.far[p + 2] = m[0].a22;
            tb.far[p + 3] = m[1].a11;
            tb.far[p + 4] = m[1].a12 + m[1].a21;
            tb.far[p + 5] = m[1].a22;
        }
    });

    if (want_visc) {
        tb.visc_r = static_cast<int>(std::ceil(cut.r2 / g.spacing.x)) + 1;
        const int vr = tb.visc_r;
        tb.visc.assign(static_cast<std::size_t>(2 * vr + 1) * (2 * vr + 1) * 2, 0.0);
        for (int dj = -vr; dj <= vr; ++dj)
            for (int di = -vr; di <= vr; ++di) {
                const Vec2 y{di * g.spacing.x, dj * g.spacing.y};
                const Vec2 v = viscous_far_kernel(y, cut);
                const std::size_t p =
                    (static_cast<std::size_t>(dj + vr) * (2 * vr + 1) + (di + vr)) * 2;
                tb.visc[p] = v.x;
                tb.visc[p + 1] = v.y;
            }
    }
    if (want_blob) {
        tb.blob.assign(static_cast<std::size_t>(2 * n - 1) * (2 * n - 1) * 4, 0.0);
        parallel_for(static_cast<std::size_t>(2 * n - 1), [&](std::size_t row) {
            const int dj = static_cast<int>(row) - (n - 1);
            for (int di = -(n - 1); di <= n - 1; ++di) {
                const Vec2 y{di * g.spacing.x, dj * g.spacing.y};
                if (y.norm() <= cut.r1) continue;
                const Mat2 gk = grad_far_kernel(y, cut);
                const std::size_t p = tb.far_index(di, dj) * 4;
                tb.blob[p] = gk.a11;
                tb.blob[p + 1] = gk.a12;
                tb.blob[p + 2] = gk.a21;
                tb.blob[p + 3] = gk.a22;
            }
        });
    }
    return tb;
}

} // namespace serfati_detail

/// Discrete residual of the Serfati velocity representation
///   u_i(t) = u_i(t0) + (a K_i) * (w(t) - w(t0))
///            - int_{t0}^t grad grad_perp[(1-a)K_i] (star) (u (x) u) ds
///            [VV] + int Delta[(1-a)K_i] * (nu w) ds
///            [VB] + int grad[(1-a)K_i] (star) F ds,
/// reported as the L^2 norm of (LHS - RHS) over the evaluation box at each
/// snapshot time. Snapshots must share one grid and be uniformly spaced in
/// time; time integrals use the trapezoid rule over snapshots.
inline std::vector<double> serfati_residual(const std::vector<SerfatiSnapshot>& snaps,
                                            const SerfatiConfig& cfg, MethodTag method,
                                            double nu = 0.0) {
    cfg.validate();
    if (snaps.size() < 1) throw ConfigError("serfati_residual: need at least one snapshot");
    const GridSpec g = snaps[0].omega.spec;
    if (g.nx != g.ny) throw ConfigError("serfati_residual: grid must be square");
    for (const auto& s : snaps) {
        if (!s.omega.spec.same_as(g) || !s.u.spec.same_as(g))
            throw ConfigError("serfati_residual: snapshots on mismatched grids");
        if (method == MethodTag::VB && s.F.data.empty())
            throw ConfigError("serfati_residual: VB correction requires F snapshots");
    }
    if (snaps.size() >= 3) {
        const double dt0 = snaps[1].t - snaps[0].t;
        for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
            const double dtk = snaps[k + 1].t - snaps[k].t;
            if (std::abs(dtk - dt0) > 1e-9 * std::max(std::abs(dt0), 1.0))
                throw ConfigError("serfati_residual: snapshot times not uniformly spaced");
        }
    }
    if (method == MethodTag::VV && !(nu > 0.0))
        throw ConfigError("serfati_residual: VV correction requires nu > 0");

    const auto tables =
        serfati_detail::build_tables(g, cfg, method == MethodTag::VV, method == MethodTag::VB);

    // Evaluation nodes: eval_n x eval_n grid nodes snapped to the snapshot
    // grid inside the evaluation box.
    const double gx_half = 0.5 * g.spacing.x * (g.nx - 1);
    const double extent = cfg.eval_extent > 0.0 ? cfg.eval_extent : 0.45 * gx_half;
    const int m = cfg.eval_n;
    std::vector<int> ei(m * m), ej(m * m);
    for (int q = 0; q < m; ++q)
        for (int p = 0; p < m; ++p) {
            const double x = -extent + 2.0 * extent * p / (m - 1);
            const double y = -extent + 2.0 * extent * q / (m - 1);
            int ii = static_cast<int>(std::lround((x - g.origin.x) / g.spacing.x));
            int jj = static_cast<int>(std::lround((y - g.origin.y) / g.spacing.y));
            ii = std::clamp(ii, 0, g.nx - 1);
            jj = std::clamp(jj, 0, g.ny - 1);
            ei[q * m + p] = ii;
            ej[q * m + p] = jj;
        }
    const std::size_t ne = ei.size();
    const double eval_cell = (2.0 * extent / (m - 1)) * (2.0 * extent / (m - 1));
    const double dA = g.cell_area();
    const double rc = std::sqrt(dA / kPi); // equal-area disc of the singular cell

    // Time-integrated correction terms, accumulated as prefix trapezoids of
    // per-snapshot integrands evaluated at the eval nodes (2 comps each).
    std::vector<double> far_acc(2 * ne, 0.0), far_prev(2 * ne, 0.0);
    std::vector<double> visc_acc(2 * ne, 0.0), visc_prev(2 * ne, 0.0);
    std::vector<double> blob_acc(2 * ne, 0.0), blob_prev(2 * ne, 0.0);
    std::vector<double> residuals(snaps.size(), 0.0);

    const int n = g.nx;
    std::vector<double> uu(static_cast<std::size_t>(n) * n * 3);

    for (std::size_t k = 0; k < snaps.size(); ++k) {
        const auto& sk = snaps[k];
        // u (x) u products for the far contraction
        for (std::size_t node = 0; node < g.size(); ++node) {
            const double u1 = sk.u.data[2 * node];
            const double u2 = sk.u.data[2 * node + 1];
            uu[3 * node] = u1 * u1;
            uu[3 * node + 1] = u1 * u2;
            uu[3 * node + 2] = u2 * u2;
        }

        std::vector<double> far_now(2 * ne, 0.0), visc_now(2 * ne, 0.0), blob_now(2 * ne, 0.0);
        parallel_for(ne, [&](std::size_t q) {
            const int xi = ei[q], xj = ej[q];
            double f1 = 0.0, f2 = 0.0;
            for (int j = 0; j < n; ++j) {
                for (int i = 0; i < n; ++i) {
                    const std::size_t fp = tables.far_index(xi - i, xj - j) * 6;
                    const std::size_t np = 3 * g.index(i, j);
                    const double p11 = uu[np], p12 = uu[np + 1], p22 = uu[np + 2];
                    f1 += tables.far[fp] * p11 + tables.far[fp + 1] * p12 +
                          tables.far[fp + 2] * p22;
                    f2 += tables.far[fp + 3] * p11 + tables.far[fp + 4] * p12 +
                          tables.far[fp + 5] * p22;
                }
            }
            far_now[2 * q] = f1 * dA;
            far_now[2 * q + 1] = f2 * dA;

            if (method == MethodTag::VV) {
                const int vr = tables.visc_r;
                double v1 = 0.0, v2 = 0.0;
                for (int dj = -vr; dj <= vr; ++dj) {
                    const int j = xj - dj;
                    if (j < 0 || j >= n) continue;
                    for (int di = -vr; di <= vr; ++di) {
                        const int i = xi - di;
                        if (i < 0 || i >= n) continue;
                        const std::size_t vp =
                            (static_cast<std::size_t>(dj + vr) * (2 * vr + 1) + (di + vr)) * 2;
                        const double w = sk.omega.data[g.index(i, j)];
                        v1 += tables.visc[vp] * w;
                        v2 += tables.visc[vp + 1] * w;
                    }
                }
                visc_now[2 * q] = nu * v1 * dA;
                visc_now[2 * q + 1] = nu * v2 * dA;
            }
            if (method == MethodTag::VB) {
                double b1 = 0.0, b2 = 0.0;
                for (int j = 0; j < n; ++j)
                    for (int i = 0; i < n; ++i) {
                        const std::size_t bp = tables.far_index(xi - i, xj - j) * 4;
                        const std::size_t np = 2 * g.index(i, j);
                        const double F1 = sk.F.data[np], F2 = sk.F.data[np + 1];
                        b1 += tables.blob[bp] * F1 + tables.blob[bp + 1] * F2;
                        b2 += tables.blob[bp + 2] * F1 + tables.blob[bp + 3] * F2;
                    }
                blob_now[2 * q] = b1 * dA;
                blob_now[2 * q + 1] = b2 * dA;
            }
        });

        if (k > 0) {
            const double half_dt = 0.5 * (snaps[k].t - snaps[k - 1].t);
            for (std::size_t q = 0; q < 2 * ne; ++q) {
                far_acc[q] += half_dt * (far_prev[q] + far_now[q]);
                visc_acc[q] += half_dt * (visc_prev[q] + visc_now[q]);
                blob_acc[q] += half_dt * (blob_prev[q] + blob_now[q]);
            }
        }
        far_prev = far_now;
        visc_prev = visc_now;
        blob_prev = blob_now;

        // Residual at this snapshot: LHS - RHS at every eval node.
        const auto& s0 = snaps[0];
        double sumsq = 0.0;
        const int nr = tables.near_r;
        for (std::size_t q = 0; q < ne; ++q) {
            const int xi = ei[q], xj = ej[q];
            // near-field convolution with the vorticity increment
            double near1 = 0.0, near2 = 0.0;
            for (int dj = -nr; dj <= nr; ++dj) {
                const int j = xj - dj;
                if (j < 0 || j >= n) continue;
                for (int di = -nr; di <= nr; ++di) {
                    const int i = xi - di;
                    if (i < 0 || i >= n) continue;
                    const std::size_t np =
                        (static_cast<std::size_t>(dj + nr) * (2 * nr + 1) + (di + nr)) * 2;
                    const double dw =
                        sk.omega.data[g.index(i, j)] - s0.omega.data[g.index(i, j)];
                    near1 += tables.near[np] * dw;
                    near2 += tables.near[np + 1] * dw;
                }
            }
            near1 *= dA;
            near2 *= dA;
            // analytic equal-area disc around the singular cell:
            // int_{B_rc} K_i(y) g(x - y) dy = (rc^2/4) (d2 g, -d1 g)
            if (xi > 0 && xi + 1 < n && xj > 0 && xj + 1 < n) {
                auto dw_at = [&](int i, int j) {
                    return sk.omega.data[g.index(i, j)] - s0.omega.data[g.index(i, j)];
                };
                const double gx =
                    (dw_at(xi + 1, xj) - dw_at(xi - 1, xj)) / (2.0 * g.spacing.x);
                const double gy =
                    (dw_at(xi, xj + 1) - dw_at(xi, xj - 1)) / (2.0 * g.spacing.y);
                near1 += 0.25 * rc * rc * gy;
                near2 -= 0.25 * rc * rc * gx;
            }

            const std::size_t node = g.index(xi, xj);
            const double r1 = sk.u.data[2 * node] -
                              (s0.u.data[2 * node] + near1 - far_acc[2 * q] +
                               visc_acc[2 * q] + blob_acc[2 * q]);
            const double r2 = sk.u.data[2 * node + 1] -
                              (s0.u.data[2 * node + 1] + near2 - far_acc[2 * q + 1] +
                               visc_acc[2 * q + 1] + blob_acc[2 * q + 1]);
            sumsq += r1 * r1 + r2 * r2;
        }
        residuals[k] = std::sqrt(sumsq * eval_cell);
    }
    return residuals;
}

} // namespace euler2d
