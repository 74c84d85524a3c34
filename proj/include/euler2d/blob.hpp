#pragma once

#include <cmath>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/kernel.hpp"
#include "euler2d/parallel.hpp"
#include "euler2d/treecode.hpp"

namespace euler2d {

// ---------------------------------------------------------------------------
// Ensemble and parameters
// ---------------------------------------------------------------------------

/// Discrete vorticity: N blobs of circulation gamma_i carried at positions
/// X_i, all sharing one mollification width eps and profile.
struct BlobEnsemble {
    std::vector<Vec2> pos;
    std::vector<double> gamma;
    double eps = 0.1;
    BlobProfile profile;
    double t = 0.0;

    std::size_t size() const { return pos.size(); }

    double total_circulation() const {
        double s = 0.0;
        for (double g : gamma) s += g;
        return s;
    }
    double abs_circulation() const {
        double s = 0.0;
        for (double g : gamma) s += std::abs(g);
        return s;
    }
    Vec2 linear_impulse() const {
        Vec2 s{0.0, 0.0};
        for (std::size_t i = 0; i < pos.size(); ++i) s += gamma[i] * pos[i];
        return s;
    }
    double angular_impulse() const {
        double s = 0.0;
        for (std::size_t i = 0; i < pos.size(); ++i) s += gamma[i] * pos[i].norm2();
        return s;
    }
};

enum class HCoupling { manual, practical, theoretical_A1, theoretical_A2 };

inline const char* to_string(HCoupling m) {
    switch (m) {
        case HCoupling::manual: return "manual";
        case HCoupling::practical: return "practical";
        case HCoupling::theoretical_A1: return "theoretical_A1";
        case HCoupling::theoretical_A2: return "theoretical_A2";
    }
    return "?";
}

/// Blob discretization parameters: blob width eps, initial-data mollification
/// width delta, lattice spacing h and how h is coupled to eps.
struct VortexBlobParams {
    double eps = 0.1;
    double delta = 0.05;
    double h = 0.0;
    HCoupling mode = HCoupling::practical;
    double practical_c = 1.0;  // practical coupling h = c * eps^q
    double practical_q = 1.5;
    double c0 = 1.0; // constants of the theoretical couplings
    double c1 = 1.0;
    double sigma = 0.1; // delta = eps^sigma default coupling, sigma in (0, 1/7)

    void validate() const {
        if (!(eps > 0.0) || !(delta > 0.0) || !(h > 0.0))
            throw ConfigError("VortexBlobParams: eps, delta, h must be positive");
        if (mode == HCoupling::practical && h > eps + 1e-15)
            throw ConfigError("VortexBlobParams: overlap condition h <= eps violated (h=" +
                              fmt_double(h) + ", eps=" + fmt_double(eps) + ")");
    }
};

struct TheoreticalH {
    double value = 0.0;
    bool impractical = false; // below 1e-12: unrunnable at desk scale
};

/// Lattice spacing from the chosen eps coupling. The theoretical couplings
/// collapse below machine precision at any runnable eps; callers get a
/// warning flag instead of a silent absurd value.
inline TheoreticalH theoretical_h(double eps, HCoupling mode, double c0, double c1,
                                  double omega0_l1, double T,
                                  double practical_c = 1.0, double practical_q = 1.5) {
    if (!(eps > 0.0) || !(eps < 1.0)) throw ConfigError("theoretical_h: need eps in (0,1)");
    TheoreticalH out;
    switch (mode) {
        case HCoupling::manual:
            throw ConfigError("theoretical_h: manual mode carries no formula");
        case HCoupling::practical:
            out.value = practical_c * std::pow(eps, practical_q);
            break;
        case HCoupling::theoretical_A1:
            out.value = std::pow(eps, 4) * std::exp(-c1 * omega0_l1 * T / (eps * eps));
            break;
        case HCoupling::theoretical_A2:
            out.value = c1 * std::pow(eps, 6) * std::exp(-c0 / (eps * eps));
            break;
    }
    out.impractical = out.value < 1e-12;
    return out;
}

// ---------------------------------------------------------------------------
// Initial data: mollification and lattice tiling
// ---------------------------------------------------------------------------

inline ScalarField sample_on_grid(const std::function<double(Vec2)>& f, const GridSpec& spec) {
    ScalarField out(spec);
    for (int j = 0; j < spec.ny; ++j)
        for (int i = 0; i < spec.nx; ++i) out.at(i, j) = f(spec.node(i, j));
    return out;
}

/// omega0 * j_delta by discrete convolution with the sampled mollifier,
/// normalized to unit discrete mass. The output grid is the input grid
/// extended by the mollifier footprint (at least 2 delta), so the total
/// integral is preserved to roundoff and Jensen's inequality holds exactly
/// for convex integrands.
inline ScalarField mollify_initial(const ScalarField& w0, double delta,
                                   const BlobProfile& mollifier = {}) {
    if (!(delta > 0.0)) throw ConfigError("mollify_initial: delta must be positive");
    const GridSpec& in = w0.spec;

    // The data must be compactly supported inside its grid.
    double vmax = 0.0;
    for (double v : w0.data) vmax = std::max(vmax, std::abs(v));
    if (vmax > 0.0) {
        for (int i = 0; i < in.nx; ++i) {
            if (std::abs(w0.at(i, 0)) > 1e-12 * vmax || std::abs(w0.at(i, in.ny - 1)) > 1e-12 * vmax)
                throw ConfigError("mollify_initial: support touches the grid boundary");
        }
        for (int j = 0; j < in.ny; ++j) {
            if (std::abs(w0.at(0, j)) > 1e-12 * vmax || std::abs(w0.at(in.nx - 1, j)) > 1e-12 * vmax)
                throw ConfigError("mollify_initial: support touches the grid boundary");
        }
    }

    const double margin = std::max(2.0, mollifier.far_radius_factor()) * delta;
    const int mx = static_cast<int>(std::ceil(margin / in.spacing.x));
    const int my = static_cast<int>(std::ceil(margin / in.spacing.y));

    GridSpec out_spec = in;
    out_spec.origin = {in.origin.x - mx * in.spacing.x, in.origin.y - my * in.spacing.y};
    out_spec.nx = in.nx + 2 * mx;
    out_spec.ny = in.ny + 2 * my;
    ScalarField out(out_spec, w0.time);

    if (mollifier.kind == ProfileKind::gaussian) {
        // Separable kernel: two 1D passes with a unit-sum sampled kernel.
        auto make_kernel = [&](double dx, int m) {
            std::vector<double> k(2 * m + 1);
            double s = 0.0;
            for (int o = -m; o <= m; ++o) {
                const double v = std::exp(-(o * dx) * (o * dx) / (delta * delta));
                k[o + m] = v;
                s += v;
            }
            for (double& v : k) v /= s;
            return k;
        };
        const auto kx = make_kernel(in.spacing.x, mx);
        const auto ky = make_kernel(in.spacing.y, my);
        // Horizontal pass into a wide intermediate (same y extent as input).
        ScalarField mid(GridSpec{{out_spec.origin.x, in.origin.y},
                                 in.spacing, out_spec.nx, in.ny});
        for (int j = 0; j < in.ny; ++j)
            for (int i = 0; i < in.nx; ++i) {
                const double v = w0.at(i, j);
                if (v == 0.0) continue;
                for (int o = -mx; o <= mx; ++o) mid.at(i + mx + o, j) += v * kx[o + mx];
            }
        for (int j = 0; j < in.ny; ++j)
            for (int i = 0; i < out_spec.nx; ++i) {
                const double v = mid.at(i, j);
                if (v == 0.0) continue;
                for (int o = -my; o <= my; ++o) out.at(i, j + my + o) += v * ky[o + my];
            }
    } else {
        // Compact bump: direct 2D convolution with a unit-sum sampled kernel.
        std::vector<double> kern((2 * mx + 1) * (2 * my + 1));
        double s = 0.0;
        for (int oy = -my; oy <= my; ++oy)
            for (int ox = -mx; ox <= mx; ++ox) {
                const double r = std::hypot(ox * in.spacing.x, oy * in.spacing.y);
                const double v = mollifier.density(r, delta);
                kern[(oy + my) * (2 * mx + 1) + (ox + mx)] = v;
                s += v;
            }
        for (double& v : kern) v /= s;
        for (int j = 0; j < in.ny; ++j)
            for (int i = 0; i < in.nx; ++i) {
                const double v = w0.at(i, j);
                if (v == 0.0) continue;
                for (int oy = -my; oy <= my; ++oy)
                    for (int ox = -mx; ox <= mx; ++ox)
                        out.at(i + mx + ox, j + my + oy) +=
                            v * kern[(oy + my) * (2 * mx + 1) + (ox + mx)];
            }
    }
    return out;
}

/// Lattice tiling: one blob per square R_i of side h centered at the lattice
/// point h*(i1,i2) + offset, with circulation = the grid-quadrature integral
/// of the field over R_i. Blobs below drop_rel * max|Gamma| are removed.
inline BlobEnsemble tile_and_weigh(const ScalarField& w0eps, double h, double eps,
                                   const BlobProfile& profile, Vec2 lattice_offset = {0.0, 0.0},
                                   double drop_rel = 1e-14, std::size_t max_blobs = 2'000'000) {
    if (!(h > 0.0)) throw ConfigError("tile_and_weigh: h must be positive");
    const GridSpec& g = w0eps.spec;
    const double dA = g.cell_area();

    // Assign every grid node to the unique half-open square containing it;
    // dense accumulation over the lattice bounding box keeps this deterministic.
    const double inv_h = 1.0 / h;
    long i1_min = 0, i1_max = -1, i2_min = 0, i2_max = -1;
    {
        auto idx_of = [&](double x, double off) {
            return static_cast<long>(std::floor((x - off) * inv_h + 0.5));
        };
        i1_min = idx_of(g.origin.x, lattice_offset.x);
        i1_max = idx_of(g.origin.x + g.spacing.x * (g.nx - 1), lattice_offset.x);
        i2_min = idx_of(g.origin.y, lattice_offset.y);
        i2_max = idx_of(g.origin.y + g.spacing.y * (g.ny - 1), lattice_offset.y);
    }
    const long ncx = i1_max - i1_min + 1;
    const long ncy = i2_max - i2_min + 1;
    if (ncx <= 0 || ncy <= 0) throw ConfigError("tile_and_weigh: empty grid");
    if (static_cast<std::size_t>(ncx) * static_cast<std::size_t>(ncy) > 80'000'000)
        throw SolverError("tile_and_weigh: lattice bounding box too large (resource cap)");
    std::vector<double> cells(static_cast<std::size_t>(ncx * ncy), 0.0);

    for (int j = 0; j < g.ny; ++j) {
        const double y = g.origin.y + g.spacing.y * j;
        const long i2 = static_cast<long>(std::floor((y - lattice_offset.y) * inv_h + 0.5));
        for (int i = 0; i < g.nx; ++i) {
            const double v = w0eps.at(i, j);
            if (v == 0.0) continue;
            const double x = g.origin.x + g.spacing.x * i;
            const long i1 = static_cast<long>(std::floor((x - lattice_offset.x) * inv_h + 0.5));
            cells[static_cast<std::size_t>((i2 - i2_min) * ncx + (i1 - i1_min))] += v * dA;
        }
    }

    double gmax = 0.0;
    for (double c : cells) gmax = std::max(gmax, std::abs(c));
    const double drop = drop_rel * gmax;

    BlobEnsemble e;
    e.eps = eps;
    e.profile = profile;
    e.t = 0.0;
    for (long cy = 0; cy < ncy; ++cy)
        for (long cx = 0; cx < ncx; ++cx) {
            const double gam = cells[static_cast<std::size_t>(cy * ncx + cx)];
            if (gam == 0.0 || std::abs(gam) < drop) continue;
            e.pos.push_back({lattice_offset.x + h * static_cast<double>(cx + i1_min),
                             lattice_offset.y + h * static_cast<double>(cy + i2_min)});
            e.gamma.push_back(gam);
            if (e.pos.size() > max_blobs)
                throw SolverError("tile_and_weigh: blob count exceeds cap of " +
                                  std::to_string(max_blobs));
        }
    return e;
}

// ---------------------------------------------------------------------------
// Velocity evaluation
// ---------------------------------------------------------------------------

struct VelocityOptions {
    enum class Path { direct, treecode, auto_select };
    Path path = Path::auto_select;
    double theta = 0.5;
    int order = 10;
    int leaf_size = 24;
    std::size_t auto_threshold = 2000; // auto: treecode when N >= threshold
};

/// Exact O(N*M) mollified Biot-Savart sum, parallel over targets.
inline std::vector<Vec2> velocity_direct(const BlobEnsemble& e, const std::vector<Vec2>& targets) {
    std::vector<Vec2> out(targets.size());
    const double far = e.eps * e.profile.far_radius_factor();
    const double far2 = far * far;
    const std::size_t n = e.size();
    parallel_for(targets.size(), [&](std::size_t ti) {
        const Vec2 x = targets[ti];
        Vec2 acc{0.0, 0.0};
        for (std::size_t j = 0; j < n; ++j)
            acc += blob_induced_velocity(x - e.pos[j], e.gamma[j], e.eps, far2, e.profile);
        out[ti] = acc;
    });
    return out;
}

/// Barnes-Hut evaluation; matches velocity_direct to ~theta-controlled
/// accuracy (<= 1e-3 max relative error at theta = 0.5 with the default order).
inline std::vector<Vec2> velocity_treecode(const BlobEnsemble& e, const std::vector<Vec2>& targets,
                                           double theta, int order = 10, int leaf_size = 24) {
    if (!(theta > 0.0) || !(theta < 1.0))
        throw ConfigError("velocity_treecode: theta must lie in (0,1)");
    VortexTree tree(e.pos, e.gamma, VortexTree::Params{theta, order, leaf_size});
    std::vector<Vec2> out(targets.size());
    parallel_for(targets.size(), [&](std::size_t ti) {
        out[ti] = tree.velocity_at(targets[ti], e.eps, e.profile);
    });
    return out;
}

inline std::vector<Vec2> velocity_eval(const BlobEnsemble& e, const std::vector<Vec2>& targets,
                                       const VelocityOptions& opt) {
    switch (opt.path) {
        case VelocityOptions::Path::direct: return velocity_direct(e, targets);
        case VelocityOptions::Path::treecode:
            return velocity_treecode(e, targets, opt.theta, opt.order, opt.leaf_size);
        case VelocityOptions::Path::auto_select:
            if (e.size() >= opt.auto_threshold)
                return velocity_treecode(e, targets, opt.theta, opt.order, opt.leaf_size);
            return velocity_direct(e, targets);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Time stepping
// ---------------------------------------------------------------------------

/// Classical RK4 update of all blob positions through the self-induced
/// velocity field. Circulations, eps and the profile are untouched.
inline void step(BlobEnsemble& e, double dt, const VelocityOptions& opt = {}) {
    if (!(dt > 0.0)) throw ConfigError("step: dt must be positive");
    const std::size_t n = e.size();
    const auto x0 = e.pos;

    auto eval_at = [&](const std::vector<Vec2>& stage_pos) {
        BlobEnsemble stage;
        stage.eps = e.eps;
        stage.profile = e.profile;
        stage.gamma = e.gamma;
        stage.pos = stage_pos;
        return velocity_eval(stage, stage_pos, opt);
    };

    const auto k1 = velocity_eval(e, e.pos, opt);
    std::vector<Vec2> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x0[i] + (0.5 * dt) * k1[i];
    const auto k2 = eval_at(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x0[i] + (0.5 * dt) * k2[i];
    const auto k3 = eval_at(tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x0[i] + dt * k3[i];
    const auto k4 = eval_at(tmp);

    for (std::size_t i = 0; i < n; ++i) {
        e.pos[i] = x0[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if (!std::isfinite(e.pos[i].x) || !std::isfinite(e.pos[i].y))
            throw SolverError("step: non-finite position for blob " + std::to_string(i) +
                              " after dt=" + fmt_double(dt) +
                              "; retry with dt=" + fmt_double(0.5 * dt));
    }
    e.t += dt;
}

/// Stability-motivated step size: safety * min(eps / max|u|, 1 / Lip) with a
/// sampled finite-difference estimate of |grad u|. Returns dt_max when the
/// ensemble is at rest.
inline double auto_dt(const BlobEnsemble& e, double safety, double dt_max,
                      const VelocityOptions& opt = {}) {
    if (!(safety > 0.0) || !(safety <= 1.0))
        throw ConfigError("auto_dt: safety must lie in (0,1]");
    if (e.size() == 0) return dt_max;
    const auto u = velocity_eval(e, e.pos, opt);
    double umax = 0.0;
    for (const auto& v : u) umax = std::max(umax, v.norm());
    if (umax == 0.0) return dt_max;

    // Finite-difference |grad u| on a strided sample of blob positions. Each
    // probe excludes the sampled blob's own kernel: the bound gauges the field
    // that advects the blob, and the self-term never moves it (K_eps(0) = 0).
    const std::size_t nsample = std::min<std::size_t>(e.size(), 64);
    const std::size_t stride = std::max<std::size_t>(1, e.size() / nsample);
    const double fd = e.eps / 8.0;
    std::vector<Vec2> probes;
    std::vector<std::size_t> owner;
    probes.reserve(4 * nsample);
    for (std::size_t i = 0; i < e.size(); i += stride) {
        const Vec2 x = e.pos[i];
        probes.push_back({x.x + fd, x.y});
        probes.push_back({x.x - fd, x.y});
        probes.push_back({x.x, x.y + fd});
        probes.push_back({x.x, x.y - fd});
        owner.push_back(i);
    }
    auto up = velocity_eval(e, probes, opt);
    const double far = e.eps * e.profile.far_radius_factor();
    for (std::size_t s = 0; s < up.size(); ++s) {
        const std::size_t i = owner[s / 4];
        up[s] -= blob_induced_velocity(probes[s] - e.pos[i], e.gamma[i], e.eps, far * far,
                                       e.profile);
    }
    double lip = 0.0;
    for (std::size_t s = 0; s + 3 < up.size(); s += 4) {
        const Vec2 dux = (up[s] - up[s + 1]) / (2.0 * fd);
        const Vec2 duy = (up[s + 2] - up[s + 3]) / (2.0 * fd);
        lip = std::max(lip, std::sqrt(dux.norm2() + duy.norm2()));
    }
    double dt = e.eps / umax;
    if (lip > 0.0) dt = std::min(dt, 1.0 / lip);
    return std::min(safety * dt, dt_max);
}

// ---------------------------------------------------------------------------
// Field reconstruction and the blob error fields
// ---------------------------------------------------------------------------

namespace blob_detail {

/// Check that the grid covers all blobs with the profile-dependent margin.
inline bool margin_ok(const BlobEnsemble& e, const GridSpec& g) {
    const double margin = (e.profile.kind == ProfileKind::gaussian ? 4.0 : 1.0) * e.eps;
    const double x_lo = g.origin.x + margin;
    const double x_hi = g.origin.x + g.spacing.x * (g.nx - 1) - margin;
    const double y_lo = g.origin.y + margin;
    const double y_hi = g.origin.y + g.spacing.y * (g.ny - 1) - margin;
    for (const auto& p : e.pos)
        if (p.x < x_lo || p.x > x_hi || p.y < y_lo || p.y > y_hi) return false;
    return true;
}

template <typename Fn>
void for_footprint(const GridSpec& g, const Vec2& center, double radius, Fn&& fn) {
    const int i_lo = std::max(0, static_cast<int>(std::ceil((center.x - radius - g.origin.x) / g.spacing.x)));
    const int i_hi = std::min(g.nx - 1, static_cast<int>(std::floor((center.x + radius - g.origin.x) / g.spacing.x)));
    const int j_lo = std::max(0, static_cast<int>(std::ceil((center.y - radius - g.origin.y) / g.spacing.y)));
    const int j_hi = std::min(g.ny - 1, static_cast<int>(std::floor((center.y + radius - g.origin.y) / g.spacing.y)));
    for (int j = j_lo; j <= j_hi; ++j)
        for (int i = i_lo; i <= i_hi; ++i) fn(i, j);
}

} // namespace blob_detail

/// Pointwise blob-density sum omega_eps(x) = sum Gamma_i phi_eps(x - X_i).
/// Sets the margin warning flag instead of failing when coverage is short.
inline ScalarField reconstruct_vorticity(const BlobEnsemble& e, const GridSpec& g) {
    ScalarField f(g, e.t);
    f.margin_warning = !blob_detail::margin_ok(e, g);
    const double radius = e.eps * e.profile.far_radius_factor();
    for (std::size_t b = 0; b < e.size(); ++b) {
        const Vec2 c = e.pos[b];
        const double gam = e.gamma[b];
        blob_detail::for_footprint(g, c, radius, [&](int i, int j) {
            const double r = (g.node(i, j) - c).norm();
            f.at(i, j) += gam * e.profile.density(r, e.eps);
        });
    }
    return f;
}

struct BlobErrorFields {
    VectorField F; // F_eps = sum [u(x)-u(X_i)] phi_eps(x-X_i) Gamma_i
    ScalarField E; // E_eps = sum [u(x)-u(X_i)] . grad phi_eps(x-X_i) Gamma_i
};

/// Consistency error fields of the blob method; E_eps = div F_eps in the
/// continuum, which tests verify by discrete divergence.
inline BlobErrorFields error_fields(const BlobEnsemble& e, const GridSpec& g,
                                    const VelocityOptions& opt = {}) {
    BlobErrorFields out{VectorField(g, e.t), ScalarField(g, e.t)};
    out.F.margin_warning = out.E.margin_warning = !blob_detail::margin_ok(e, g);
    if (e.size() == 0) return out;

    std::vector<Vec2> nodes(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) nodes[g.index(i, j)] = g.node(i, j);
    const auto u_grid = velocity_eval(e, nodes, opt);
    const auto u_blob = velocity_eval(e, e.pos, opt);

    const double radius = e.eps * e.profile.far_radius_factor();
    for (std::size_t b = 0; b < e.size(); ++b) {
        const Vec2 c = e.pos[b];
        const double gam = e.gamma[b];
        const Vec2 ub = u_blob[b];
        blob_detail::for_footprint(g, c, radius, [&](int i, int j) {
            const Vec2 d = g.node(i, j) - c;
            const double r = d.norm();
            const double phi = e.profile.density(r, e.eps);
            const Vec2 du = u_grid[g.index(i, j)] - ub;
            if (phi != 0.0) {
                out.F.at(i, j, 0) += du.x * phi * gam;
                out.F.at(i, j, 1) += du.y * phi * gam;
            }
            if (r > 0.0) {
                const double dphi = e.profile.density_deriv(r, e.eps);
                if (dphi != 0.0) {
                    const Vec2 grad_phi = d * (dphi / r);
                    out.E.at(i, j) += du.dot(grad_phi) * gam;
                }
            }
        });
    }
    return out;
}

inline ScalarField error_field_F_divergence(const VectorField& F) {
    ScalarField div(F.spec, F.time);
    const double inv2dx = 1.0 / (2.0 * F.spec.spacing.x);
    const double inv2dy = 1.0 / (2.0 * F.spec.spacing.y);
    for (int j = 1; j + 1 < F.spec.ny; ++j)
        for (int i = 1; i + 1 < F.spec.nx; ++i) {
            div.at(i, j) = (F.at(i + 1, j, 0) - F.at(i - 1, j, 0)) * inv2dx +
                           (F.at(i, j + 1, 1) - F.at(i, j - 1, 1)) * inv2dy;
        }
    return div;
}

// ---------------------------------------------------------------------------
// Snapshot files: '# t=<t> N=<n> eps=<e> profile=<kind>' then 'x y gamma' lines
// ---------------------------------------------------------------------------

inline void write_blobs(const BlobEnsemble& e, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("write_blobs: cannot open " + path);
    os << "# t=" << fmt_double(e.t) << " N=" << e.size() << " eps=" << fmt_double(e.eps)
       << " profile=" << to_string(e.profile.kind) << "\n";
    for (std::size_t i = 0; i < e.size(); ++i)
        os << fmt_double(e.pos[i].x) << " " << fmt_double(e.pos[i].y) << " "
           << fmt_double(e.gamma[i]) << "\n";
}

inline BlobEnsemble read_blobs(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw DataError("read_blobs: cannot open " + path);
    std::string header;
    std::getline(is, header);
    if (header.empty() || header[0] != '#')
        throw DataError("read_blobs: missing header in " + path);
    BlobEnsemble e;
    e.t = detail::header_value(header, "t");
    e.eps = detail::header_value(header, "eps");
    const auto n = static_cast<std::size_t>(detail::header_value(header, "N"));
    e.profile.kind = header.find("profile=bump") != std::string::npos ? ProfileKind::bump
                                                                      : ProfileKind::gaussian;
    std::string a, b, c;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(is >> a >> b >> c)) throw DataError("read_blobs: truncated data in " + path);
        e.pos.push_back({parse_double(a), parse_double(b)});
        e.gamma.push_back(parse_double(c));
    }
    return e;
}

} // namespace euler2d
