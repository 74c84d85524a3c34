#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include "euler2d/blob.hpp"
#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/kernel.hpp"
#include "euler2d/orlicz.hpp"
#include "euler2d/parallel.hpp"

namespace euler2d {

// ---------------------------------------------------------------------------
// Mean vorticity and kinetic energy
// ---------------------------------------------------------------------------

inline double mean_vorticity(const BlobEnsemble& e) { return e.total_circulation(); }

inline double mean_vorticity(const ScalarField& f) {
    double acc = 0.0;
    for (double v : f.data) acc += v;
    return acc * f.spec.cell_area();
}

/// (1/2) int |u|^2 by midpoint quadrature.
inline double kinetic_energy_grid(const VectorField& u) {
    double acc = 0.0;
    for (std::size_t p = 0; p < u.spec.size(); ++p) {
        const double m = u.magnitude(p);
        acc += m * m;
    }
    return 0.5 * acc * u.spec.cell_area();
}

// ---------------------------------------------------------------------------
// Pairwise (vorticity-based) kinetic energy
// ---------------------------------------------------------------------------

/// Exponential integral E1(x) for x > 0: power series below 1, modified
/// Lentz continued fraction above.
inline double expint_e1(double x) {
    if (!(x > 0.0)) throw DomainError("expint_e1: need x > 0");
    constexpr double euler_gamma = 0.5772156649015328606;
    if (x <= 1.0) {
        double sum = 0.0, term = 1.0;
        for (int k = 1; k < 40; ++k) {
            term *= -x / k;
            sum += term / k;
            if (std::abs(term) < 1e-18) break;
        }
        return -euler_gamma - std::log(x) - sum;
    }
    // E1(x) = exp(-x) * CF, CF = 1/(x+1- 1/(x+3- 4/(x+5- 9/(...))))
    const double tiny = 1e-300;
    double b = x + 1.0;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int k = 1; k < 200; ++k) {
        const double a = -static_cast<double>(k) * k;
        b += 2.0;
        d = 1.0 / (a * d + b);
        c = b + a / c;
        const double delta = c * d;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x);
}

/// Scaled log-interaction of two unit-mass blobs:
///   g1(rho) = int int phi(a) phi(b) log|rho e1 + a - b| da db,
/// so the interaction of circulations at distance d is log(eps) + g1(d/eps)
/// and the self term is log(eps) + g1(0). Gaussian blobs have the closed form
/// g1(rho) = log(rho) + E1(rho^2/2)/2; the bump profile is tabulated once by
/// radial quadrature.
class PairInteraction {
public:
    explicit PairInteraction(const BlobProfile& profile) : kind_(profile.kind) {
        if (kind_ == ProfileKind::bump) build_bump_table(profile);
    }

    double scaled(double rho) const {
        if (kind_ == ProfileKind::gaussian) {
            if (rho <= 0.0) return self_gaussian();
            if (rho >= 40.0) return std::log(rho);
            return std::log(rho) + 0.5 * expint_e1(0.5 * rho * rho);
        }
        if (rho >= 2.0) return std::log(rho); // support of phi*phi ends at 2
        return table_(rho);
    }

    double self() const {
        return kind_ == ProfileKind::gaussian ? self_gaussian() : table_(0.0);
    }

private:
    static double self_gaussian() {
        // log(sqrt(2)) - gamma/2 = 0.05796575782920622
        return 0.5 * std::log(2.0) - 0.5 * 0.5772156649015328606;
    }

    void build_bump_table(const BlobProfile& profile) {
        // Radial potential of one unit blob: G1(s) = log(s) M(s)
        // + 2 pi int_s^1 log(sigma) phi(sigma) sigma dsigma, log(s) for s >= 1.
        constexpr int ng = 1024;
        std::vector<double> g1(ng + 1);
        auto tail = [&](double s) {
            if (s >= 1.0) return 0.0;
            double acc = 0.0;
            const int panels = 160;
            const double hh = (1.0 - s) / panels;
            for (int p = 0; p < panels; ++p) {
                const double a = s + p * hh;
                const double m = a + 0.5 * hh;
                const double b = a + hh;
                auto f = [&](double sig) {
                    return sig > 0.0 ? std::log(sig) * profile.density(sig, 1.0) * sig : 0.0;
                };
                acc += hh / 6.0 * (f(a) + 4.0 * f(m) + f(b));
            }
            return kTwoPi * acc;
        };
        const double ds = 1.0 / ng;
        for (int i = 0; i <= ng; ++i) {
            const double s = i * ds;
            const double logterm = s > 0.0 ? std::log(s) * profile.enclosed_mass(s) : 0.0;
            g1[i] = logterm + tail(s);
        }
        detail::MonotoneCubicTable pot(0.0, ds, std::move(g1));

        // Outer average over the second blob in polar coordinates (adaptive
        // radial panels, trapezoid in the periodic angle).
        constexpr int nd = 512;
        const double dmax = 2.0;
        std::vector<double> vals(nd + 1);
        const int nang = 256;
        for (int i = 0; i <= nd; ++i) {
            const double d = dmax * i / nd;
            auto radial = [&](double a) {
                double ang = 0.0;
                for (int it = 0; it < nang; ++it) {
                    const double th = kTwoPi * (it + 0.5) / nang;
                    const double s = std::hypot(d + a * std::cos(th), a * std::sin(th));
                    ang += (s >= 1.0 ? std::log(s) : pot(s));
                }
                return profile.density(a, 1.0) * a * ang * (kTwoPi / nang);
            };
            vals[i] = detail::integrate(radial, 0.0, 1.0, 1e-10, 14);
        }
        table_ = detail::MonotoneCubicTable(0.0, dmax / nd, std::move(vals));
    }

    ProfileKind kind_;
    detail::MonotoneCubicTable table_;
};

/// Process-wide cached interaction tables (the bump table costs a couple of
/// seconds to build; profiles carry no parameters beyond their kind).
inline const PairInteraction& pair_interaction(ProfileKind kind) {
    static const PairInteraction gauss{BlobProfile{ProfileKind::gaussian}};
    static const PairInteraction bump{BlobProfile{ProfileKind::bump}};
    return kind == ProfileKind::gaussian ? gauss : bump;
}

/// Vorticity-based kinetic energy of a blob ensemble:
///   E = -(1/4pi) sum_ij Gamma_i Gamma_j G(|X_i - X_j|),
/// with G the blob-regularized log interaction. Requires (numerically) zero
/// total circulation; otherwise the true kinetic energy is infinite.
inline double kinetic_energy_pairwise(const BlobEnsemble& e) {
    const double total = e.total_circulation();
    const double absc = e.abs_circulation();
    if (absc > 0.0 && std::abs(total) > 1e-6 * absc)
        throw DataError("kinetic_energy_pairwise: total circulation " + fmt_double(total) +
                        " is not zero; kinetic energy is infinite for compactly supported "
                        "vorticity with nonzero mean");
    const PairInteraction& pair = pair_interaction(e.profile.kind);
    const double log_eps = std::log(e.eps);
    const double g_self = pair.self();
    const std::size_t n = e.size();
    const double inv_eps = 1.0 / e.eps;

    const double interactions = parallel_sum(n, [&](std::size_t i) {
        const Vec2 xi = e.pos[i];
        const double gi = e.gamma[i];
        double acc = gi * gi * g_self; // diagonal
        double cross = 0.0;
        for (std::size_t j = i + 1; j < n; ++j) {
            const double rho = (xi - e.pos[j]).norm() * inv_eps;
            cross += e.gamma[j] * pair.scaled(rho);
        }
        return acc + 2.0 * gi * cross;
    });
    // The common log(eps) offset multiplies (sum Gamma)^2, kept for exactness.
    return -(interactions + log_eps * total * total) / (4.0 * kPi);
}

/// Self-energy of a single blob under the pairwise convention; finite and
/// positive for eps < 1-ish widths.
inline double blob_self_energy(const BlobProfile& profile, double eps, double gamma) {
    return -(gamma * gamma) * (std::log(eps) + pair_interaction(profile.kind).self()) /
           (4.0 * kPi);
}

// ---------------------------------------------------------------------------
// Structure function and Cauchy distance
// ---------------------------------------------------------------------------

/// Second-order structure function: for each radius r,
///   S2(u; r) = sqrt( int_x avg_{|h| <= r} |u(x+h) - u(x)|^2 dx ),
/// where h runs over all grid offsets inside the disc (the zero offset
/// included). Periodic wrap or interior restriction per the flag.
inline std::vector<double> structure_function(const VectorField& u,
                                              const std::vector<double>& radii,
                                              bool periodic = true) {
    const GridSpec& g = u.spec;
    std::vector<double> out;
    out.reserve(radii.size());
    for (double r : radii) {
        if (!(r > 0.0)) throw ConfigError("structure_function: radii must be positive");
        const int ox_max = static_cast<int>(std::floor(r / g.spacing.x));
        const int oy_max = static_cast<int>(std::floor(r / g.spacing.y));
        if (2 * ox_max >= g.nx || 2 * oy_max >= g.ny)
            throw ConfigError("structure_function: radius " + fmt_double(r) +
                              " exceeds half the grid extent");
        std::vector<std::pair<int, int>> offsets;
        for (int oy = -oy_max; oy <= oy_max; ++oy)
            for (int ox = -ox_max; ox <= ox_max; ++ox) {
                const double hx = ox * g.spacing.x, hy = oy * g.spacing.y;
                if (hx * hx + hy * hy <= r * r) offsets.emplace_back(ox, oy);
            }
        const double inv_cnt = 1.0 / static_cast<double>(offsets.size());
        double total = 0.0;
        if (periodic) {
            total = parallel_sum(g.size(), [&](std::size_t node) {
                const int i = static_cast<int>(node) % g.nx;
                const int j = static_cast<int>(node) / g.nx;
                const Vec2 u0 = {u.data[2 * node], u.data[2 * node + 1]};
                double acc = 0.0;
                for (const auto& [ox, oy] : offsets) {
                    const int ii = (i + ox + g.nx) % g.nx;
                    const int jj = (j + oy + g.ny) % g.ny;
                    const std::size_t q = g.index(ii, jj);
                    const double dx = u.data[2 * q] - u0.x;
                    const double dy = u.data[2 * q + 1] - u0.y;
                    acc += dx * dx + dy * dy;
                }
                return acc * inv_cnt;
            });
        } else {
            for (int j = oy_max; j < g.ny - oy_max; ++j)
                for (int i = ox_max; i < g.nx - ox_max; ++i) {
                    const std::size_t node = g.index(i, j);
                    const Vec2 u0 = {u.data[2 * node], u.data[2 * node + 1]};
                    double acc = 0.0;
                    for (const auto& [ox, oy] : offsets) {
                        const std::size_t q = g.index(i + ox, j + oy);
                        const double dx = u.data[2 * q] - u0.x;
                        const double dy = u.data[2 * q + 1] - u0.y;
                        acc += dx * dx + dy * dy;
                    }
                    total += acc * inv_cnt;
                }
        }
        out.push_back(std::sqrt(total * g.cell_area()));
    }
    return out;
}

/// L^2 distance between two velocity fields on one grid.
inline double cauchy_distance(const VectorField& a, const VectorField& b) {
    if (!a.spec.same_as(b.spec))
        throw ConfigError("cauchy_distance: grid specs differ");
    double acc = 0.0;
    for (std::size_t p = 0; p < a.data.size(); p += 2) {
        const double dx = a.data[p] - b.data[p];
        const double dy = a.data[p + 1] - b.data[p + 1];
        acc += dx * dx + dy * dy;
    }
    return std::sqrt(acc * a.spec.cell_area());
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

struct ReportRow {
    double t = 0.0;
    double energy = 0.0;
    double l1 = 0.0;
    double modular = 0.0;
    double luxemburg = 0.0;
    double mean_vort = 0.0;
    double serfati_res = 0.0;
    double max_speed = 0.0;
    double dt = 0.0;
};

/// Time series of the verification quantities plus enough metadata to re-run.
struct DiagnosticsReport {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<ReportRow> rows;

    void validate() const {
        double prev = -std::numeric_limits<double>::infinity();
        for (const auto& r : rows) {
            if (!(r.t >= prev)) throw DataError("DiagnosticsReport: rows not time-ordered");
            prev = r.t;
            for (double v : {r.t, r.energy, r.l1, r.modular, r.luxemburg, r.mean_vort,
                             r.serfati_res, r.max_speed, r.dt})
                if (!std::isfinite(v)) throw DataError("DiagnosticsReport: non-finite entry");
        }
    }

    static constexpr const char* csv_header =
        "t,energy,l1,modular,luxemburg,mean_vort,serfati_res,max_speed,dt";

    void write_csv(const std::string& path) const {
        validate();
        std::ofstream os(path);
        if (!os) throw DataError("DiagnosticsReport: cannot open " + path);
        for (const auto& [k, v] : metadata) os << "# " << k << "=" << v << "\n";
        os << csv_header << "\n";
        for (const auto& r : rows) {
            os << fmt_double(r.t) << "," << fmt_double(r.energy) << "," << fmt_double(r.l1)
               << "," << fmt_double(r.modular) << "," << fmt_double(r.luxemburg) << ","
               << fmt_double(r.mean_vort) << "," << fmt_double(r.serfati_res) << ","
               << fmt_double(r.max_speed) << "," << fmt_double(r.dt) << "\n";
        }
    }

    static DiagnosticsReport read_csv(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw DataError("DiagnosticsReport: cannot open " + path);
        DiagnosticsReport rep;
        std::string line;
        bool header_seen = false;
        while (std::getline(is, line)) {
            if (line.empty()) continue;
            if (line[0] == '#') {
                const auto eq = line.find('=');
                if (eq != std::string::npos) {
                    std::string key = line.substr(1, eq - 1);
                    key.erase(0, key.find_first_not_of(" \t"));
                    key.erase(key.find_last_not_of(" \t") + 1);
                    rep.metadata.emplace_back(key, line.substr(eq + 1));
                }
                continue;
            }
            if (!header_seen) {
                if (line != csv_header)
                    throw DataError("DiagnosticsReport: unexpected CSV header '" + line + "'");
                header_seen = true;
                continue;
            }
            ReportRow r;
            double* fields[9] = {&r.t,         &r.energy,    &r.l1,
                                 &r.modular,   &r.luxemburg, &r.mean_vort,
                                 &r.serfati_res, &r.max_speed, &r.dt};
            std::size_t pos = 0;
            for (int f = 0; f < 9; ++f) {
                const auto comma = line.find(',', pos);
                const std::string tok =
                    line.substr(pos, comma == std::string::npos ? comma : comma - pos);
                *fields[f] = parse_double(tok);
                if (comma == std::string::npos && f < 8)
                    throw DataError("DiagnosticsReport: short CSV row");
                pos = comma + 1;
            }
            rep.rows.push_back(r);
        }
        if (!header_seen) throw DataError("DiagnosticsReport: no CSV header found");
        return rep;
    }
};

} // namespace euler2d
