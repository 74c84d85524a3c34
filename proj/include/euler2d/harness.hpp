#pragma once

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "euler2d/blob.hpp"
#include "euler2d/diagnostics.hpp"
#include "euler2d/errors.hpp"
#include "euler2d/grid.hpp"
#include "euler2d/presets.hpp"
#include "euler2d/serfati.hpp"
#include "euler2d/spectral.hpp"

namespace euler2d {

// ---------------------------------------------------------------------------
// RunConfig: flat key=value config with strict key vocabulary
// ---------------------------------------------------------------------------

struct RunConfig {
    MethodTag method = MethodTag::ES;
    Preset preset;
    std::string preset_name = "smooth_dipole";
    double alpha = 1.0;
    double T = 1.0;
    double snapshot_dt = 0.0; // 0 -> T/100

    // vortex-blob parameters
    double eps = 0.0; // required for VB
    HCoupling h_mode = HCoupling::practical;
    double h_c = 1.0;
    double h_q = 1.5;
    double h_c0 = 1.0;
    double h_c1 = 1.0;
    double delta_sigma = 0.1;
    double theta_tree = 0.5;
    double drop_rel = 1e-14;
    ProfileKind profile = ProfileKind::gaussian;

    // spectral parameters
    double nu = 0.0; // required for VV
    std::optional<double> delta; // explicit mollification width (default: ES/VV 0.05, VB eps^sigma)

    int grid_n = 128;
    double grid_L = 3.0;
    std::string out_dir;
    long seed = 0;

    // diagnostics controls
    int serfati_n = 0; // eval nodes per side; 0 disables the residual column
    double serfati_extent = 0.0;
    double dt_safety = 0.5;
    double dt_max = 0.0; // 0 -> effective snapshot interval
    double cfl = 0.4;

    double snapshot_dt_effective() const {
        const double want = snapshot_dt > 0.0 ? snapshot_dt : T / 100.0;
        const int intervals = std::max(1, static_cast<int>(std::lround(T / want)));
        return T / intervals;
    }

    double delta_effective() const {
        if (delta) return *delta;
        return method == MethodTag::VB ? std::pow(eps, delta_sigma) : 0.05;
    }

    double h_effective() const {
        switch (h_mode) {
            case HCoupling::manual: return h_c; // manual width rides in h_c
            case HCoupling::practical: return h_c * std::pow(eps, h_q);
            default:
                return theoretical_h(eps, h_mode, h_c0, h_c1, 1.0, T, h_c, h_q).value;
        }
    }
};

namespace harness_detail {

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys = {
        "method",     "preset",        "preset.beta", "preset.r0",   "preset.cap",
        "preset.w",   "preset.b",      "preset.amp",  "preset.radius", "preset.x0",
        "preset.skew",
        "alpha",      "T",             "snapshot_dt", "eps",         "h_mode",
        "h_c",        "h_q",           "h_C0",        "h_C1",        "delta",
        "delta_sigma", "nu",           "grid.n",      "grid.L",      "theta_tree",
        "out_dir",    "seed",          "profile",     "serfati.n",   "serfati.extent",
        "dt_safety",  "dt_max",        "cfl",         "drop_rel"};
    return keys;
}

inline std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace harness_detail

/// Key/value pairs in file order; later duplicates win (overrides append).
using ConfigEntries = std::vector<std::pair<std::string, std::string>>;

inline ConfigEntries read_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("config file not found: " + path);
    ConfigEntries entries;
    std::string line;
    int lineno = 0;
    std::vector<std::string> bad;
    while (std::getline(is, line)) {
        ++lineno;
        const std::string t = harness_detail::trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            bad.push_back("line " + std::to_string(lineno) + ": '" + t + "' (expected key = value)");
            continue;
        }
        entries.emplace_back(harness_detail::trim(t.substr(0, eq)),
                             harness_detail::trim(t.substr(eq + 1)));
    }
    if (!bad.empty()) {
        std::string msg = "malformed config lines:";
        for (const auto& b : bad) msg += "\n  " + b;
        throw ConfigError(msg);
    }
    return entries;
}

/// Builds and validates a RunConfig from entries, reporting every unknown key
/// and every invalid value in one diagnostic.
inline RunConfig make_config(const ConfigEntries& entries) {
    std::vector<std::string> problems;
    const auto& known = harness_detail::known_keys();
    for (const auto& [k, v] : entries) {
        bool ok = false;
        for (const auto& kk : known)
            if (k == kk) {
                ok = true;
                break;
            }
        if (!ok) problems.push_back("unknown key '" + k + "'");
    }

    std::map<std::string, std::string> kv;
    for (const auto& [k, v] : entries) kv[k] = v; // later entries win

    RunConfig cfg;
    auto get_double = [&](const std::string& key, double& target) {
        auto it = kv.find(key);
        if (it == kv.end()) return;
        try {
            target = parse_double(it->second);
        } catch (const std::exception&) {
            problems.push_back("key '" + key + "': cannot parse '" + it->second + "'");
        }
    };

    if (auto it = kv.find("method"); it != kv.end()) {
        if (it->second == "ES")
            cfg.method = MethodTag::ES;
        else if (it->second == "VV")
            cfg.method = MethodTag::VV;
        else if (it->second == "VB")
            cfg.method = MethodTag::VB;
        else
            problems.push_back("key 'method': expected ES, VV or VB, got '" + it->second + "'");
    } else {
        problems.push_back("missing required key 'method'");
    }

    if (auto it = kv.find("preset"); it != kv.end()) {
        try {
            cfg.preset = Preset::named(it->second);
            cfg.preset_name = it->second;
        } catch (const std::exception& ex) {
            problems.push_back(std::string("key 'preset': ") + ex.what());
        }
    }
    get_double("preset.beta", cfg.preset.beta);
    get_double("preset.r0", cfg.preset.r0);
    get_double("preset.cap", cfg.preset.cap);
    get_double("preset.w", cfg.preset.width);
    get_double("preset.b", cfg.preset.offset);
    get_double("preset.amp", cfg.preset.amplitude);
    get_double("preset.skew", cfg.preset.skew);
    get_double("preset.radius", cfg.preset.patch_radius);
    get_double("preset.x0", cfg.preset.x0);
    get_double("alpha", cfg.alpha);
    get_double("T", cfg.T);
    get_double("snapshot_dt", cfg.snapshot_dt);
    get_double("eps", cfg.eps);
    get_double("h_c", cfg.h_c);
    get_double("h_q", cfg.h_q);
    get_double("h_C0", cfg.h_c0);
    get_double("h_C1", cfg.h_c1);
    get_double("delta_sigma", cfg.delta_sigma);
    get_double("nu", cfg.nu);
    get_double("grid.L", cfg.grid_L);
    get_double("theta_tree", cfg.theta_tree);
    get_double("dt_safety", cfg.dt_safety);
    get_double("dt_max", cfg.dt_max);
    get_double("cfl", cfg.cfl);
    get_double("drop_rel", cfg.drop_rel);
    get_double("serfati.extent", cfg.serfati_extent);
    if (auto it = kv.find("delta"); it != kv.end()) {
        try {
            cfg.delta = parse_double(it->second);
        } catch (const std::exception&) {
            problems.push_back("key 'delta': cannot parse '" + it->second + "'");
        }
    }
    if (auto it = kv.find("grid.n"); it != kv.end()) {
        try {
            cfg.grid_n = static_cast<int>(parse_double(it->second));
        } catch (const std::exception&) {
            problems.push_back("key 'grid.n': cannot parse '" + it->second + "'");
        }
    }
    if (auto it = kv.find("serfati.n"); it != kv.end()) {
        try {
            cfg.serfati_n = static_cast<int>(parse_double(it->second));
        } catch (const std::exception&) {
            problems.push_back("key 'serfati.n': cannot parse '" + it->second + "'");
        }
    }
    if (auto it = kv.find("seed"); it != kv.end()) {
        try {
            cfg.seed = std::stol(it->second);
        } catch (const std::exception&) {
            problems.push_back("key 'seed': cannot parse '" + it->second + "'");
        }
    }
    if (auto it = kv.find("h_mode"); it != kv.end()) {
        const std::string& m = it->second;
        if (m == "manual")
            cfg.h_mode = HCoupling::manual;
        else if (m == "practical")
            cfg.h_mode = HCoupling::practical;
        else if (m == "theoretical_A1")
            cfg.h_mode = HCoupling::theoretical_A1;
        else if (m == "theoretical_A2")
            cfg.h_mode = HCoupling::theoretical_A2;
        else
            problems.push_back("key 'h_mode': unknown mode '" + m + "'");
    }
    if (auto it = kv.find("profile"); it != kv.end()) {
        if (it->second == "gaussian")
            cfg.profile = ProfileKind::gaussian;
        else if (it->second == "bump")
            cfg.profile = ProfileKind::bump;
        else
            problems.push_back("key 'profile': expected gaussian or bump");
    }
    if (auto it = kv.find("out_dir"); it != kv.end()) cfg.out_dir = it->second;

    // semantic validation
    if (problems.empty()) {
        if (!(cfg.T > 0.0)) problems.push_back("key 'T': must be positive");
        if (cfg.snapshot_dt < 0.0 || cfg.snapshot_dt > cfg.T)
            problems.push_back("key 'snapshot_dt': must lie in (0, T]");
        if (!(cfg.alpha > 0.0)) problems.push_back("key 'alpha': must be positive");
        if (cfg.method == MethodTag::VB && !(cfg.eps > 0.0))
            problems.push_back("missing required key 'eps' (method = VB)");
        if (cfg.method == MethodTag::VV && !(cfg.nu > 0.0))
            problems.push_back("missing required key 'nu' (method = VV)");
        if (cfg.method != MethodTag::VV && cfg.nu != 0.0)
            problems.push_back("key 'nu' is only meaningful for method = VV");
        if (cfg.grid_n < 4 || (cfg.grid_n & (cfg.grid_n - 1)) != 0)
            problems.push_back("key 'grid.n': must be a power of two >= 4");
        if (!(cfg.grid_L > 0.0)) problems.push_back("key 'grid.L': must be positive");
        if (!(cfg.theta_tree > 0.0) || !(cfg.theta_tree < 1.0))
            problems.push_back("key 'theta_tree': must lie in (0,1)");
        if (!(cfg.dt_safety > 0.0) || cfg.dt_safety > 1.0)
            problems.push_back("key 'dt_safety': must lie in (0,1]");
        if (!(cfg.cfl > 0.0) || cfg.cfl > 0.5)
            problems.push_back("key 'cfl': must lie in (0, 0.5]");
        if (!(cfg.delta_sigma > 0.0 && cfg.delta_sigma < 1.0 / 7.0))
            problems.push_back("key 'delta_sigma': must lie in (0, 1/7)");
    }
    if (!problems.empty()) {
        std::string msg = "invalid configuration:";
        for (const auto& p : problems) msg += "\n  " + p;
        throw ConfigError(msg);
    }
    return cfg;
}

/// Canonical serialization; make_config(print_config(cfg)) reproduces the
/// effective configuration.
inline ConfigEntries print_config(const RunConfig& cfg) {
    ConfigEntries out;
    out.emplace_back("method", to_string(cfg.method));
    out.emplace_back("preset", cfg.preset_name);
    out.emplace_back("preset.beta", fmt_double(cfg.preset.beta));
    out.emplace_back("preset.r0", fmt_double(cfg.preset.r0));
    out.emplace_back("preset.cap", fmt_double(cfg.preset.cap));
    out.emplace_back("preset.w", fmt_double(cfg.preset.width));
    out.emplace_back("preset.b", fmt_double(cfg.preset.offset));
    out.emplace_back("preset.amp", fmt_double(cfg.preset.amplitude));
    out.emplace_back("preset.skew", fmt_double(cfg.preset.skew));
    out.emplace_back("preset.radius", fmt_double(cfg.preset.patch_radius));
    out.emplace_back("preset.x0", fmt_double(cfg.preset.x0));
    out.emplace_back("alpha", fmt_double(cfg.alpha));
    out.emplace_back("T", fmt_double(cfg.T));
    out.emplace_back("snapshot_dt", fmt_double(cfg.snapshot_dt));
    out.emplace_back("eps", fmt_double(cfg.eps));
    out.emplace_back("h_mode", to_string(cfg.h_mode));
    out.emplace_back("h_c", fmt_double(cfg.h_c));
    out.emplace_back("h_q", fmt_double(cfg.h_q));
    out.emplace_back("h_C0", fmt_double(cfg.h_c0));
    out.emplace_back("h_C1", fmt_double(cfg.h_c1));
    if (cfg.delta) out.emplace_back("delta", fmt_double(*cfg.delta));
    out.emplace_back("delta_sigma", fmt_double(cfg.delta_sigma));
    out.emplace_back("nu", fmt_double(cfg.nu));
    out.emplace_back("grid.n", std::to_string(cfg.grid_n));
    out.emplace_back("grid.L", fmt_double(cfg.grid_L));
    out.emplace_back("theta_tree", fmt_double(cfg.theta_tree));
    out.emplace_back("out_dir", cfg.out_dir);
    out.emplace_back("seed", std::to_string(cfg.seed));
    out.emplace_back("profile", to_string(cfg.profile));
    out.emplace_back("serfati.n", std::to_string(cfg.serfati_n));
    out.emplace_back("serfati.extent", fmt_double(cfg.serfati_extent));
    out.emplace_back("dt_safety", fmt_double(cfg.dt_safety));
    out.emplace_back("dt_max", fmt_double(cfg.dt_max));
    out.emplace_back("cfl", fmt_double(cfg.cfl));
    out.emplace_back("drop_rel", fmt_double(cfg.drop_rel));
    return out;
}

inline void write_config(const ConfigEntries& entries, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw DataError("write_config: cannot open " + path);
    for (const auto& [k, v] : entries) os << k << " = " << v << "\n";
}

// ---------------------------------------------------------------------------
// run(): one experiment -> run directory with snapshots + report
// ---------------------------------------------------------------------------

struct RunResult {
    std::string dir;
    DiagnosticsReport report;
    std::vector<double> snapshot_times;
};

namespace harness_detail {

inline std::string snap_name(const char* stem, int k) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%s_%04d.txt", stem, k);
    return buf;
}

inline VectorField velocity_on_grid(const BlobEnsemble& e, const GridSpec& g,
                                    const VelocityOptions& opt) {
    std::vector<Vec2> nodes(g.size());
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) nodes[g.index(i, j)] = g.node(i, j);
    const auto uv = velocity_eval(e, nodes, opt);
    VectorField u(g, e.t);
    for (std::size_t q = 0; q < g.size(); ++q) {
        u.data[2 * q] = uv[q].x;
        u.data[2 * q + 1] = uv[q].y;
    }
    return u;
}

inline std::string fnv_hash(const std::string& s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline std::string grid_signature(const GridSpec& g) {
    return fnv_hash(fmt_double(g.origin.x) + "," + fmt_double(g.origin.y) + "," +
                    fmt_double(g.spacing.x) + "," + fmt_double(g.spacing.y) + "," +
                    std::to_string(g.nx) + "x" + std::to_string(g.ny));
}

inline RunResult run_spectral(const RunConfig& cfg, const std::filesystem::path& dir) {
    const double snap_dt = cfg.snapshot_dt_effective();
    const int nsnap = static_cast<int>(std::lround(cfg.T / snap_dt));
    const double delta = cfg.delta_effective();

    SpectralState s = init_spectral([&](Vec2 p) { return cfg.preset.eval(p); }, cfg.grid_L,
                                    cfg.grid_n, cfg.method == MethodTag::VV ? cfg.nu : 0.0,
                                    delta, true);
    Fft fft(cfg.grid_n);

    RunResult res;
    res.dir = dir.string();
    DiagnosticsReport& rep = res.report;
    for (const auto& [k, v] : print_config(cfg)) rep.metadata.emplace_back(k, v);
    rep.metadata.emplace_back("delta_effective", fmt_double(delta));
    rep.metadata.emplace_back("snapshot_dt_effective", fmt_double(snap_dt));
    rep.metadata.emplace_back("energy_mode", "parseval");
    rep.metadata.emplace_back("grid_hash", grid_signature(s.grid()));

    const double mean0 = spectral_mean_vorticity(s);
    ScalarField w0 = vorticity_field(s, fft);
    if (std::abs(mean0) > 1e-6 * lp_norm(w0, 1.0))
        rep.metadata.emplace_back("warning",
                                  "nonzero mean vorticity: kinetic energy in the plane is "
                                  "infinite (box energy reported)");

    std::vector<SerfatiSnapshot> serfati_snaps;
    const bool want_serfati = cfg.serfati_n >= 2;

    double last_dt = 0.0;
    const double dx = 2.0 * cfg.grid_L / cfg.grid_n;
    for (int k = 0; k <= nsnap; ++k) {
        const ScalarField w = k == 0 ? std::move(w0) : vorticity_field(s, fft);
        const VectorField u = spectral_velocity(s, fft);
        write_field(w, (dir / snap_name("omega", k)).string());
        write_field(u, (dir / snap_name("u", k)).string());

        ReportRow row;
        row.t = s.t;
        row.energy = kinetic_energy(s);
        row.l1 = lp_norm(w, 1.0);
        row.modular = modular(w, cfg.alpha);
        row.luxemburg = luxemburg_norm(w, cfg.alpha);
        row.mean_vort = spectral_mean_vorticity(s);
        row.max_speed = u.max_abs();
        row.dt = last_dt;
        rep.rows.push_back(row);
        res.snapshot_times.push_back(s.t);

        if (want_serfati) {
            SerfatiSnapshot sn;
            sn.t = s.t;
            sn.omega = w;
            sn.u = u;
            serfati_snaps.push_back(std::move(sn));
        }
        if (k == nsnap) break;

        const double t_next = (k + 1) * snap_dt;
        while (s.t < t_next - 1e-12) {
            const double umax = std::max(max_speed(s, fft), 1e-300);
            const double dt = std::min(cfg.cfl * dx / umax, t_next - s.t);
            step_spectral(s, dt, fft);
            last_dt = dt;
        }
        s.t = t_next; // absorb roundoff so snapshot times match across levels
    }

    if (want_serfati) {
        SerfatiConfig scfg;
        scfg.eval_n = cfg.serfati_n;
        scfg.eval_extent = cfg.serfati_extent;
        const auto resid = serfati_residual(serfati_snaps, scfg,
                                            cfg.method == MethodTag::VV ? MethodTag::VV
                                                                        : MethodTag::ES,
                                            cfg.nu);
        for (std::size_t k = 0; k < resid.size(); ++k) rep.rows[k].serfati_res = resid[k];
    }
    return res;
}

inline RunResult run_blob(const RunConfig& cfg, const std::filesystem::path& dir) {
    const double snap_dt = cfg.snapshot_dt_effective();
    const int nsnap = static_cast<int>(std::lround(cfg.T / snap_dt));
    const double delta = cfg.delta_effective();
    const double h = cfg.h_effective();

    VortexBlobParams params;
    params.eps = cfg.eps;
    params.delta = delta;
    params.h = h;
    params.mode = cfg.h_mode;
    params.practical_c = cfg.h_c;
    params.practical_q = cfg.h_q;
    params.c0 = cfg.h_c0;
    params.c1 = cfg.h_c1;
    params.sigma = cfg.delta_sigma;
    params.validate();

    const BlobProfile profile{cfg.profile};

    // Sample the preset fine enough for the lattice quadrature, mollify, tile.
    // The box clears the 1e-14 tail so the sampled data is compactly
    // supported strictly inside it.
    const double want_spacing = std::min(h / 4.0, delta / 3.0);
    const double support = cfg.preset.support_radius(1e-14) * 1.02 + 2.0 * want_spacing;
    int nfine = static_cast<int>(std::ceil(2.0 * support / want_spacing));
    if (nfine > 4096)
        throw SolverError("run: initial sampling grid exceeds the resource cap (h or delta "
                          "too small; theoretical couplings are unrunnable at desk scale)");
    GridSpec fine = GridSpec::centered_square(support, nfine);
    const ScalarField w0 = sample_on_grid([&](Vec2 p) { return cfg.preset.eval(p); }, fine);
    const ScalarField w0eps = mollify_initial(w0, delta, profile);
    BlobEnsemble e = tile_and_weigh(w0eps, h, cfg.eps, profile, Vec2{0.0, 0.0}, cfg.drop_rel);

    VelocityOptions vopt;
    vopt.theta = cfg.theta_tree;

    RunResult res;
    res.dir = dir.string();
    DiagnosticsReport& rep = res.report;
    for (const auto& [k, v] : print_config(cfg)) rep.metadata.emplace_back(k, v);
    rep.metadata.emplace_back("delta_effective", fmt_double(delta));
    rep.metadata.emplace_back("h_effective", fmt_double(h));
    rep.metadata.emplace_back("snapshot_dt_effective", fmt_double(snap_dt));
    rep.metadata.emplace_back("blob_count", std::to_string(e.size()));
    rep.metadata.emplace_back("drop_threshold", fmt_double(cfg.drop_rel));
    if (cfg.h_mode == HCoupling::theoretical_A1 || cfg.h_mode == HCoupling::theoretical_A2) {
        const auto th = theoretical_h(cfg.eps, cfg.h_mode, cfg.h_c0, cfg.h_c1, 1.0, cfg.T);
        if (th.impractical)
            rep.metadata.emplace_back("warning", "theoretical h(eps) coupling below 1e-12; "
                                                 "desk-scale runs cannot realize it");
    }

    const GridSpec diag = GridSpec::centered_square(cfg.grid_L, cfg.grid_n);
    rep.metadata.emplace_back("grid_hash", grid_signature(diag));

    const bool mean_zero =
        std::abs(e.total_circulation()) <= 1e-6 * std::max(e.abs_circulation(), 1e-300);
    rep.metadata.emplace_back("energy_mode", mean_zero ? "pairwise" : "grid");
    if (!mean_zero)
        rep.metadata.emplace_back("warning",
                                  "nonzero total circulation: kinetic energy in the plane is "
                                  "infinite; pairwise energy omitted (grid energy reported)");

    const bool want_serfati = cfg.serfati_n >= 2;
    std::vector<SerfatiSnapshot> serfati_snaps;
    bool margin_warned = false;

    const double dt_cap = cfg.dt_max > 0.0 ? cfg.dt_max : snap_dt;
    double last_dt = 0.0;
    for (int k = 0; k <= nsnap; ++k) {
        write_blobs(e, (dir / snap_name("blobs", k)).string());
        const ScalarField w = reconstruct_vorticity(e, diag);
        if (w.margin_warning && !margin_warned) {
            rep.metadata.emplace_back("warning", "diagnostic grid margin below the blob "
                                                 "footprint at some snapshot");
            margin_warned = true;
        }
        const VectorField u = velocity_on_grid(e, diag, vopt);
        write_field(w, (dir / snap_name("omega", k)).string());
        write_field(u, (dir / snap_name("u", k)).string());

        const auto u_blob = velocity_eval(e, e.pos, vopt);
        double umax = 0.0;
        for (const auto& v : u_blob) umax = std::max(umax, v.norm());

        ReportRow row;
        row.t = e.t;
        row.energy = mean_zero ? kinetic_energy_pairwise(e) : kinetic_energy_grid(u);
        row.l1 = lp_norm(w, 1.0);
        row.modular = modular(w, cfg.alpha);
        row.luxemburg = luxemburg_norm(w, cfg.alpha);
        row.mean_vort = mean_vorticity(e);
        row.max_speed = umax;
        row.dt = last_dt;
        rep.rows.push_back(row);
        res.snapshot_times.push_back(e.t);

        if (want_serfati) {
            SerfatiSnapshot sn;
            sn.t = e.t;
            sn.omega = w;
            sn.u = u;
            sn.F = error_fields(e, diag, vopt).F;
            serfati_snaps.push_back(std::move(sn));
        }
        if (k == nsnap) break;

        const double t_next = (k + 1) * snap_dt;
        while (e.t < t_next - 1e-12) {
            double dt = auto_dt(e, cfg.dt_safety, dt_cap, vopt);
            dt = std::min(dt, t_next - e.t);
            step(e, dt, vopt);
            last_dt = dt;
        }
        e.t = t_next;
    }

    if (want_serfati) {
        SerfatiConfig scfg;
        scfg.eval_n = cfg.serfati_n;
        scfg.eval_extent = cfg.serfati_extent;
        const auto resid = serfati_residual(serfati_snaps, scfg, MethodTag::VB);
        for (std::size_t k = 0; k < resid.size(); ++k) rep.rows[k].serfati_res = resid[k];
    }
    return res;
}

} // namespace harness_detail

/// Runs one experiment into cfg.out_dir: config echo, snapshots at the
/// configured cadence, and the diagnostics CSV. Deterministic given the
/// config. On solver failure the snapshots written so far stay in place.
inline RunResult run(const RunConfig& cfg) {
    if (cfg.out_dir.empty()) throw ConfigError("run: out_dir is required");
    const std::filesystem::path dir(cfg.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw ConfigError("run: cannot create out_dir '" + cfg.out_dir + "'");
    write_config(print_config(cfg), (dir / "config.cfg").string());

    RunResult res = cfg.method == MethodTag::VB ? harness_detail::run_blob(cfg, dir)
                                                : harness_detail::run_spectral(cfg, dir);
    res.report.write_csv((dir / "report.csv").string());
    return res;
}

// ---------------------------------------------------------------------------
// Refinement sweeps
// ---------------------------------------------------------------------------

struct SweepResult {
    std::vector<double> params;            // refinement parameter per level
    std::vector<std::string> level_dirs;
    std::vector<std::string> level_errors; // empty string = level succeeded
    std::vector<double> energy_drift;      // max |E(t)-E(0)|/|E(0)| per level
    std::vector<double> modular_sup_ratio; // sup_t modular / modular(0)
    std::vector<double> cauchy;            // d(level k, level k+1), C([0,T];L^2)
    std::vector<double> radii;             // structure-function radii
    std::vector<std::vector<double>> structure; // [level][radius] S2 over the run
    std::vector<double> structure_envelope;     // max over levels per radius
    std::string grid_hash;

    bool cauchy_decreasing() const {
        for (std::size_t k = 1; k < cauchy.size(); ++k)
            if (!(cauchy[k] < cauchy[k - 1])) return false;
        return !cauchy.empty();
    }
};

/// Runs the method's refinement parameter (VB: eps, VV: nu, ES: delta) over
/// the given levels, evaluates every level on the shared diagnostic grid at
/// matched snapshot times, and assembles Cauchy, drift, modular and
/// structure-function tables. A failing level is annotated, not fatal.
inline SweepResult refinement_sweep(const RunConfig& base, const std::vector<double>& levels) {
    if (levels.size() < 3)
        throw ConfigError("refinement_sweep: need at least 3 levels, got " +
                          std::to_string(levels.size()));
    if (base.out_dir.empty()) throw ConfigError("refinement_sweep: out_dir is required");
    std::filesystem::create_directories(base.out_dir);

    SweepResult sw;
    sw.params = levels;
    const GridSpec diag = GridSpec::centered_square(base.grid_L, base.grid_n);
    sw.grid_hash = harness_detail::grid_signature(diag);
    const double snap_dt = base.snapshot_dt_effective();
    const int nsnap = static_cast<int>(std::lround(base.T / snap_dt));

    std::vector<bool> ok;
    for (double p : levels) {
        RunConfig cfg = base;
        switch (base.method) {
            case MethodTag::VB: cfg.eps = p; break;
            case MethodTag::VV: cfg.nu = p; break;
            case MethodTag::ES: cfg.delta = p; break;
        }
        cfg.out_dir = (std::filesystem::path(base.out_dir) /
                       ("level_" + fmt_double(p))).string();
        sw.level_dirs.push_back(cfg.out_dir);
        try {
            const RunResult r = run(cfg);
            sw.level_errors.emplace_back();
            ok.push_back(true);
            double e0 = r.report.rows.front().energy;
            double drift = 0.0, mod_ratio = 0.0;
            const double mod0 = r.report.rows.front().modular;
            for (const auto& row : r.report.rows) {
                drift = std::max(drift, std::abs(row.energy - e0) /
                                            std::max(std::abs(e0), 1e-300));
                mod_ratio = std::max(mod_ratio, row.modular / std::max(mod0, 1e-300));
            }
            sw.energy_drift.push_back(drift);
            sw.modular_sup_ratio.push_back(mod_ratio);
        } catch (const std::exception& ex) {
            sw.level_errors.emplace_back(ex.what());
            ok.push_back(false);
            sw.energy_drift.push_back(std::numeric_limits<double>::quiet_NaN());
            sw.modular_sup_ratio.push_back(std::numeric_limits<double>::quiet_NaN());
        }
    }

    // Structure-function radii tied to the shared grid.
    const double dx = diag.spacing.x;
    sw.radii = {2.0 * dx, 4.0 * dx, 8.0 * dx, 16.0 * dx};
    const bool periodic = base.method != MethodTag::VB;

    std::vector<std::vector<VectorField>> fields(levels.size());
    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
        if (!ok[lv]) continue;
        for (int k = 0; k <= nsnap; ++k) {
            fields[lv].push_back(read_field<2>(
                (std::filesystem::path(sw.level_dirs[lv]) /
                 harness_detail::snap_name("u", k)).string()));
        }
    }

    for (std::size_t lv = 0; lv < levels.size(); ++lv) {
        if (!ok[lv]) {
            sw.structure.emplace_back(sw.radii.size(),
                                      std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        // S2 over the run: sqrt of the trapezoid-in-time integral of S2(t)^2.
        std::vector<double> acc(sw.radii.size(), 0.0);
        std::vector<double> prev;
        for (int k = 0; k <= nsnap; ++k) {
            const auto s2 = structure_function(fields[lv][k], sw.radii, periodic);
            if (k > 0)
                for (std::size_t r = 0; r < acc.size(); ++r)
                    acc[r] += 0.5 * snap_dt * (s2[r] * s2[r] + prev[r] * prev[r]);
            prev = s2;
        }
        std::vector<double> s2run(sw.radii.size());
        for (std::size_t r = 0; r < acc.size(); ++r) s2run[r] = std::sqrt(acc[r]);
        sw.structure.push_back(std::move(s2run));
    }
    sw.structure_envelope.assign(sw.radii.size(), 0.0);
    for (std::size_t lv = 0; lv < levels.size(); ++lv)
        for (std::size_t r = 0; r < sw.radii.size(); ++r)
            if (ok[lv])
                sw.structure_envelope[r] =
                    std::max(sw.structure_envelope[r], sw.structure[lv][r]);

    for (std::size_t lv = 0; lv + 1 < levels.size(); ++lv) {
        if (!ok[lv] || !ok[lv + 1]) {
            sw.cauchy.push_back(std::numeric_limits<double>::quiet_NaN());
            continue;
        }
        double worst = 0.0;
        for (int k = 0; k <= nsnap; ++k)
            worst = std::max(worst, cauchy_distance(fields[lv][k], fields[lv + 1][k]));
        sw.cauchy.push_back(worst);
    }

    // Persist the summary tables.
    {
        std::ofstream os(std::filesystem::path(base.out_dir) / "sweep_summary.csv");
        os << "# grid_hash=" << sw.grid_hash << "\n";
        os << "level,param,dir,error,energy_drift,modular_sup_ratio\n";
        for (std::size_t lv = 0; lv < levels.size(); ++lv)
            os << lv << "," << fmt_double(levels[lv]) << "," << sw.level_dirs[lv] << ",\""
               << sw.level_errors[lv] << "\"," << fmt_double(sw.energy_drift[lv]) << ","
               << fmt_double(sw.modular_sup_ratio[lv]) << "\n";
    }
    {
        std::ofstream os(std::filesystem::path(base.out_dir) / "cauchy.csv");
        os << "pair,param_a,param_b,distance,decreasing_vs_previous\n";
        for (std::size_t k = 0; k < sw.cauchy.size(); ++k) {
            const char* verdict =
                k == 0 ? "n/a" : (sw.cauchy[k] < sw.cauchy[k - 1] ? "yes" : "no");
            os << k << "," << fmt_double(levels[k]) << "," << fmt_double(levels[k + 1]) << ","
               << fmt_double(sw.cauchy[k]) << "," << verdict << "\n";
        }
    }
    {
        std::ofstream os(std::filesystem::path(base.out_dir) / "structure.csv");
        os << "radius";
        for (std::size_t lv = 0; lv < levels.size(); ++lv)
            os << ",level_" << fmt_double(levels[lv]);
        os << ",envelope\n";
        for (std::size_t r = 0; r < sw.radii.size(); ++r) {
            os << fmt_double(sw.radii[r]);
            for (std::size_t lv = 0; lv < levels.size(); ++lv)
                os << "," << fmt_double(sw.structure[lv][r]);
            os << "," << fmt_double(sw.structure_envelope[r]) << "\n";
        }
    }
    return sw;
}

// ---------------------------------------------------------------------------
// Report summaries (CLI `report` subcommand)
// ---------------------------------------------------------------------------

inline std::string summarize(const std::string& run_dir) {
    const std::filesystem::path dir(run_dir);
    const auto rep = DiagnosticsReport::read_csv((dir / "report.csv").string());
    if (rep.rows.empty()) throw DataError("summarize: report has no rows");

    auto meta = [&](const std::string& key) -> std::string {
        for (const auto& [k, v] : rep.metadata)
            if (k == key) return v;
        return "";
    };
    const std::string method = meta("method");
    std::ostringstream os;
    os << "run: " << run_dir << "\n";
    os << "method: " << method << "  preset: " << meta("preset") << "  alpha: " << meta("alpha")
       << "\n";

    const auto& first = rep.rows.front();
    const auto& last = rep.rows.back();
    double drift = 0.0, mod_min = rep.rows.front().modular, mod_max = mod_min;
    double mean_drift = 0.0;
    bool energy_monotone = true, modular_monotone = true;
    double prev_e = first.energy, prev_m = first.modular;
    for (const auto& r : rep.rows) {
        drift = std::max(drift,
                         std::abs(r.energy - first.energy) / std::max(std::abs(first.energy), 1e-300));
        mod_min = std::min(mod_min, r.modular);
        mod_max = std::max(mod_max, r.modular);
        mean_drift = std::max(mean_drift, std::abs(r.mean_vort - first.mean_vort));
        if (r.energy > prev_e + 1e-8 * std::abs(first.energy)) energy_monotone = false;
        if (r.modular > prev_m + 1e-8 * std::max(first.modular, 1e-300))
            modular_monotone = false;
        prev_e = r.energy;
        prev_m = r.modular;
    }

    os << "time span: [" << fmt_double(first.t) << ", " << fmt_double(last.t) << "]  rows: "
       << rep.rows.size() << "\n";
    os << "energy: initial " << fmt_double(first.energy) << "  final " << fmt_double(last.energy)
       << "\n";
    if (method == "ES") {
        os << "energy drift " << fmt_double(drift) << " ("
           << (drift < 1e-6 ? "PASS" : "FAIL") << " < 1e-06)\n";
        os << "modular drift " << fmt_double(mod_max / std::max(mod_min, 1e-300) - 1.0) << " ("
           << (mod_max / std::max(mod_min, 1e-300) - 1.0 < 0.01 ? "PASS" : "FAIL")
           << " < 1e-02)\n";
    } else if (method == "VV") {
        os << "energy non-increasing: " << (energy_monotone ? "PASS" : "FAIL")
           << " (tolerance 1e-08 per step)\n";
        os << "modular non-increasing: " << (modular_monotone ? "PASS" : "FAIL")
           << " (tolerance 1e-08 per step)\n";
    } else {
        os << "energy drift " << fmt_double(drift) << " (recorded; trend checked across the "
           << "eps sweep)\n";
        os << "total circulation: initial " << fmt_double(first.mean_vort) << "  max drift "
           << fmt_double(mean_drift) << " (" << (mean_drift < 1e-10 ? "PASS" : "FAIL")
           << " < 1e-10)\n";
        os << "pairwise energy: initial " << fmt_double(first.energy) << "  final "
           << fmt_double(last.energy) << " [" << meta("energy_mode") << "]\n";
        os << "modular sup ratio " << fmt_double(mod_max / std::max(first.modular, 1e-300))
           << " (" << (mod_max <= 3.0 * first.modular ? "PASS" : "FAIL") << " <= 3x initial)\n";
    }
    os << "modular range: [" << fmt_double(mod_min) << ", " << fmt_double(mod_max) << "]\n";
    os << "mean vorticity drift " << fmt_double(mean_drift) << " ("
       << (mean_drift < 1e-10 ? "PASS" : "FAIL") << " < 1e-10 absolute)\n";
    os << "final serfati residual " << fmt_double(last.serfati_res)
       << (meta("serfati.n") == "0" ? " (residual column disabled)" : "") << "\n";
    os << "final max speed " << fmt_double(last.max_speed) << "\n";
    for (const auto& [k, v] : rep.metadata)
        if (k == "warning") os << "warning: " << v << "\n";
    return os.str();
}

} // namespace euler2d
