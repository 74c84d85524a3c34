// Command-line front end: run single experiments, refinement sweeps,
// membership verification and report summaries. Exit codes: 0 success,
// 2 configuration error, 3 solver or report failure.

#include <cstring>
#include <iostream>
#include <string>
#include <vector>

#include "euler2d/harness.hpp"

namespace {

using namespace euler2d;

void print_usage() {
    std::cout <<
        R"(euler2d - 2D incompressible Euler approximation suite

usage:
  euler2d run <config> [--key value ...]
  euler2d sweep <config> --levels <csv-list> [--key value ...]
  euler2d verify-membership <config> [--key value ...]
  euler2d report <run-dir>
  euler2d --help

subcommands:
  run                integrate one experiment into out_dir (config echo,
                     snapshots at the snapshot_dt cadence, report.csv)
  sweep              run the method's refinement parameter over the given
                     levels (VB: eps, VV: nu, ES: delta) and assemble the
                     Cauchy / energy-drift / structure tables
  verify-membership  classify the configured preset as IN/OUT of
                     L(log L)^alpha by capped radial quadrature
  report             print a human-readable summary of a run directory

config keys (flat `key = value` file; --key value overrides win):
  method        ES | VV | VB
  preset        smooth_dipole | patch_pair | loglog_pair
  preset.beta   loglog profile exponent (dimensionless)        [2.5]
  preset.r0     loglog lobe radius (length)                    [0.5]
  preset.cap    loglog sampling cap (vorticity)                [1e6]
  preset.w      dipole gaussian width (length)                 [0.35]
  preset.b      lobe center offset from the axis (length)      [0.45]
  preset.amp    lobe amplitude (vorticity)                     [1]
  preset.skew   negative-lobe factor; != 1 breaks zero mean    [1]
  preset.radius patch radius (length)                          [0.4]
  preset.x0     loglog lobe center offset (length)             [0.75]
  alpha         Orlicz exponent (dimensionless, > 0)           [1]
  T             final time                                     [1]
  snapshot_dt   snapshot cadence (time; 0 -> T/100, rounded to divide T)
  eps           blob width (length; required for VB)
  h_mode        manual | practical | theoretical_A1 | theoretical_A2
                (manual reads the lattice spacing from h_c)    [practical]
  h_c, h_q      practical coupling h = h_c * eps^h_q           [1, 1.5]
  h_C0, h_C1    constants of the theoretical couplings         [1, 1]
  delta         initial-data mollification width (length;
                default 0.05 for ES/VV, eps^delta_sigma for VB)
  delta_sigma   VB coupling exponent, in (0, 1/7)              [0.1]
  nu            viscosity (length^2/time; required for VV)
  grid.n        diagnostic/solver grid nodes per side (pow 2)  [128]
  grid.L        diagnostic/solver box half-width (length)      [3]
  theta_tree    treecode opening ratio, in (0,1)               [0.5]
  out_dir       run directory (required for run/sweep)
  seed          echoed into metadata for sampled diagnostics   [0]
  profile       gaussian | bump blob/mollifier profile         [gaussian]
  serfati.n     Serfati residual eval nodes per side (0 = off) [0]
  serfati.extent  eval box half-width (0 = auto)               [0]
  dt_safety     blob auto-dt safety factor, in (0,1]           [0.5]
  dt_max        blob step cap (0 -> snapshot interval)         [0]
  cfl           spectral CFL number, in (0, 0.5]               [0.4]
  drop_rel      blob drop threshold relative to max |Gamma|    [1e-14]
)";
}

struct Cli {
    std::string subcommand;
    std::string positional;
    ConfigEntries overrides;
    std::vector<double> levels;
};

Cli parse_argv(int argc, char** argv) {
    Cli cli;
    if (argc < 2) throw ConfigError("missing subcommand (try --help)");
    cli.subcommand = argv[1];
    int i = 2;
    if (cli.subcommand == "run" || cli.subcommand == "sweep" ||
        cli.subcommand == "verify-membership" || cli.subcommand == "report") {
        if (i >= argc) throw ConfigError(cli.subcommand + ": missing argument");
        cli.positional = argv[i++];
    }
    for (; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg.rfind("--", 0) != 0)
            throw ConfigError("unexpected argument '" + arg + "'");
        arg = arg.substr(2);
        if (i + 1 >= argc) throw ConfigError("flag --" + arg + " needs a value");
        const std::string value = argv[++i];
        if (arg == "levels") {
            std::size_t pos = 0;
            while (pos <= value.size()) {
                const auto comma = value.find(',', pos);
                const std::string tok =
                    value.substr(pos, comma == std::string::npos ? comma : comma - pos);
                if (!tok.empty()) cli.levels.push_back(parse_double(tok));
                if (comma == std::string::npos) break;
                pos = comma + 1;
            }
        } else {
            cli.overrides.emplace_back(arg, value);
        }
    }
    return cli;
}

RunConfig load_config(const Cli& cli) {
    ConfigEntries entries = read_config_file(cli.positional);
    for (const auto& kv : cli.overrides) entries.push_back(kv);
    RunConfig cfg = make_config(entries);
    std::cout << "effective configuration:\n";
    for (const auto& [k, v] : print_config(cfg)) std::cout << "  " << k << " = " << v << "\n";
    return cfg;
}

int dispatch(int argc, char** argv) {
    if (argc >= 2 && (std::strcmp(argv[1], "--help") == 0 || std::strcmp(argv[1], "-h") == 0)) {
        print_usage();
        return 0;
    }
    const Cli cli = parse_argv(argc, argv);

    if (cli.subcommand == "run") {
        const RunConfig cfg = load_config(cli);
        const RunResult res = run(cfg);
        std::cout << "run complete: " << res.dir << " (" << res.report.rows.size()
                  << " snapshots)\n";
        return 0;
    }
    if (cli.subcommand == "sweep") {
        const RunConfig cfg = load_config(cli);
        if (cli.levels.empty()) throw ConfigError("sweep: --levels is required");
        const SweepResult sw = refinement_sweep(cfg, cli.levels);
        std::cout << "sweep complete: " << cfg.out_dir << "\n";
        for (std::size_t k = 0; k < sw.params.size(); ++k) {
            std::cout << "  level " << fmt_double(sw.params[k]) << ": "
                      << (sw.level_errors[k].empty() ? "ok" : sw.level_errors[k])
                      << "  energy_drift=" << fmt_double(sw.energy_drift[k])
                      << "  modular_sup_ratio=" << fmt_double(sw.modular_sup_ratio[k]) << "\n";
        }
        for (std::size_t k = 0; k < sw.cauchy.size(); ++k)
            std::cout << "  cauchy d(" << fmt_double(sw.params[k]) << ", "
                      << fmt_double(sw.params[k + 1]) << ") = " << fmt_double(sw.cauchy[k])
                      << "\n";
        std::cout << "  cauchy trend decreasing: " << (sw.cauchy_decreasing() ? "yes" : "no")
                  << "\n";
        bool any_failed = false;
        for (const auto& e : sw.level_errors) any_failed |= !e.empty();
        return any_failed ? 3 : 0;
    }
    if (cli.subcommand == "verify-membership") {
        const RunConfig cfg = load_config(cli);
        const MembershipResult r = membership_verifier(cfg.preset, cfg.alpha);
        std::cout << "membership in L(log L)^" << fmt_double(cfg.alpha) << ": "
                  << to_string(r.verdict) << "\n";
        std::cout << "cap trace (cap, modular):\n";
        for (const auto& [cap, value] : r.trace)
            std::cout << "  " << fmt_double(cap) << "  " << fmt_double(value) << "\n";
        if (r.tail_exponent != 0.0)
            std::cout << "fitted tail exponent: " << fmt_double(r.tail_exponent)
                      << " (IN iff < -1)\n";
        return 0;
    }
    if (cli.subcommand == "report") {
        std::cout << summarize(cli.positional);
        return 0;
    }
    throw ConfigError("unknown subcommand '" + cli.subcommand + "' (try --help)");
}

} // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const euler2d::ConfigError& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
}
