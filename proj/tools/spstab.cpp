#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "spstab/config.hpp"
#include "spstab/error.hpp"
#include "spstab/evolution.hpp"
#include "spstab/io.hpp"
#include "spstab/selfcheck.hpp"
#include "spstab/stability.hpp"
#include "spstab/steady_state.hpp"

namespace fs = std::filesystem;
using namespace spstab;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitAudit = 3;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string steady_path;
  std::string trace_path;
  bool snapshots = false;
};

RunConfig resolve_config(const Flags& flags) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  apply_env_overrides(config);
  if (flags.seed) config.perturb.seed = *flags.seed;
  if (!flags.out_dir.empty()) config.output.dir = flags.out_dir;
  config.validate();
  return config;
}

fs::path output_dir(const RunConfig& config) {
  fs::path dir(config.output.dir);
  fs::create_directories(dir);
  return dir;
}

OutputHeader header_of(const RunConfig& config) { return {config.hash(), config.perturb.seed}; }

std::string input_path(const std::string& flag, const RunConfig& config, const char* name) {
  return flag.empty() ? (fs::path(config.output.dir) / name).string() : flag;
}

void check_matches(const RunConfig& config, const SteadyState& steady) {
  const Grid grid = config.make_grid();
  if (!(grid == steady.grid)) {
    throw ConfigError("steady state grid differs from the configured grid");
  }
  if (EquationOfState(config.eos_params()).describe() != EquationOfState(steady.eos).describe()) {
    throw ConfigError("steady state eos differs from the configured eos");
  }
  if (config.solver.Lambda != steady.Lambda) {
    throw ConfigError("steady state Lambda differs from solver.Lambda");
  }
}

int cmd_steady(const Flags& flags) {
  const RunConfig config = resolve_config(flags);
  const Grid grid = config.make_grid();
  const EquationOfState eos(config.eos_params());
  const SteadyState steady = solve_steady(eos, config.solver.Lambda, grid, config.solver_options());
  const fs::path dir = output_dir(config);
  const OutputHeader header = header_of(config);

  write_steady_json((dir / "steady_state.json").string(), steady, header);
  const RealField n0 = steady_density(steady);
  std::vector<std::vector<double>> v_rows, n_rows, s_rows;
  for (int j = 0; j < grid.size(); ++j) {
    v_rows.push_back({grid.x(j), steady.V0[j]});
    n_rows.push_back({grid.x(j), n0[j]});
  }
  for (int k = 0; k < steady.spectral.K; ++k) {
    s_rows.push_back({static_cast<double>(k + 1), steady.spectral.mu[k], steady.lambda0[k]});
  }
  const std::vector<std::pair<std::string, std::string>> extra = {
      {"eos", eos.describe()}, {"sigma0", format_real(steady.sigma0)}};
  write_csv((dir / "V0.csv").string(), header, extra, {"x", "V0"}, v_rows);
  write_csv((dir / "density.csv").string(), header, extra, {"x", "n0"}, n_rows);
  write_csv((dir / "spectrum.csv").string(), header, extra, {"k", "mu", "lambda"}, s_rows);

  std::printf("steady: %s Lambda=%.6g sigma0=%.12e iterations=%d\n", eos.describe().c_str(),
              config.solver.Lambda, steady.sigma0, steady.iterations);
  std::printf("  poisson_residual=%.3e charge_residual=%.3e |Phi-H_C|=%.3e\n",
              steady.certificates.poisson_residual_inf, steady.certificates.charge_residual,
              std::abs(steady.certificates.phi_value - steady.certificates.hc_value));
  return 0;
}

int cmd_evolve(const Flags& flags) {
  const RunConfig config = resolve_config(flags);
  const SteadyState steady =
      read_steady_json(input_path(flags.steady_path, config, "steady_state.json"));
  check_matches(config, steady);
  const EquationOfState eos(steady.eos);
  const fs::path dir = output_dir(config);
  const OutputHeader header = header_of(config);

  const EnsembleState initial =
      perturb(steady, config.perturb_kind(), config.perturb.eps, config.perturb.seed);
  std::vector<std::vector<double>> snapshot_rows;
  SampleCallback on_sample;
  if (flags.snapshots) {
    on_sample = [&](const EnsembleState& s, const RealField& V) {
      const RealField n = density(s, steady.grid);
      for (int j = 0; j < steady.grid.size(); ++j) {
        snapshot_rows.push_back({s.t, steady.grid.x(j), V[j], n[j]});
      }
    };
  }
  const EvolutionTrace trace =
      evolve(initial, steady.grid, eos, config.evolve_options(), &steady, on_sample);
  write_trace_csv((dir / "trace.csv").string(), trace, header);
  if (flags.snapshots) {
    write_csv((dir / "snapshots.csv").string(), header, {{"eos", eos.describe()}},
              {"t", "x", "V", "n"}, snapshot_rows);
  }

  const TraceSample& first = trace.samples.front();
  const TraceSample& last = trace.samples.back();
  std::printf("evolve: %zu samples to t=%.6g, |dH_C|=%.3e, max step mass change=%.3e%s\n",
              trace.samples.size(), last.t, std::abs(last.HC - first.HC),
              trace.max_step_mass_change,
              trace.orthonormality_flag ? ", orthonormality drift flagged" : "");
  return trace.orthonormality_flag ? kExitNumerical : 0;
}

int cmd_stability(const Flags& flags) {
  const RunConfig config = resolve_config(flags);
  const SteadyState steady =
      read_steady_json(input_path(flags.steady_path, config, "steady_state.json"));
  const EvolutionTrace trace = read_trace_csv(input_path(flags.trace_path, config, "trace.csv"));
  const EquationOfState eos(steady.eos);
  StabilityReport report;
  try {
    report = stability_audit(trace, steady, eos);
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  const fs::path dir = output_dir(config);
  const OutputHeader header = header_of(config);
  write_stability_json((dir / "stability_report.json").string(), report, header);
  write_margins_csv((dir / "margins.csv").string(), report, header);
  std::printf("stability: B=%.6e margin=%.6e violations=%zu -> %s\n", report.bound, report.margin,
              report.violations.size(), report.pass() ? "pass" : "FAIL");
  return report.pass() ? 0 : kExitAudit;
}

int cmd_eos_table(const Flags& flags) {
  const RunConfig config = resolve_config(flags);
  const EquationOfState eos(config.eos_params());
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= 600; ++i) {
    const double s = -10.0 + 0.05 * i;
    const double lambda = eos.f(s);
    rows.push_back({s, lambda, eos.F(s), eos.F_star(-lambda)});
  }
  const fs::path dir = output_dir(config);
  write_csv((dir / "eos.csv").string(), header_of(config), {{"eos", eos.describe()}},
            {"s", "f", "F", "F_star_of_minus_f"}, rows);
  std::printf("eos-table: %s, %zu rows\n", eos.describe().c_str(), rows.size());
  return 0;
}

int cmd_selfcheck(const Flags& flags) {
  const RunConfig config = resolve_config(flags);
  bool ok = true;
  for (const CheckResult& r : run_selfcheck(config)) {
    std::printf("[%s] %s: %s\n", r.pass ? "pass" : "FAIL", r.name.c_str(), r.detail.c_str());
    ok = ok && r.pass;
  }
  return ok ? 0 : kExitAudit;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Steady states and stability audits for the Schrodinger-Poisson system"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("-c,--config", flags.config_path, "key = value config file")
        ->check(CLI::ExistingFile);
    sub->add_option("--seed", flags.seed, "overrides perturb.seed");
    sub->add_option("-o,--out", flags.out_dir, "overrides output.dir");
  };

  auto* steady = app.add_subcommand("steady", "solve for the steady state");
  auto* evolve_cmd = app.add_subcommand("evolve", "propagate a perturbed steady ensemble");
  auto* stability = app.add_subcommand("stability", "audit a trace against its steady state");
  auto* eos_table = app.add_subcommand("eos-table", "tabulate f, F and F*");
  auto* selfcheck = app.add_subcommand("selfcheck", "run the built-in invariant suites");
  for (auto* sub : {steady, evolve_cmd, stability, eos_table, selfcheck}) add_common(sub);
  for (auto* sub : {evolve_cmd, stability}) {
    sub->add_option("--steady", flags.steady_path, "steady_state.json (default: output.dir)");
  }
  stability->add_option("--trace", flags.trace_path, "trace.csv (default: output.dir)");
  evolve_cmd->add_flag("--snapshots", flags.snapshots, "also write V and n at every sample");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*steady) return cmd_steady(flags);
    if (*evolve_cmd) return cmd_evolve(flags);
    if (*stability) return cmd_stability(flags);
    if (*eos_table) return cmd_eos_table(flags);
    if (*selfcheck) return cmd_selfcheck(flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}
