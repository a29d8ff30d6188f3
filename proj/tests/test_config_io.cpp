#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "spstab/config.hpp"
#include "spstab/error.hpp"
#include "spstab/io.hpp"

using namespace spstab;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "spstab_test_config_io";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const SteadyState& small_steady() {
  static const SteadyState s = [] {
    SolverOptions o;
    o.K = 12;
    return solve_steady(EquationOfState::boltzmann(1.0), 1.0, Grid(8.0, 48), o);
  }();
  return s;
}

}  // namespace

TEST_CASE("config: defaults and parsed values") {
  const RunConfig d = parse_config("");
  CHECK(d.grid.L == 8.0);
  CHECK(d.grid.N == 256);
  CHECK(d.eos.kind == "boltzmann");
  CHECK(d.solver.Lambda == 1.0);
  CHECK(d.perturb.kind == "none");
  CHECK_NOTHROW(d.validate());

  const RunConfig c = parse_config(
      "# comment line\n"
      "grid.N = 64   # trailing comment\n"
      "eos.kind = fermi_dirac\n"
      "\n"
      "  solver.Lambda=2.5\n"
      "perturb.seed = 18446744073709551615\n"
      "output.dir = some/where\n");
  CHECK(c.grid.N == 64);
  CHECK(c.eos.kind == "fermi_dirac");
  CHECK(c.solver.Lambda == 2.5);
  CHECK(c.perturb.seed == 18446744073709551615ull);
  CHECK(c.output.dir == "some/where");
  CHECK(c.eos_params().kind == EosKind::fermi_dirac);
  CHECK(c.make_grid().size() == 64);
}

TEST_CASE("config: malformed input is rejected") {
  CHECK_THROWS_AS(parse_config("grid.M = 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.N = 4\ngrid.N = 5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.N =\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.N 4\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.N = 4.5\n"), ConfigError);
  CHECK_THROWS_AS(parse_config("grid.L = eight\n"), ConfigError);
  CHECK_THROWS_AS(load_config("/nonexistent/spstab.cfg"), ConfigError);
}

TEST_CASE("config: validation catches out-of-range values") {
  const char* bad[] = {
      "grid.N = 1",          "grid.L = -1",           "solver.Lambda = 0",
      "solver.K = 0",        "solver.method = newton", "eos.kind = bose",
      "eos.beta = 0",        "evolution.dt = 0",      "evolution.sample_every = 0",
      "perturb.kind = spin", "perturb.eps = -0.1",    "solver.damping = 1.5",
  };
  for (const char* line : bad) {
    INFO(line);
    const RunConfig c = parse_config(line);
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_CASE("config: environment overrides") {
  CHECK(env_name("grid.N") == "SPSTAB_GRID_N");
  CHECK(env_name("solver.tol_V") == "SPSTAB_SOLVER_TOL_V");

  RunConfig c = parse_config("grid.N = 64\n");
  ::setenv("SPSTAB_GRID_N", "96", 1);
  ::setenv("SPSTAB_EOS_KIND", "power_cutoff", 1);
  apply_env_overrides(c);
  ::unsetenv("SPSTAB_GRID_N");
  ::unsetenv("SPSTAB_EOS_KIND");
  CHECK(c.grid.N == 96);
  CHECK(c.eos.kind == "power_cutoff");

  ::setenv("SPSTAB_GRID_N", "many", 1);
  CHECK_THROWS_AS(apply_env_overrides(c), ConfigError);
  ::unsetenv("SPSTAB_GRID_N");
}

TEST_CASE("config: hash depends on physics keys only") {
  const RunConfig a = parse_config("grid.N = 64\n");
  const RunConfig b = parse_config("grid.N=64\noutput.dir = elsewhere\n");
  CHECK(a.hash() == b.hash());
  CHECK(a.hash().size() == 16);
  CHECK(a.canonical() == b.canonical());

  const RunConfig c = parse_config("grid.N = 65\n");
  CHECK(a.hash() != c.hash());

  // Round trip through the canonical listing reproduces the hash.
  const RunConfig d = parse_config(a.canonical());
  CHECK(d.hash() == a.hash());
}

TEST_CASE("io: format_real round-trips doubles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = std::ldexp(u(rng), static_cast<int>(u(rng)));
    CHECK(std::stod(format_real(v)) == v);
  }
  CHECK(format_real(1.0) == "1.0000000000000000e+00");
}

TEST_CASE("io: csv carries the provenance header") {
  const auto path = scratch_dir() / "table.csv";
  write_csv(path.string(), {"0123456789abcdef", 7}, {{"note", "x"}}, {"a", "b"},
            {{1.0, 2.0}, {3.0, 4.0}});
  const std::string text = slurp(path);
  CHECK(text.rfind("# config_hash=0123456789abcdef\n# seed=7\n# note=x\na,b\n", 0) == 0);
  CHECK_THROWS(write_csv(path.string(), {}, {}, {"a"}, {{1.0, 2.0}}));
}

TEST_CASE("io: steady state json round trip") {
  const SteadyState& s = small_steady();
  const auto path = scratch_dir() / "steady.json";
  write_steady_json(path.string(), s, {"feedfacefeedface", 3});
  OutputHeader header;
  const SteadyState r = read_steady_json(path.string(), &header);
  CHECK(header.config_hash == "feedfacefeedface");
  CHECK(header.seed == 3);
  CHECK(r.grid.size() == s.grid.size());
  CHECK(r.grid.length() == s.grid.length());
  CHECK(r.eos.kind == s.eos.kind);
  CHECK(std::isinf(r.eos.s0));
  CHECK(r.Lambda == s.Lambda);
  CHECK(r.sigma0 == s.sigma0);
  CHECK(r.V0 == s.V0);
  CHECK(r.lambda0 == s.lambda0);
  CHECK(r.spectral.mu == s.spectral.mu);
  CHECK(r.spectral.psi == s.spectral.psi);
  CHECK(r.phi_history == s.phi_history);
  CHECK(r.phi_tolerance == s.phi_tolerance);
  CHECK(r.certificates.hc_value == s.certificates.hc_value);

  // Writing the reread state reproduces the file byte for byte.
  const auto again = scratch_dir() / "steady_again.json";
  write_steady_json(again.string(), r, header);
  CHECK(slurp(path) == slurp(again));

  const auto broken = scratch_dir() / "broken.json";
  std::ofstream(broken) << "{\"grid\": 3}";
  CHECK_THROWS_AS(read_steady_json(broken.string()), ConfigError);
  CHECK_THROWS_AS(read_steady_json((scratch_dir() / "missing.json").string()), ConfigError);
}

TEST_CASE("io: trace csv round trip") {
  const SteadyState& s = small_steady();
  const EquationOfState eos(s.eos);
  EvolveOptions o;
  o.dt = 0.01;
  o.T = 0.2;
  o.sample_every = 5;
  const EvolutionTrace t = evolve(perturb(s, PerturbKind::phase, 0.05), s.grid, eos, o, &s);
  const auto path = scratch_dir() / "trace.csv";
  write_trace_csv(path.string(), t, {"00000000000000aa", 0});
  const EvolutionTrace r = read_trace_csv(path.string());
  CHECK(r.length == t.length);
  CHECK(r.n_points == t.n_points);
  CHECK(r.eos == t.eos);
  CHECK(r.has_reference == t.has_reference);
  CHECK(r.dt == t.dt);
  CHECK(r.max_step_mass_change == t.max_step_mass_change);
  CHECK(r.orthonormality_flag == t.orthonormality_flag);
  REQUIRE(r.samples.size() == t.samples.size());
  for (std::size_t i = 0; i < t.samples.size(); ++i) {
    CHECK(r.samples[i].t == t.samples[i].t);
    CHECK(r.samples[i].dist == t.samples[i].dist);
    CHECK(r.samples[i].HC == t.samples[i].HC);
    CHECK(r.samples[i].orth_dev == t.samples[i].orth_dev);
  }

  // A trace whose times go backwards is rejected.
  std::string text = slurp(path);
  const auto last_line = text.rfind('\n', text.size() - 2);
  text += text.substr(last_line + 1);
  const auto bad = scratch_dir() / "trace_bad.csv";
  std::ofstream(bad) << text;
  CHECK_THROWS_AS(read_trace_csv(bad.string()), ConfigError);
}
