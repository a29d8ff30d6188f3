#include "spstab/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <vector>

#include "spstab/error.hpp"

namespace spstab {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  double out = 0.0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    if (value == "inf" || value == "+inf") return std::numeric_limits<double>::infinity();
    throw ConfigError("config key '" + key + "': '" + value + "' is not a number");
  }
  return out;
}

template <class Int>
Int to_int(const std::string& key, const std::string& value) {
  Int out = 0;
  const char* first = value.data();
  const char* last = first + value.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not an integer");
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

struct Entry {
  const char* key;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define SPSTAB_REAL(name, member)                                                  \
  Entry{name, [](RunConfig& c, const std::string& v) { c.member = to_double(name, v); }, \
        [](const RunConfig& c) { return fmt(c.member); }}
#define SPSTAB_INT(name, member)                                                           \
  Entry{name,                                                                              \
        [](RunConfig& c, const std::string& v) { c.member = to_int<decltype(c.member)>(name, v); }, \
        [](const RunConfig& c) { return std::to_string(c.member); }}
#define SPSTAB_TEXT(name, member)                                            \
  Entry{name, [](RunConfig& c, const std::string& v) { c.member = v; }, \
        [](const RunConfig& c) { return c.member; }}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      SPSTAB_REAL("grid.L", grid.L),
      SPSTAB_INT("grid.N", grid.N),
      SPSTAB_TEXT("eos.kind", eos.kind),
      SPSTAB_REAL("eos.beta", eos.beta),
      SPSTAB_REAL("eos.C", eos.C),
      SPSTAB_REAL("eos.eps", eos.eps),
      SPSTAB_REAL("eos.s0", eos.s0),
      SPSTAB_REAL("eos.q", eos.q),
      SPSTAB_REAL("eos.quad_tol", eos.quad_tol),
      SPSTAB_REAL("solver.Lambda", solver.Lambda),
      SPSTAB_INT("solver.K", solver.K),
      SPSTAB_REAL("solver.tol_V", solver.tol_V),
      SPSTAB_REAL("solver.tol_lambda", solver.tol_lambda),
      SPSTAB_TEXT("solver.method", solver.method),
      SPSTAB_INT("solver.max_iter", solver.max_iter),
      SPSTAB_REAL("solver.damping", solver.damping),
      SPSTAB_REAL("evolution.dt", evolution.dt),
      SPSTAB_REAL("evolution.T", evolution.T),
      SPSTAB_INT("evolution.sample_every", evolution.sample_every),
      SPSTAB_INT("evolution.midpoint_sweeps", evolution.midpoint_sweeps),
      SPSTAB_TEXT("perturb.kind", perturb.kind),
      SPSTAB_REAL("perturb.eps", perturb.eps),
      SPSTAB_INT("perturb.seed", perturb.seed),
      SPSTAB_TEXT("output.dir", output.dir),
  };
  return table;
}

#undef SPSTAB_REAL
#undef SPSTAB_INT
#undef SPSTAB_TEXT

const Entry& find_entry(const std::string& key) {
  for (const Entry& e : entries()) {
    if (key == e.key) return e;
  }
  throw ConfigError("unknown config key '" + key + "'");
}

void require(bool ok, const std::string& message) {
  if (!ok) throw ConfigError(message);
}

}  // namespace

void set_config_value(RunConfig& config, const std::string& key, const std::string& value) {
  find_entry(key).set(config, trim(value));
}

std::string env_name(const std::string& key) {
  std::string out = kEnvPrefix;
  for (char c : key) {
    out += c == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
  }
  return out;
}

RunConfig parse_config(const std::string& text) {
  RunConfig config;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    }
    if (value.empty()) {
      throw ConfigError("config line " + std::to_string(line_no) + ": empty value for '" + key + "'");
    }
    set_config_value(config, key, value);
  }
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str());
}

void apply_env_overrides(RunConfig& config) {
  for (const Entry& e : entries()) {
    if (const char* v = std::getenv(env_name(e.key).c_str())) e.set(config, trim(v));
  }
}

void RunConfig::validate() const {
  require(std::isfinite(grid.L) && grid.L > 0.0, "grid.L must be positive");
  require(grid.N >= 3, "grid.N must be at least 3");
  const EosKind kind = [&] {
    try {
      return parse_eos_kind(eos.kind);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }();
  require(eos.beta > 0.0 && std::isfinite(eos.beta), "eos.beta must be positive");
  require(eos.C > 0.0 && std::isfinite(eos.C), "eos.C must be positive");
  require(eos.eps > 0.0 && std::isfinite(eos.eps), "eos.eps must be positive");
  require(eos.quad_tol > 0.0 && eos.quad_tol < 1e-2, "eos.quad_tol must lie in (0, 1e-2)");
  if (kind == EosKind::power_cutoff) {
    require(std::isfinite(eos.s0) && eos.s0 > 0.0, "eos.s0 must be positive and finite");
    require(eos.q >= 1.0 && std::isfinite(eos.q), "eos.q must be >= 1");
  }
  require(solver.Lambda > 0.0 && std::isfinite(solver.Lambda), "solver.Lambda must be positive");
  require(solver.K >= 1 && solver.K <= grid.N, "solver.K must lie in [1, grid.N]");
  require(solver.tol_V > 0.0, "solver.tol_V must be positive");
  require(solver.tol_lambda > 0.0, "solver.tol_lambda must be positive");
  require(solver.method == "scf" || solver.method == "ascent",
          "solver.method must be 'scf' or 'ascent'");
  require(solver.max_iter >= 1, "solver.max_iter must be >= 1");
  require(solver.damping > 0.0 && solver.damping <= 1.0, "solver.damping must lie in (0, 1]");
  require(evolution.dt > 0.0 && std::isfinite(evolution.dt), "evolution.dt must be positive");
  require(evolution.T >= 0.0 && std::isfinite(evolution.T), "evolution.T must be >= 0");
  require(evolution.sample_every >= 1, "evolution.sample_every must be >= 1");
  require(evolution.midpoint_sweeps >= 0, "evolution.midpoint_sweeps must be >= 0");
  require(perturb.kind == "none" || perturb.kind == "phase" || perturb.kind == "occupation" ||
              perturb.kind == "mix",
          "perturb.kind must be one of none, phase, occupation, mix");
  require(perturb.eps >= 0.0 && std::isfinite(perturb.eps), "perturb.eps must be >= 0");
  require(!output.dir.empty(), "output.dir must not be empty");
}

Grid RunConfig::make_grid() const { return Grid(grid.L, grid.N); }

EosParams RunConfig::eos_params() const {
  EosParams p;
  p.kind = parse_eos_kind(eos.kind);
  p.beta = eos.beta;
  p.C = eos.C;
  p.eps = eos.eps;
  p.q = eos.q;
  p.quad_tol = eos.quad_tol;
  p.s0 = p.kind == EosKind::power_cutoff ? eos.s0 : std::numeric_limits<double>::infinity();
  return p;
}

SolverOptions RunConfig::solver_options() const {
  SolverOptions o;
  o.K = solver.K;
  o.tol_V = solver.tol_V;
  o.tol_lambda = solver.tol_lambda;
  o.max_iter = solver.max_iter;
  o.damping = solver.damping;
  o.method = solver.method == "ascent" ? SolverMethod::ascent : SolverMethod::scf;
  return o;
}

EvolveOptions RunConfig::evolve_options() const {
  EvolveOptions o;
  o.dt = evolution.dt;
  o.T = evolution.T;
  o.sample_every = evolution.sample_every;
  o.step.midpoint_sweeps = evolution.midpoint_sweeps;
  return o;
}

PerturbKind RunConfig::perturb_kind() const { return parse_perturb_kind(perturb.kind); }

std::string RunConfig::canonical() const {
  std::string out;
  for (const Entry& e : entries()) {
    if (std::string(e.key) == "output.dir") continue;
    out += e.key;
    out += " = ";
    out += e.get(*this);
    out += '\n';
  }
  return out;
}

std::string RunConfig::hash() const {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace spstab
