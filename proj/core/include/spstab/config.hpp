#pragma once

#include <cstdint>
#include <map>
#include <string>

#include "spstab/casimir.hpp"
#include "spstab/evolution.hpp"
#include "spstab/steady_state.hpp"

namespace spstab {

/// Run configuration, read from `key = value` lines.
///
/// Keys are dotted (`grid.N`, `eos.kind`, ...); `#` starts a comment. Unknown
/// keys, duplicate keys and malformed values raise ConfigError. Each key can
/// be overridden by an environment variable named SPSTAB_ followed by the key
/// in upper case with dots replaced by underscores (SPSTAB_GRID_N).
struct RunConfig {
  struct {
    double L = 8.0;
    int N = 256;
  } grid;
  struct {
    std::string kind = "boltzmann";
    double beta = 1.0;
    double C = 1.0;
    double eps = 1.0;
    double s0 = 2.0;
    double q = 1.0;
    double quad_tol = 1e-10;
  } eos;
  struct {
    double Lambda = 1.0;
    int K = 48;
    double tol_V = 1e-8;
    double tol_lambda = 1e-10;
    std::string method = "scf";
    int max_iter = 500;
    double damping = 0.5;
  } solver;
  struct {
    double dt = 1e-3;
    double T = 10.0;
    int sample_every = 100;
    int midpoint_sweeps = 2;
  } evolution;
  struct {
    std::string kind = "none";
    double eps = 0.0;
    std::uint64_t seed = 0;
  } perturb;
  struct {
    std::string dir = ".";
  } output;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  Grid make_grid() const;
  EosParams eos_params() const;
  SolverOptions solver_options() const;
  EvolveOptions evolve_options() const;
  PerturbKind perturb_kind() const;

  /// Canonical `key = value` listing of every key except output.dir, in a
  /// fixed order.
  std::string canonical() const;
  /// FNV-1a hash of canonical(), as 16 hex digits.
  std::string hash() const;
};

inline constexpr const char* kEnvPrefix = "SPSTAB_";

/// Parses config text; keys absent from the text keep their defaults.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
/// Applies SPSTAB_* environment overrides.
void apply_env_overrides(RunConfig& config);
/// Sets one key; throws ConfigError for unknown keys or bad values.
void set_config_value(RunConfig& config, const std::string& key, const std::string& value);

std::string env_name(const std::string& key);

}  // namespace spstab
