#include "spstab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "spstab/error.hpp"

namespace spstab {

using nlohmann::json;

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  return out;
}

json header_json(const OutputHeader& header) {
  return {{"config_hash", header.config_hash}, {"seed", header.seed}};
}

json real_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double real_from(const json& j) {
  return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

json eos_json(const EosParams& p) {
  return {{"kind", to_string(p.kind)}, {"beta", p.beta}, {"C", p.C},   {"eps", p.eps},
          {"s0", real_or_null(p.s0)},  {"q", p.q},       {"quad_tol", p.quad_tol}};
}

EosParams eos_from(const json& j) {
  EosParams p;
  p.kind = parse_eos_kind(j.at("kind").get<std::string>());
  p.beta = j.at("beta").get<double>();
  p.C = j.at("C").get<double>();
  p.eps = j.at("eps").get<double>();
  p.s0 = real_from(j.at("s0"));
  p.q = j.at("q").get<double>();
  p.quad_tol = j.at("quad_tol").get<double>();
  return p;
}

}  // namespace

std::string format_real(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", value);
  return buf;
}

void write_csv(const std::string& path, const OutputHeader& header,
               const std::vector<std::pair<std::string, std::string>>& extra,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out = open_out(path);
  out << "# config_hash=" << header.config_hash << '\n';
  out << "# seed=" << header.seed << '\n';
  for (const auto& [key, value] : extra) out << "# " << key << '=' << value << '\n';
  for (std::size_t c = 0; c < columns.size(); ++c) out << (c ? "," : "") << columns[c];
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != columns.size()) throw std::logic_error("write_csv: row width mismatch");
    for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_real(row[c]);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_steady_json(const std::string& path, const SteadyState& steady,
                       const OutputHeader& header) {
  json j;
  j["header"] = header_json(header);
  j["grid"] = {{"L", steady.grid.length()}, {"N", steady.grid.size()}};
  j["eos"] = eos_json(steady.eos);
  j["Lambda"] = steady.Lambda;
  j["sigma0"] = steady.sigma0;
  j["iterations"] = steady.iterations;
  j["phi_tolerance"] = steady.phi_tolerance;
  j["certificates"] = {{"poisson_residual_inf", steady.certificates.poisson_residual_inf},
                       {"charge_residual", steady.certificates.charge_residual},
                       {"phi_value", steady.certificates.phi_value},
                       {"hc_value", steady.certificates.hc_value}};
  j["V0"] = steady.V0;
  j["K"] = steady.spectral.K;
  j["mu"] = steady.spectral.mu;
  j["lambda0"] = steady.lambda0;
  j["residuals"] = steady.spectral.residuals;
  j["potential_min"] = steady.spectral.potential_min;
  j["orthonormality_error"] = steady.spectral.orthonormality_error;
  j["tail_bound"] = steady.spectral.tail_bound;
  j["psi"] = steady.spectral.psi;
  j["phi_history"] = steady.phi_history;
  j["residual_history"] = steady.residual_history;
  std::ofstream out = open_out(path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

SteadyState read_steady_json(const std::string& path, OutputHeader* header) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read steady state '" + path + "'");
  try {
    const json j = json::parse(in);
    if (header) {
      header->config_hash = j.at("header").at("config_hash").get<std::string>();
      header->seed = j.at("header").at("seed").get<std::uint64_t>();
    }
    const Grid grid(j.at("grid").at("L").get<double>(), j.at("grid").at("N").get<int>());
    SteadyState s{grid, eos_from(j.at("eos")), j.at("Lambda").get<double>(), {}, 0.0,
                  SpectralData{grid, 0, {}, {}, {}, 0.0, 0.0, 0.0}, {}, {}, {}, {}, 0, 0.0};
    s.V0 = j.at("V0").get<RealField>();
    s.sigma0 = j.at("sigma0").get<double>();
    s.iterations = j.at("iterations").get<int>();
    s.phi_tolerance = j.at("phi_tolerance").get<double>();
    const json& c = j.at("certificates");
    s.certificates.poisson_residual_inf = c.at("poisson_residual_inf").get<double>();
    s.certificates.charge_residual = c.at("charge_residual").get<double>();
    s.certificates.phi_value = c.at("phi_value").get<double>();
    s.certificates.hc_value = c.at("hc_value").get<double>();
    s.spectral.K = j.at("K").get<int>();
    s.spectral.mu = j.at("mu").get<std::vector<double>>();
    s.spectral.psi = j.at("psi").get<std::vector<RealField>>();
    s.spectral.residuals = j.at("residuals").get<std::vector<double>>();
    s.spectral.potential_min = j.at("potential_min").get<double>();
    s.spectral.orthonormality_error = j.at("orthonormality_error").get<double>();
    s.spectral.tail_bound = j.at("tail_bound").get<double>();
    s.lambda0 = j.at("lambda0").get<std::vector<double>>();
    s.phi_history = j.at("phi_history").get<std::vector<double>>();
    s.residual_history = j.at("residual_history").get<std::vector<double>>();

    const auto K = static_cast<std::size_t>(s.spectral.K);
    const auto N = static_cast<std::size_t>(grid.size());
    bool ok = s.V0.size() == N && s.spectral.mu.size() == K && s.spectral.psi.size() == K &&
              s.lambda0.size() == K;
    for (const auto& p : s.spectral.psi) ok = ok && p.size() == N;
    if (!ok) throw ConfigError("steady state '" + path + "': inconsistent array sizes");
    return s;
  } catch (const json::exception& e) {
    throw ConfigError("steady state '" + path + "': " + e.what());
  }
}

void write_trace_csv(const std::string& path, const EvolutionTrace& trace,
                     const OutputHeader& header) {
  std::vector<std::vector<double>> rows;
  rows.reserve(trace.samples.size());
  for (const TraceSample& s : trace.samples) {
    rows.push_back({s.t, s.mass_dev, s.H, s.HC, s.dist, s.charge, s.density_dev, s.orth_dev});
  }
  write_csv(path, header,
            {{"grid.L", format_real(trace.length)},
             {"grid.N", std::to_string(trace.n_points)},
             {"eos", trace.eos},
             {"reference", trace.has_reference ? "1" : "0"},
             {"dt", format_real(trace.dt)},
             {"max_step_mass_change", format_real(trace.max_step_mass_change)},
             {"orthonormality_flag", trace.orthonormality_flag ? "1" : "0"}},
            {"t", "mass_dev", "H", "H_C", "dist", "charge", "density_dev", "orth_dev"}, rows);
}

EvolutionTrace read_trace_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read trace '" + path + "'");
  EvolutionTrace trace;
  std::string line;
  bool columns_seen = false;
  bool have_grid = false;
  auto number = [&](const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != text.size()) throw ConfigError("trace '" + path + "': bad number '" + text + "'");
    return v;
  };
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 1);
      if (key == "grid.L") {
        trace.length = number(value);
        have_grid = true;
      } else if (key == "grid.N") {
        trace.n_points = static_cast<int>(number(value));
      } else if (key == "eos") {
        trace.eos = value;
      } else if (key == "reference") {
        trace.has_reference = value == "1";
      } else if (key == "dt") {
        trace.dt = number(value);
      } else if (key == "max_step_mass_change") {
        trace.max_step_mass_change = number(value);
      } else if (key == "orthonormality_flag") {
        trace.orthonormality_flag = value == "1";
      }
      continue;
    }
    if (!columns_seen) {
      if (line != "t,mass_dev,H,H_C,dist,charge,density_dev,orth_dev") {
        throw ConfigError("trace '" + path + "': unexpected columns '" + line + "'");
      }
      columns_seen = true;
      continue;
    }
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(number(cell));
    if (v.size() != 8) throw ConfigError("trace '" + path + "': malformed row");
    trace.samples.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  if (!columns_seen || !have_grid || trace.n_points < 1 || trace.eos.empty()) {
    throw ConfigError("trace '" + path + "': missing header");
  }
  for (std::size_t i = 1; i < trace.samples.size(); ++i) {
    if (!(trace.samples[i].t > trace.samples[i - 1].t)) {
      throw ConfigError("trace '" + path + "': times are not strictly increasing");
    }
  }
  return trace;
}

void write_stability_json(const std::string& path, const StabilityReport& report,
                          const OutputHeader& header) {
  json violations = json::array();
  for (const auto& v : report.violations) violations.push_back({{"t", v.t}, {"excess", v.excess}});
  json j;
  j["header"] = header_json(header);
  j["pass"] = report.pass();
  j["bound"] = report.bound;
  j["initial_hc"] = report.initial_hc;
  j["steady_hc"] = report.steady_hc;
  j["tolerance"] = report.tolerance;
  j["hc_drift"] = report.hc_drift;
  j["margin"] = real_or_null(report.margin);
  j["samples"] = report.times.size();
  j["violations"] = violations;
  std::ofstream out = open_out(path);
  out << j.dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_margins_csv(const std::string& path, const StabilityReport& report,
                       const OutputHeader& header) {
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < report.times.size(); ++i) {
    rows.push_back({report.times[i], report.distances[i], report.bound - report.distances[i]});
  }
  write_csv(path, header, {{"bound", format_real(report.bound)}}, {"t", "dist", "margin"}, rows);
}

}  // namespace spstab
