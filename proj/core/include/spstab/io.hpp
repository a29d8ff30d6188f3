#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "spstab/evolution.hpp"
#include "spstab/stability.hpp"
#include "spstab/steady_state.hpp"

namespace spstab {

/// Provenance stamped into every output file.
struct OutputHeader {
  std::string config_hash;
  std::uint64_t seed = 0;
};

/// 17 significant digits in scientific notation.
std::string format_real(double value);

/// Writes `# key=value` header lines, one column-name line and the rows.
/// Throws std::runtime_error when the file cannot be written.
void write_csv(const std::string& path, const OutputHeader& header,
               const std::vector<std::pair<std::string, std::string>>& extra,
               const std::vector<std::string>& columns,
               const std::vector<std::vector<double>>& rows);

void write_steady_json(const std::string& path, const SteadyState& steady,
                       const OutputHeader& header);
SteadyState read_steady_json(const std::string& path, OutputHeader* header = nullptr);

void write_trace_csv(const std::string& path, const EvolutionTrace& trace,
                     const OutputHeader& header);
EvolutionTrace read_trace_csv(const std::string& path);

void write_stability_json(const std::string& path, const StabilityReport& report,
                          const OutputHeader& header);
void write_margins_csv(const std::string& path, const StabilityReport& report,
                       const OutputHeader& header);

}  // namespace spstab
