#pragma once

#include <string>
#include <vector>

#include "rbandit/harness.hpp"

namespace rbandit {

/// Shortest round-trip decimal representation (up to 17 significant digits).
std::string format_double(double x);

/// Writes regret.csv, stats.txt, regret.svg and (when sampling was used)
/// region_points.csv into `dir`. Files are written atomically: a temporary
/// sibling is renamed into place. Throws IoError.
void emit_outputs(const ExperimentResult& result, const ExperimentConfig& config,
                  const std::string& dir);

std::string regret_csv_text(const RegretTrace& trace);
std::string stats_txt_text(const ExperimentResult& result, const ExperimentConfig& config);
std::string regret_svg_text(const RegretTrace& trace);

/// Parses a regret.csv payload back into per-trial curves (exact round-trip).
RegretTrace parse_regret_csv(const std::string& text);

}  // namespace rbandit
