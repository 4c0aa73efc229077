#pragma once

#include <string>
#include <vector>

#include "csiblt/harness.hpp"

namespace csiblt {

// Renders mean scalars_sent versus d, one polyline per protocol, as a
// self-contained SVG. Output is byte-deterministic for a given input.
std::string render_cost_plot(const std::vector<TrialRecord>& records);

void plot_csv_to_svg(const std::string& csv_path, const std::string& svg_path);

}  // namespace csiblt
