#pragma once

#include <span>
#include <string>
#include <string_view>

#include "augpipe/evalharness.hpp"

namespace augpipe {

/// Integer shown in the AVG column: round-half-up of the exact mean
/// (floor(mean + 0.5)), the rule the bundled reference table follows.
int display_average(double mean);

/// Renders one row per report with the ten exposure columns plus AVG.
/// `format` is "markdown" or "csv"; anything else is an error. CSV columns:
/// task,method,e10,e20,e40,e60,e80,e100,e120,e140,e160,e170,avg.
std::string aggregate_and_render(std::span<const SweepReport> reports, std::string_view format);

/// JSON persistence for sweep results (used by the sweep/report verbs).
std::string sweep_report_to_json(const SweepReport& report);
SweepReport sweep_report_from_json(std::string_view text, std::string_view origin = "<report>");

}  // namespace augpipe
