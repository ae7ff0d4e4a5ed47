#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "distq/trace.h"

namespace distq::experiment {

inline constexpr std::string_view kTraceHeader =
    "k,sensor_id,alpha,omega,norm1_G,fro_err_to_Gstar,consensus_diameter";

/// One row per (round, sensor). The centralized learner is sensor 0 and
/// leaves consensus_diameter empty; distributed sensors are numbered 1..N.
/// Numbers use the shortest round-trip decimal form, independent of locale.
std::string format_trace_csv(const RunTrace& trace);

/// Polyline plot of norm1_G against k, one line per sensor.
std::string render_norm_plot(const RunTrace& trace, std::string_view title);

/// Polyline plot of log10 fro_err_to_Gstar against k, one line per sensor.
/// Empty when the trace has no oracle errors.
std::string render_error_plot(const RunTrace& trace, std::string_view title);

/// Writes `content` to `path`, creating parent directories.
void write_text_file(const std::filesystem::path& path, std::string_view content);

/// Writes trace.csv and plots/{norm1,error}.svg under `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const RunTrace& trace,
                         std::string_view label);

}  // namespace distq::experiment
