#pragma once

// The operations behind each command-line subcommand, callable from tests.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qrsim/config.hpp"

namespace qrsim {

struct RunSummary
{
  std::int64_t steps = 0;
  std::size_t rows = 0;
  double wall_seconds = 0.0;
  double final_crank_angle = 0.0; // unwrapped, rad
};

/// Simulates the configured mechanism and writes the CSV plus its
/// `.meta.json` sidecar (units, sign conventions, resolved config).
RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& csv);

/// Stroke report for a CSV written by `run_simulation` or
/// `write_oracle_csv`. Throws std::runtime_error if the sidecar is missing.
/// Keys: forward_duration_s, return_duration_s, time_ratio,
/// theoretical_time_ratio, stroke_length_m, reversal_times_s.
nlohmann::json analyze_csv(const std::filesystem::path& csv, double cutoff);

std::string report_summary(const nlohmann::json& report);

/// Rigid-link sweep: `samples_per_rev` crank angles per revolution starting
/// at the initial crank angle, with t = (theta - theta0) / rate.
void write_oracle_csv(const QrmGeometry& geom, double rate, int samples_per_rev, int revolutions,
                      const std::filesystem::path& csv);

/// Renders the named channels against `x_channel` to an SVG file. Units
/// come from the sidecar when present.
void plot_csv(const std::filesystem::path& csv, const std::vector<std::string>& channels,
              const std::string& x_channel, const std::filesystem::path& svg);

} // namespace qrsim
