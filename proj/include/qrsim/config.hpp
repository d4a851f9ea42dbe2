#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "qrsim/integrator.hpp"
#include "qrsim/scenario.hpp"

namespace qrsim {

/// Config failure; `path()` is a JSON pointer to the offending key ("" for
/// document-level problems).
class ConfigError : public std::runtime_error
{
public:
  ConfigError(std::string path, const std::string& message);
  const std::string& path() const { return path_; }

private:
  std::string path_;
};

/// Everything one `run` needs.
///
/// Document layout (every key optional, unknown keys rejected):
///
///   { "sim":       { "dt", "t_end", "record_stride", "renormalize_stride" },
///     "geometry":  { "crank_radius", "rocker_length", "rod_length",
///                    "pivot_distance", "slider_line_y", "initial_crank_angle" },
///     "links":     { "crank" | "slider" | "rocker" | "rod" | "slider2":
///                    { "mass", "lx", "ly", "lz" } },
///     "couplings": { "01" | "12" | "3C" | "23r" | "03" | "34" | "45" | "5C":
///                    { "K", "R" } },
///     "drive":     { "rate", "K", "R" },
///     "gravity":   [gx, gy, gz],
///     "sliding_friction": false,
///     "output":    { "csv" } }
struct RunConfig
{
  SimConfig sim;
  QrmParameters model;
  std::string csv_path = "run.csv";
};

RunConfig parse_config(std::string_view document);

/// Fully resolved form, suitable for the audit record.
nlohmann::json to_json(const RunConfig& cfg);

} // namespace qrsim
