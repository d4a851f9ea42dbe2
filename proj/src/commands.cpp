#include "qrsim/commands.hpp"

#include <chrono>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qrsim/csv_table.hpp"
#include "qrsim/svg_plot.hpp"

namespace qrsim {

using nlohmann::json;

namespace {

constexpr const char* kSignConvention =
    "Reaction channels FO1, FA2, FO3 and FC5 are the force exerted on the named link by its "
    "coupling, in world axes. Tc is the drive torque on the crank about +z. Orientation "
    "matrices map body axes to world axes.";

json columns_json(const std::vector<ColumnInfo>& cols)
{
  json arr = json::array();
  for (const auto& c : cols) {
    arr.push_back({{"name", c.name}, {"unit", c.unit}, {"description", c.description}});
  }
  return arr;
}

const std::vector<ColumnInfo>& oracle_columns()
{
  static const std::vector<ColumnInfo> cols = {
      {"t", "s", "crank angle advance divided by the drive rate"},
      {"theta", "rad", "crank angle"},
      {"psi", "rad", "rocker direction from O3"},
      {"tip_x", "m", "rocker tip, world x"},
      {"tip_y", "m", "rocker tip, world y"},
      {"tip_z", "m", "rocker tip, world z"},
      {"slider_x", "m", "output slider position"},
  };
  return cols;
}

json read_meta(const std::filesystem::path& csv)
{
  const auto meta = meta_path_for(csv);
  if (!std::filesystem::exists(meta)) {
    throw std::runtime_error("missing metadata sidecar " + meta.string() +
                             "; analyze only accepts CSVs written by run or oracle");
  }
  try {
    return json::parse(read_file(meta));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("malformed metadata sidecar " + meta.string() + ": " + e.what());
  }
}

} // namespace

RunSummary run_simulation(const RunConfig& cfg, const std::filesystem::path& csv)
{
  const QuickReturnModel model = build_quick_return(cfg.model);

  const auto start = std::chrono::steady_clock::now();
  const TimeSeries series = simulate(model.mechanism, model.initial, cfg.sim);
  const auto stop = std::chrono::steady_clock::now();

  RunConfig resolved = cfg;
  resolved.csv_path = csv.string();
  const json meta = {
      {"kind", "run"},
      {"slider_channel", "rC5x"},
      {"sign_convention", kSignConvention},
      {"columns", columns_json(probe_columns())},
      {"config", to_json(resolved)},
  };
  write_file_atomic(csv, format_probe_csv(series));
  write_file_atomic(meta_path_for(csv), meta.dump(2) + "\n");

  RunSummary summary;
  summary.steps = cfg.sim.step_count();
  summary.rows = series.rows.size();
  summary.wall_seconds = std::chrono::duration<double>(stop - start).count();
  summary.final_crank_angle = series.rows.empty() ? 0.0 : series.rows.back().crank_angle_unwrapped;
  return summary;
}

json analyze_csv(const std::filesystem::path& csv, double cutoff)
{
  const json meta = read_meta(csv);
  const CsvTable table = read_csv(csv);

  const std::string channel = meta.value("slider_channel", "rC5x");
  const StrokeReport rep = stroke_analysis(table.column("t"), table.column(channel), cutoff);

  const json& g = meta.at("config").at("geometry");
  const double ratio = theoretical_time_ratio(g.at("crank_radius").get<double>(),
                                              g.at("pivot_distance").get<double>());
  return json{
      {"forward_duration_s", rep.forward_duration},
      {"return_duration_s", rep.return_duration},
      {"time_ratio", rep.time_ratio},
      {"theoretical_time_ratio", ratio},
      {"stroke_length_m", rep.stroke_length},
      {"reversal_times_s", rep.reversal_times},
  };
}

std::string report_summary(const json& report)
{
  std::ostringstream os;
  os.precision(6);
  os << "forward stroke   " << report.at("forward_duration_s").get<double>() << " s\n"
     << "return stroke    " << report.at("return_duration_s").get<double>() << " s\n"
     << "time ratio       " << report.at("time_ratio").get<double>() << " (theory "
     << report.at("theoretical_time_ratio").get<double>() << ")\n"
     << "stroke length    " << report.at("stroke_length_m").get<double>() << " m\n"
     << "reversals        " << report.at("reversal_times_s").size() << "\n";
  return os.str();
}

void write_oracle_csv(const QrmGeometry& geom, double rate, int samples_per_rev, int revolutions,
                      const std::filesystem::path& csv)
{
  if (samples_per_rev < 2) {
    throw std::invalid_argument("oracle: need at least 2 samples per revolution");
  }
  if (revolutions < 1) {
    throw std::invalid_argument("oracle: need at least 1 revolution");
  }
  if (!(std::abs(rate) > 0.0) || !std::isfinite(rate)) {
    throw std::invalid_argument("oracle: drive rate must be nonzero");
  }
  geom.validate();

  std::string out;
  const auto& cols = oracle_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += (i ? "," : "") + cols[i].name;
  }
  out += '\n';
  const long long total = static_cast<long long>(samples_per_rev) * revolutions;
  for (long long k = 0; k < total; ++k) {
    const double advance = 2.0 * std::numbers::pi * static_cast<double>(k) / samples_per_rev;
    const double theta = geom.initial_crank_angle + advance;
    const KinematicPose pose = kinematic_oracle(theta, geom);
    const double row[] = {advance / rate, theta, pose.psi, pose.tip.x(), pose.tip.y(),
                          pose.tip.z(), pose.slider_x};
    for (std::size_t i = 0; i < std::size(row); ++i) {
      out += (i ? "," : "") + format_number(row[i]);
    }
    out += '\n';
  }

  RunConfig resolved;
  resolved.model.geometry = geom;
  resolved.model.drive.rate = rate;
  const json meta = {
      {"kind", "oracle"},
      {"slider_channel", "slider_x"},
      {"columns", columns_json(cols)},
      {"config", {{"geometry", to_json(resolved).at("geometry")}, {"drive", {{"rate", rate}}}}},
  };
  write_file_atomic(csv, out);
  write_file_atomic(meta_path_for(csv), meta.dump(2) + "\n");
}

void plot_csv(const std::filesystem::path& csv, const std::vector<std::string>& channels,
              const std::string& x_channel, const std::filesystem::path& svg)
{
  if (channels.empty()) {
    throw std::invalid_argument("plot: give at least one channel");
  }
  const CsvTable table = read_csv(csv);

  std::map<std::string, std::string> units;
  if (std::filesystem::exists(meta_path_for(csv))) {
    const json meta = json::parse(read_file(meta_path_for(csv)));
    for (const auto& c : meta.value("columns", json::array())) {
      units[c.at("name").get<std::string>()] = c.at("unit").get<std::string>();
    }
  }
  auto label = [&](const std::string& name) {
    auto it = units.find(name);
    return it == units.end() ? name : name + " [" + it->second + "]";
  };

  PlotSpec spec;
  spec.x = table.column(x_channel);
  spec.x_label = label(x_channel);
  std::string joined;
  std::string common_unit;
  bool same_unit = true;
  for (std::size_t i = 0; i < channels.size(); ++i) {
    spec.series.push_back({channels[i], table.column(channels[i])});
    joined += (i ? ", " : "") + channels[i];
    const std::string u = units.count(channels[i]) ? units[channels[i]] : "";
    if (i == 0) {
      common_unit = u;
    }
    same_unit = same_unit && u == common_unit;
  }
  spec.title = joined + " vs " + x_channel;
  spec.y_label = same_unit && !common_unit.empty() ? joined + " [" + common_unit + "]" : joined;
  write_file_atomic(svg, render_svg(spec));
}

} // namespace qrsim
