// qrsim: run, analyze, oracle and plot subcommands.

#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qrsim/commands.hpp"
#include "qrsim/csv_table.hpp"

namespace {

qrsim::RunConfig load_config(const std::string& path)
{
  if (path.empty()) {
    return qrsim::parse_config("{}");
  }
  return qrsim::parse_config(qrsim::read_file(path));
}

} // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Quick-return mechanism simulator"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_path;
  double cutoff = 2.0;
  std::string csv_path;
  std::vector<std::string> channels;
  std::string x_channel = "t";
  int samples = 720;
  int revolutions = 1;

  auto* run = app.add_subcommand("run", "simulate and write a CSV with a .meta.json sidecar");
  run->add_option("--config", config_path, "JSON config (defaults when omitted)")
      ->check(CLI::ExistingFile);
  run->add_option("--out", out_path, "CSV path (overrides output.csv)");

  auto* analyze = app.add_subcommand("analyze", "stroke report for a CSV written by run or oracle");
  analyze->add_option("csv", csv_path, "input CSV")->required()->check(CLI::ExistingFile);
  analyze->add_option("--cutoff", cutoff, "ignore samples before this time [s]")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  analyze->add_option("--out", out_path, "write the JSON report here instead of stdout");

  auto* oracle = app.add_subcommand("oracle", "rigid-link reference sweep as CSV");
  oracle->add_option("--config", config_path, "JSON config for geometry and drive rate")
      ->check(CLI::ExistingFile);
  oracle->add_option("--samples", samples, "crank angles per revolution")
      ->capture_default_str()
      ->check(CLI::Range(2, 100000000));
  oracle->add_option("--revolutions", revolutions, "number of revolutions")
      ->capture_default_str()
      ->check(CLI::Range(1, 100000));
  oracle->add_option("--out", out_path, "CSV path")->required();

  auto* plot = app.add_subcommand("plot", "render CSV channels to SVG");
  plot->add_option("csv", csv_path, "input CSV")->required()->check(CLI::ExistingFile);
  plot->add_option("channels", channels, "channel names")->required();
  plot->add_option("--x", x_channel, "x-axis channel")->capture_default_str();
  plot->add_option("--out", out_path, "SVG path (default: CSV name with .svg)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      qrsim::RunConfig cfg = load_config(config_path);
      const std::string csv = out_path.empty() ? cfg.csv_path : out_path;
      const qrsim::RunSummary s = qrsim::run_simulation(cfg, csv);
      std::printf("steps %lld\nrows %zu\nwall time %.3f s\nfinal crank angle %.9g rad\nwrote %s\n",
                  static_cast<long long>(s.steps), s.rows, s.wall_seconds, s.final_crank_angle,
                  csv.c_str());
    } else if (analyze->parsed()) {
      const auto report = qrsim::analyze_csv(csv_path, cutoff);
      if (out_path.empty()) {
        std::cout << qrsim::report_summary(report) << report.dump(2) << "\n";
      } else {
        qrsim::write_file_atomic(out_path, report.dump(2) + "\n");
        std::cout << qrsim::report_summary(report);
      }
    } else if (oracle->parsed()) {
      const qrsim::RunConfig cfg = load_config(config_path);
      qrsim::write_oracle_csv(cfg.model.geometry, cfg.model.drive.rate, samples, revolutions,
                              out_path);
      std::printf("wrote %s\n", out_path.c_str());
    } else if (plot->parsed()) {
      std::string svg = out_path;
      if (svg.empty()) {
        std::filesystem::path p = csv_path;
        svg = p.replace_extension(".svg").string();
      }
      qrsim::plot_csv(csv_path, channels, x_channel, svg);
      std::printf("wrote %s\n", svg.c_str());
    }
  } catch (const qrsim::ConfigError& e) {
    std::fprintf(stderr, "qrsim: config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qrsim: %s\n", e.what());
    return 1;
  }
  return 0;
}
