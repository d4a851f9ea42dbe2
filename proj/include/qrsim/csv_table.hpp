#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "qrsim/integrator.hpp"

namespace qrsim {

struct ColumnInfo
{
  std::string name;
  std::string unit;
  std::string description;
};

/// Logged channels in CSV order.
const std::vector<ColumnInfo>& probe_columns();

/// Values of one record in `probe_columns()` order.
std::vector<double> probe_row(const ProbeRecord& rec);

/// Shortest decimal text that parses back to the same double.
std::string format_number(double v);

/// Header plus one line per record, LF line endings.
std::string format_probe_csv(const TimeSeries& series);

/// Numeric CSV held column-wise.
struct CsvTable
{
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  bool has(std::string_view name) const;
  /// Throws std::out_of_range for an unknown channel.
  const std::vector<double>& column(std::string_view name) const;
};

/// Throws std::runtime_error with the line number on malformed input.
CsvTable parse_csv(std::string_view text);
CsvTable read_csv(const std::filesystem::path& path);

/// run.csv -> run.meta.json
std::filesystem::path meta_path_for(const std::filesystem::path& csv);

std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

} // namespace qrsim
