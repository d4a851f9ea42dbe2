#include "qrsim/csv_table.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace qrsim {

namespace {

void add_vec(std::vector<ColumnInfo>& cols, const std::string& stem, const std::string& unit,
             const std::string& what)
{
  for (const char* axis : {"x", "y", "z"}) {
    cols.push_back({stem + axis, unit, what + ", world " + axis});
  }
}

void add_mat(std::vector<ColumnInfo>& cols, const std::string& stem, const std::string& what)
{
  for (int r = 0; r < 3; ++r) {
    for (int c = 0; c < 3; ++c) {
      cols.push_back({stem + "_" + std::to_string(r) + std::to_string(c), "1",
                      what + " entry (" + std::to_string(r) + "," + std::to_string(c) + ")"});
    }
  }
}

std::vector<ColumnInfo> make_columns()
{
  std::vector<ColumnInfo> c;
  c.push_back({"t", "s", "simulated time"});
  c.push_back({"crank_angle", "rad", "crank heading, principal value in (-pi, pi]"});
  c.push_back({"crank_angle_unwrapped", "rad", "crank heading, continuous"});
  c.push_back({"w1z", "rad/s", "crank angular velocity, world z"});
  add_vec(c, "L1", "kg*m^2/s", "crank angular momentum about its COM");
  add_vec(c, "FO1", "N", "force on the crank at O1 from the fixed bearing");
  c.push_back({"Tc", "N*m", "drive torque on the crank about z"});
  add_vec(c, "FA2", "N", "force on the slider block at A2 from the crank pin");
  add_vec(c, "rC3", "m", "rocker centre of mass");
  add_vec(c, "p3", "kg*m/s", "rocker translational momentum");
  add_vec(c, "FO3", "N", "force on the rocker at O3 from the fixed bearing");
  add_vec(c, "rC5", "m", "output slider centre of mass");
  add_vec(c, "p5", "kg*m/s", "output slider translational momentum");
  add_vec(c, "FC5", "N", "force on the output slider at C5 from the connecting rod");
  add_mat(c, "R1", "crank orientation (body -> world)");
  add_mat(c, "R4", "connecting rod orientation (body -> world)");
  return c;
}

} // namespace

const std::vector<ColumnInfo>& probe_columns()
{
  static const std::vector<ColumnInfo> cols = make_columns();
  return cols;
}

std::vector<double> probe_row(const ProbeRecord& r)
{
  std::vector<double> v;
  v.reserve(probe_columns().size());
  auto vec = [&](const Vec3& x) { v.insert(v.end(), {x.x(), x.y(), x.z()}); };
  auto mat = [&](const Mat3& m) {
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        v.push_back(m(i, j));
      }
    }
  };
  v.push_back(r.t);
  v.push_back(r.crank_angle);
  v.push_back(r.crank_angle_unwrapped);
  v.push_back(r.omega1.z());
  vec(r.L1);
  vec(r.F_O1);
  v.push_back(r.Tc);
  vec(r.F_A2);
  vec(r.r_C3);
  vec(r.p3);
  vec(r.F_O3);
  vec(r.r_C5);
  vec(r.p5);
  vec(r.F_C5);
  mat(r.R1);
  mat(r.R4);
  return v;
}

std::string format_number(double v)
{
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

std::string format_probe_csv(const TimeSeries& series)
{
  std::string out;
  const auto& cols = probe_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) {
    out += (i ? "," : "") + cols[i].name;
  }
  out += '\n';
  std::array<char, 64> buf{};
  for (const auto& rec : series.rows) {
    const auto row = probe_row(rec);
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) {
        out += ',';
      }
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), row[i]);
      out.append(buf.data(), res.ptr);
    }
    out += '\n';
  }
  return out;
}

bool CsvTable::has(std::string_view name) const
{
  for (const auto& n : names) {
    if (n == name) {
      return true;
    }
  }
  return false;
}

const std::vector<double>& CsvTable::column(std::string_view name) const
{
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) {
      return columns[i];
    }
  }
  throw std::out_of_range("unknown channel '" + std::string(name) + "'");
}

CsvTable parse_csv(std::string_view text)
{
  CsvTable table;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) {
      return false;
    }
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    pos = end + 1;
    ++line_no;
    return true;
  };

  std::string_view line;
  if (!next_line(line) || line.empty()) {
    throw std::runtime_error("csv: missing header");
  }
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    table.names.emplace_back(line.substr(start, comma - start));
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  table.columns.resize(table.names.size());

  while (next_line(line)) {
    if (line.empty()) {
      continue;
    }
    std::size_t col = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      if (col >= table.names.size()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": too many fields");
      }
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number");
      }
      table.columns[col++].push_back(v);
      p = res.ptr;
      if (p == end) {
        break;
      }
      if (*p != ',') {
        throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected ','");
      }
      ++p;
    }
    if (col != table.names.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": too few fields");
    }
  }
  return table;
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

CsvTable read_csv(const std::filesystem::path& path)
{
  return parse_csv(read_file(path));
}

std::filesystem::path meta_path_for(const std::filesystem::path& csv)
{
  std::filesystem::path p = csv;
  p.replace_extension(".meta.json");
  return p;
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw std::runtime_error("cannot write " + tmp.string());
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
      throw std::runtime_error("write failed for " + tmp.string());
    }
  }
  std::filesystem::rename(tmp, path);
}

} // namespace qrsim
