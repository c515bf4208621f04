#include "pdmp/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

namespace pdmp::io {

namespace {

std::string quote(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

}  // namespace

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> fields) {
  if (fields.size() != header_.size()) throw InvariantError("io", "csv row width differs from header");
  rows_.push_back(std::move(fields));
}

void CsvTable::add_numbers(const std::vector<double>& values) {
  std::vector<std::string> f;
  f.reserve(values.size());
  for (double v : values) f.push_back(format_number(v));
  add_row(std::move(f));
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&out](const std::vector<std::string>& fields) {
    for (std::size_t k = 0; k < fields.size(); ++k) {
      if (k) out += ',';
      out += quote(fields[k]);
    }
    out += "\r\n";
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

CsvTable path_table(const PathRecord& path) {
  const auto n = static_cast<int>(path.initial.size());
  std::vector<std::string> header{"k", "time", "index"};
  for (int l = 1; l <= n; ++l) header.push_back("pre_" + std::to_string(l));
  for (int l = 1; l <= n; ++l) header.push_back("post_" + std::to_string(l));
  CsvTable t(header);
  for (std::size_t k = 0; k < path.jumps(); ++k) {
    std::vector<std::string> f{std::to_string(k + 1), format_number(path.times[k]),
                               std::to_string(path.indices[k] + 1)};
    for (int l = 0; l < n; ++l) f.push_back(format_number(path.pre[k][l]));
    for (int l = 0; l < n; ++l) f.push_back(format_number(path.post[k][l]));
    t.add_row(std::move(f));
  }
  return t;
}

CsvTable grid_table(const GridDensity& gd) {
  std::vector<std::string> header;
  for (std::size_t a = 0; a < gd.axes.size(); ++a) header.push_back("x_" + std::to_string(a + 1));
  header.push_back("density");
  CsvTable t(header);
  const std::size_t dims = gd.axes.size();
  for (std::size_t k = 0; k < gd.values.size(); ++k) {
    std::vector<double> row(dims + 1);
    std::size_t rest = k;
    for (std::size_t a = dims; a-- > 0;) {
      row[a] = gd.axes[a].center(rest % gd.axes[a].count);
      rest /= gd.axes[a].count;
    }
    row[dims] = gd.values[k];
    t.add_numbers(row);
  }
  return t;
}

CsvTable sweep_table(const SweepReport& report) {
  const auto n = report.rows.empty() ? 0 : static_cast<int>(report.rows.front().y.size());
  std::vector<std::string> header;
  for (int l = 1; l <= n; ++l) header.push_back("y_" + std::to_string(l));
  header.insert(header.end(), {"min_singular_value", "threshold", "good"});
  CsvTable t(header);
  for (const auto& r : report.rows) {
    std::vector<std::string> f;
    for (int l = 0; l < n; ++l) f.push_back(format_number(r.y[l]));
    f.push_back(format_number(r.min_singular_value));
    f.push_back(format_number(r.threshold));
    f.push_back(r.good ? "true" : "false");
    t.add_row(std::move(f));
  }
  return t;
}

nlohmann::json state_json(const State& x) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index l = 0; l < x.size(); ++l) j.push_back(x[l]);
  return j;
}

nlohmann::json mean_se_json(const numerics::MeanSe& m) { return {{"mean", m.mean}, {"se", m.se}}; }

std::string config_hash(const nlohmann::json& config) {
  nlohmann::json c = config;
  if (c.is_object()) {
    c.erase("out");
    c.erase("workers");
  }
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : c.dump()) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text(const std::string& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("io", "cannot open " + path + " for writing");
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) throw ConfigError("io", "write failed for " + path);
}

void write_json(const std::string& path, const nlohmann::json& j) { write_text(path, j.dump(2) + "\n"); }

}  // namespace pdmp::io
