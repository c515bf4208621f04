#pragma once

// Artifact writers: RFC-4180 CSV with 17 significant digits, JSON reports
// with sorted keys, and the config hash embedded in every report.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "pdmp/density.hpp"
#include "pdmp/skeleton.hpp"

namespace pdmp::io {

/// %.17g; non-finite values print as nan, inf, -inf.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> fields);
  void add_numbers(const std::vector<double>& values);
  std::size_t rows() const noexcept { return rows_.size(); }
  /// CRLF line endings, fields quoted only when they need it.
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// One row per jump: k, time, index (1-based), pre_1..pre_N, post_1..post_N.
CsvTable path_table(const PathRecord& path);
/// Cell centers and values of a grid density.
CsvTable grid_table(const GridDensity& gd);
/// y_1..y_N, min singular value, threshold, good.
CsvTable sweep_table(const SweepReport& report);

nlohmann::json state_json(const State& x);
nlohmann::json mean_se_json(const numerics::MeanSe& m);

/// FNV-1a (64 bit, hex) of the compact dump of `config` without the keys
/// that cannot change results ("out", "workers").
std::string config_hash(const nlohmann::json& config);

void write_text(const std::string& path, std::string_view content);
void write_json(const std::string& path, const nlohmann::json& j);

}  // namespace pdmp::io
