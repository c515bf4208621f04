#pragma once

// Configuration layering for the command line tool: built-in defaults, then
// the --config file, then explicit flags. The merged JSON is the run's
// identity; its hash (without "out" and "workers") tags every report.

#include <deque>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdmp/flow.hpp"

namespace pdmp::cli {

enum class Kind { number, integer, text, numbers, integers, flag };

class FlagBinder {
 public:
  void add(CLI::App* app, const std::string& name, const std::string& pointer, Kind kind,
           const std::string& help);
  /// Writes every flag that appeared on the command line into `config`.
  void apply(nlohmann::json& config) const;

 private:
  struct Binding {
    CLI::Option* option;
    std::string* value;
    nlohmann::json::json_pointer pointer;
    Kind kind;
  };
  std::deque<std::string> storage_;
  std::vector<Binding> bindings_;
};

/// Typed access to the merged configuration; failures are ConfigErrors.
class Settings {
 public:
  explicit Settings(nlohmann::json config) : j_(std::move(config)) {}

  const nlohmann::json& json() const noexcept { return j_; }
  bool has(const std::string& pointer) const;
  double number(const std::string& pointer) const;
  double positive(const std::string& pointer) const;
  long long integer(const std::string& pointer) const;
  std::size_t count(const std::string& pointer) const;  ///< integer >= 1
  std::string text(const std::string& pointer) const;
  bool flag(const std::string& pointer) const;
  std::vector<double> numbers(const std::string& pointer) const;

  IntegratorConfig integrator() const;
  std::uint64_t seed() const;
  unsigned workers() const;
  std::string out_dir() const;

 private:
  const nlohmann::json& at(const std::string& pointer) const;
  nlohmann::json j_;
};

}  // namespace pdmp::cli
