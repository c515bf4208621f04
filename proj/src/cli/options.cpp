#include "options.hpp"

#include <sstream>

namespace pdmp::cli {

namespace {

constexpr const char* kModule = "cli";

double parse_number(const std::string& s, const std::string& name) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(kModule, name + ": '" + s + "' is not a number");
  return v;
}

long long parse_integer(const std::string& s, const std::string& name) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(kModule, name + ": '" + s + "' is not an integer");
  return v;
}

std::vector<std::string> split(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

}  // namespace

void FlagBinder::add(CLI::App* app, const std::string& name, const std::string& pointer, Kind kind,
                     const std::string& help) {
  storage_.emplace_back();
  std::string* slot = &storage_.back();
  CLI::Option* opt = kind == Kind::flag ? app->add_flag(name, help) : app->add_option(name, *slot, help);
  bindings_.push_back({opt, slot, nlohmann::json::json_pointer(pointer), kind});
}

void FlagBinder::apply(nlohmann::json& config) const {
  for (const Binding& b : bindings_) {
    if (b.option->count() == 0) continue;
    const std::string name = b.option->get_name();
    nlohmann::json v;
    switch (b.kind) {
      case Kind::number: v = parse_number(*b.value, name); break;
      case Kind::integer: v = parse_integer(*b.value, name); break;
      case Kind::text: v = *b.value; break;
      case Kind::flag: v = true; break;
      case Kind::numbers:
        v = nlohmann::json::array();
        for (const auto& s : split(*b.value)) v.push_back(parse_number(s, name));
        break;
      case Kind::integers:
        v = nlohmann::json::array();
        for (const auto& s : split(*b.value)) v.push_back(parse_integer(s, name));
        break;
    }
    config[b.pointer] = v;
  }
}

const nlohmann::json& Settings::at(const std::string& pointer) const {
  const nlohmann::json::json_pointer p(pointer);
  if (!j_.contains(p) || j_.at(p).is_null()) throw ConfigError(kModule, "missing setting " + pointer);
  return j_.at(p);
}

bool Settings::has(const std::string& pointer) const {
  const nlohmann::json::json_pointer p(pointer);
  return j_.contains(p) && !j_.at(p).is_null();
}

double Settings::number(const std::string& pointer) const {
  const auto& v = at(pointer);
  if (!v.is_number()) throw ConfigError(kModule, "setting " + pointer + " must be a number");
  return v.get<double>();
}

double Settings::positive(const std::string& pointer) const {
  const double v = number(pointer);
  if (!(v > 0.0)) throw ConfigError(kModule, "setting " + pointer + " must be positive");
  return v;
}

long long Settings::integer(const std::string& pointer) const {
  const auto& v = at(pointer);
  if (!v.is_number_integer()) throw ConfigError(kModule, "setting " + pointer + " must be an integer");
  return v.get<long long>();
}

std::size_t Settings::count(const std::string& pointer) const {
  const long long v = integer(pointer);
  if (v < 1) throw ConfigError(kModule, "setting " + pointer + " must be >= 1");
  return static_cast<std::size_t>(v);
}

std::string Settings::text(const std::string& pointer) const {
  const auto& v = at(pointer);
  if (!v.is_string()) throw ConfigError(kModule, "setting " + pointer + " must be a string");
  return v.get<std::string>();
}

bool Settings::flag(const std::string& pointer) const {
  const auto& v = at(pointer);
  if (!v.is_boolean()) throw ConfigError(kModule, "setting " + pointer + " must be true or false");
  return v.get<bool>();
}

std::vector<double> Settings::numbers(const std::string& pointer) const {
  const auto& v = at(pointer);
  if (!v.is_array()) throw ConfigError(kModule, "setting " + pointer + " must be a list");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) throw ConfigError(kModule, "setting " + pointer + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

IntegratorConfig Settings::integrator() const {
  IntegratorConfig cfg;
  cfg.step = positive("/integrator/step");
  cfg.max_time = positive("/integrator/max_time");
  cfg.trunc_eps = positive("/integrator/trunc_eps");
  cfg.use_closed_form = flag("/integrator/closed_form");
  if (!(cfg.trunc_eps < 1.0)) throw ConfigError(kModule, "trunc_eps must lie in (0, 1)");
  return cfg;
}

std::uint64_t Settings::seed() const {
  const long long s = integer("/seed");
  if (s < 0) throw ConfigError(kModule, "seed must be >= 0");
  return static_cast<std::uint64_t>(s);
}

unsigned Settings::workers() const { return static_cast<unsigned>(count("/workers")); }

std::string Settings::out_dir() const { return text("/out"); }

}  // namespace pdmp::cli
