#include "pdmp/model_io.hpp"

#include <fstream>

namespace pdmp {

namespace {

constexpr const char* kModule = "model";

double number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(kModule, std::string("missing field '") + key + "'");
  if (!j.at(key).is_number()) throw ConfigError(kModule, std::string("field '") + key + "' must be a number");
  return j.at(key).get<double>();
}

}  // namespace

RateFunction rate_from_json(const nlohmann::json& j) {
  if (!j.is_object() || !j.contains("kind") || !j.at("kind").is_string())
    throw ConfigError(kModule, "rate entries need a string field 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "constant") {
    std::optional<double> bound;
    if (j.contains("bound")) bound = number(j, "bound");
    return RateFunction::constant(number(j, "value"), bound);
  }
  if (kind == "sigmoid")
    return RateFunction::sigmoid(number(j, "floor"), number(j, "bound"), number(j, "slope"),
                                 number(j, "center"));
  if (kind == "affine_clipped")
    return RateFunction::affine_clipped(number(j, "intercept"), number(j, "slope"),
                                        number(j, "floor"), number(j, "bound"));
  throw ConfigError(kModule, "unknown rate kind '" + kind + "'");
}

nlohmann::json rate_to_json(const RateFunction& f) {
  const auto& p = f.parameters();
  switch (f.kind()) {
    case RateFunction::Kind::constant:
      return {{"kind", "constant"}, {"value", p.at(0)}, {"bound", f.bound()}};
    case RateFunction::Kind::sigmoid:
      return {{"kind", "sigmoid"}, {"floor", p.at(0)}, {"bound", p.at(1)},
              {"slope", p.at(2)}, {"center", p.at(3)}};
    case RateFunction::Kind::affine_clipped:
      return {{"kind", "affine_clipped"}, {"intercept", p.at(0)}, {"slope", p.at(1)},
              {"floor", p.at(2)}, {"bound", p.at(3)}};
    case RateFunction::Kind::custom:
      break;
  }
  throw ConfigError(kModule, "custom rate functions have no file form");
}

NeuronParams neuron_params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError(kModule, "model description must be a JSON object");
  const auto type = j.value("type", std::string("neuron"));
  if (type != "neuron") throw ConfigError(kModule, "unsupported model type '" + type + "'");
  NeuronParams p;
  const double n = number(j, "N");
  if (n < 1 || n != static_cast<int>(n)) throw ConfigError(kModule, "N must be a positive integer");
  p.N = static_cast<int>(n);
  p.lambda = number(j, "lambda");
  p.v_star = number(j, "v_star");

  p.weights = Matrix::Zero(p.N, p.N);
  if (!j.contains("weights")) throw ConfigError(kModule, "missing field 'weights'");
  const auto& w = j.at("weights");
  if (w.is_number()) {
    p.weights.setConstant(w.get<double>());
    p.weights.diagonal().setZero();
  } else if (w.is_array() && static_cast<int>(w.size()) == p.N) {
    for (int i = 0; i < p.N; ++i) {
      if (!w[i].is_array() || static_cast<int>(w[i].size()) != p.N)
        throw ConfigError(kModule, "weights must be an N x N array");
      for (int k = 0; k < p.N; ++k) {
        if (!w[i][k].is_number()) throw ConfigError(kModule, "weights must be numbers");
        p.weights(i, k) = w[i][k].get<double>();
      }
    }
  } else {
    throw ConfigError(kModule, "weights must be a number or an N x N array");
  }

  if (!j.contains("rates")) throw ConfigError(kModule, "missing field 'rates'");
  const auto& r = j.at("rates");
  if (r.is_array()) {
    if (static_cast<int>(r.size()) != p.N) throw ConfigError(kModule, "rates array must have N entries");
    for (const auto& e : r) p.rates.push_back(rate_from_json(e));
  } else {
    p.rates.assign(p.N, rate_from_json(r));
  }
  return p;
}

nlohmann::json neuron_params_to_json(const NeuronParams& p) {
  nlohmann::json w = nlohmann::json::array();
  for (int i = 0; i < p.N; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < p.N; ++k) row.push_back(p.weights(i, k));
    w.push_back(row);
  }
  nlohmann::json rates = nlohmann::json::array();
  for (const auto& f : p.rates) rates.push_back(rate_to_json(f));
  return {{"type", "neuron"}, {"N", p.N},       {"lambda", p.lambda},
          {"v_star", p.v_star}, {"weights", w}, {"rates", rates}};
}

ModelSpec model_from_json(const nlohmann::json& j) {
  return build_neuron_model(neuron_params_from_json(j));
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cli", "cannot read '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("cli", "'" + path + "' is not valid JSON: " + e.what());
  }
}

}  // namespace pdmp
