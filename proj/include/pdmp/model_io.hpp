#pragma once

// Model description files (JSON). Only the neuron preset has a file form;
// other models are assembled through the library API.
//
//   {"type": "neuron", "N": 2, "lambda": 1, "v_star": 1,
//    "weights": [[0, 0.2], [0.1, 0]],
//    "rates": {"kind": "sigmoid", "floor": 0.5, "bound": 2, "slope": 4, "center": 0.5}}
//
// "rates" is either one object shared by all neurons or an array of N objects.
// "weights" may also be a single number, used for every off-diagonal entry.

#include <string>

#include "json.hpp"
#include "pdmp/model.hpp"

namespace pdmp {

RateFunction rate_from_json(const nlohmann::json& j);
nlohmann::json rate_to_json(const RateFunction& f);

NeuronParams neuron_params_from_json(const nlohmann::json& j);
nlohmann::json neuron_params_to_json(const NeuronParams& p);

/// Parses and builds the model. Throws ConfigError on malformed input and
/// InvariantError on parameters the model rejects.
ModelSpec model_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::string& path);

}  // namespace pdmp
