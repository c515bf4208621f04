#pragma once

#include <iosfwd>
#include <string>

#include "options.hpp"
#include "pdmp/model.hpp"

namespace pdmp::cli {

struct Context {
  Settings settings;
  std::string hash;
  std::ostream& out;
};

/// The "/model" object of the configuration, built.
ModelSpec load_model(const Settings& s);

bool run_simulate(const Context& ctx);
bool run_check_good(const Context& ctx);
bool run_verify_identities(const Context& ctx);
bool run_estimate_density(const Context& ctx);
bool run_propagate_density(const Context& ctx);
bool run_neuron_demo(const Context& ctx);
bool run_threshold(const Context& ctx);

}  // namespace pdmp::cli
