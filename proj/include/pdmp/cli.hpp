#pragma once

// Command line front end. run() never throws: module errors map to exit
// code 1 with the module named on stderr, usage and config errors to 2.

#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "pdmp/simulate.hpp"

namespace pdmp::cli {

enum ExitCode : int { kPass = 0, kFail = 1, kUsage = 2 };

/// One verified relation: |lhs - rhs| <= 3 se (+ allowance) decides `pass`.
struct Check {
  std::string identity;
  double lhs = 0.0;
  double rhs = 0.0;
  double se = 0.0;
  bool pass = false;

  nlohmann::json to_json() const;
};

Check compare(std::string identity, const numerics::MeanSe& lhs, const numerics::MeanSe& rhs,
              double allowance = 0.0);

/// Jump-chain identity and stationarity residual for every suite function,
/// plus N_T / T against m̂(f̄), from one integration pass over the path.
std::vector<Check> long_run_checks(const ModelSpec& model, const PathRecord& path,
                                   const IntegratorConfig& cfg, const EstimatorConfig& est = {});

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pdmp::cli
