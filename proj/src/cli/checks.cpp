#include <cmath>

#include "pdmp/cli.hpp"

namespace pdmp::cli {

nlohmann::json Check::to_json() const {
  return {{"identity", identity}, {"lhs", lhs}, {"rhs", rhs}, {"se", se}, {"verdict", pass ? "pass" : "fail"}};
}

Check compare(std::string identity, const numerics::MeanSe& lhs, const numerics::MeanSe& rhs,
              double allowance) {
  Check c;
  c.identity = std::move(identity);
  c.lhs = lhs.mean;
  c.rhs = rhs.mean;
  c.se = numerics::combined_se(lhs.se, rhs.se);
  c.pass = std::abs(c.lhs - c.rhs) <= 3.0 * c.se + allowance;
  return c;
}

std::vector<Check> long_run_checks(const ModelSpec& model, const PathRecord& path,
                                   const IntegratorConfig& cfg, const EstimatorConfig& est) {
  const std::vector<TestFunction> suite = test_function_suite(model.dimension());
  const std::size_t L = suite.size();
  // Layout: g_l, f̄ g_l, L g_l, f̄.
  std::vector<TestFunction> fns(suite);
  for (const auto& g : suite) fns.push_back(times_total_rate(model, g));
  for (const auto& g : suite) fns.push_back(generator_of(model, g));
  fns.push_back(times_total_rate(model, {"one", [](const State&) { return 1.0; }, {}}));
  const BatchIntegrals bi = integrate_path(model, path, fns, cfg, est);

  std::vector<Check> out;
  for (std::size_t l = 0; l < L; ++l)
    out.push_back(compare("jump-chain/" + suite[l].name, bi.chain_average(l), bi.time_ratio(L + l, 3 * L)));
  for (std::size_t l = 0; l < L; ++l)
    out.push_back(compare("stationarity/" + suite[l].name, bi.time_average(2 * L + l), {0.0, 0.0}));
  out.push_back(compare("jump-rate", bi.jump_rate(), bi.time_average(3 * L)));
  return out;
}

}  // namespace pdmp::cli
