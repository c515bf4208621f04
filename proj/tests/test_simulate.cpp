#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "pdmp/simulate.hpp"
#include "support.hpp"

using namespace pdmp;

namespace {

using testing::sigmoid_neuron;

IntegratorConfig coarse() {
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  return cfg;
}

double ks_exponential(std::vector<double> sample, double rate) {
  std::sort(sample.begin(), sample.end());
  const double n = static_cast<double>(sample.size());
  double d = 0.0;
  for (std::size_t k = 0; k < sample.size(); ++k) {
    const double F = 1.0 - std::exp(-rate * sample[k]);
    d = std::max({d, F - k / n, (k + 1) / n - F});
  }
  return d;
}

}  // namespace

TEST_CASE("identical stream specs give identical paths") {
  const ModelSpec m = sigmoid_neuron(3);
  const State x0 = State::Zero(3);
  const PathRecord a = simulate_path(m, x0, {50.0, {}}, {7, 3}, {});
  const PathRecord b = simulate_path(m, x0, {50.0, {}}, {7, 3}, {});
  const PathRecord c = simulate_path(m, x0, {50.0, {}}, {7, 4}, {});
  CHECK(a.times == b.times);
  CHECK(a.indices == b.indices);
  CHECK(a.post == b.post);
  CHECK(a.final_state == b.final_state);
  CHECK(a.times != c.times);
}

TEST_CASE("zero jumps ends at the flow endpoint") {
  const ModelSpec m = sigmoid_neuron(2);
  const State x0{{0.1, 0.4}};
  const PathRecord p = simulate_path(m, x0, {3.0, 0}, {1, 1}, {});
  CHECK(p.jumps() == 0);
  CHECK(p.final_time == 3.0);
  CHECK((p.final_state - flow(m, x0, 3.0, {})).norm() == 0.0);

  const PathRecord q = simulate_path(m, x0, {{}, 25}, {1, 1}, {});
  CHECK(q.jumps() == 25);
  CHECK(q.final_time == q.times.back());
  CHECK_THROWS_AS(simulate_path(m, x0, {}, {1, 1}, {}), InvariantError);
}

TEST_CASE("path invariants") {
  for (const ModelSpec& m : {sigmoid_neuron(3), testing::nonlinear(3)}) {
    IntegratorConfig cfg;
    cfg.use_closed_form = false;
    const PathRecord p = simulate_path(m, State::Zero(3), {100.0, {}}, {11, 0}, cfg);
    REQUIRE(p.jumps() > 50);
    const PathCheck c = check_path(m, p, cfg);
    CHECK(c.post_states_exact);
    CHECK(c.resets_exact);
    CHECK(c.times_increasing);
    CHECK(c.max_reflow_error < 1e-12);
  }
}

TEST_CASE("constant rates: exponential waiting times and index frequencies") {
  const ModelSpec m = testing::neuron(3, 0.1, 1.0);
  Rng rng({5, 0});
  const int n = 20000;
  std::vector<double> taus(n);
  for (auto& t : taus) t = next_jump(m, State::Zero(3), rng, {}).tau;
  const auto ms = numerics::mean_and_se(taus);
  CHECK(std::abs(ms.mean - 1.0 / 3.0) < 3 * ms.se);
  CHECK(ks_exponential(taus, 3.0) < 1.6276 / std::sqrt(n));

  // Declared bound above the rate: rejection steps are exercised.
  NeuronParams p = testing::neuron_params(3, 1.0, 1.0, 0.1, RateFunction::constant(1.0, 2.0));
  const ModelSpec loose = build_neuron_model(p);
  for (auto& t : taus) t = next_jump(loose, State::Zero(3), rng, {}).tau;
  CHECK(ks_exponential(taus, 3.0) < 1.6276 / std::sqrt(n));

  p.rates = {RateFunction::constant(1.0, 3.0), RateFunction::constant(2.0, 3.0),
             RateFunction::constant(3.0)};
  const ModelSpec weighted = build_neuron_model(p);
  std::vector<double> hits(3, 0.0);
  for (int k = 0; k < n; ++k) hits[next_jump(weighted, State::Zero(3), rng, {}).index] += 1.0;
  for (int i = 0; i < 3; ++i) {
    const double p_i = (i + 1) / 6.0;
    CHECK(std::abs(hits[i] / n - p_i) < 3 * std::sqrt(p_i * (1 - p_i) / n));
  }
}

TEST_CASE("thinning and inversion agree with the exact waiting-time law") {
  // f(v) = 0.5 + v along the neuron flow from 0: P(τ > t) = exp(-(1.5 t - 1 + e^{-t})).
  const auto f = RateFunction::affine_clipped(0.5, 1.0, 0.0, 2.0);
  const ModelSpec m = build_neuron_model(testing::neuron_params(1, 1.0, 1.0, 0.0, f));
  double exact_mean = 0.0;
  for (double t = 0.0; t < 40.0; t += 1e-4)
    exact_mean += 1e-4 * std::exp(-(1.5 * (t + 5e-5) - 1.0 + std::exp(-(t + 5e-5))));

  Rng rng({9, 0});
  const int n = 20000;
  std::vector<double> a(n), b(n);
  for (int k = 0; k < n; ++k) a[k] = next_jump(m, State::Zero(1), rng, {}).tau;
  for (int k = 0; k < n; ++k) b[k] = next_jump_inversion(m, State::Zero(1), rng, {}).tau;
  const auto ma = numerics::mean_and_se(a);
  const auto mb = numerics::mean_and_se(b);
  CHECK(std::abs(ma.mean - exact_mean) < 3 * ma.se);
  CHECK(std::abs(mb.mean - exact_mean) < 3 * mb.se);
  CHECK(std::abs(ma.mean - mb.mean) < 3 * numerics::combined_se(ma.se, mb.se));
}

TEST_CASE("generator") {
  const double c = 0.7;
  const ModelSpec m = testing::neuron(1, 0.0, c);
  const auto suite = test_function_suite(1);
  const State x{{0.4}};
  CHECK(apply_generator(m, suite[0], x) == 0.0);
  CHECK(apply_generator(m, suite[1], x) == doctest::Approx(c * (0.0 - 0.4) - (0.4 - 1.0)));
  TestFunction no_grad{"x1", suite[1].value, {}};
  CHECK(apply_generator(m, no_grad, x) == doctest::Approx(c * (0.0 - 0.4) - (0.4 - 1.0)).epsilon(1e-8));
}

TEST_CASE("generator matches the short-time semigroup derivative") {
  const ModelSpec m = sigmoid_neuron(2);
  const State x{{0.6, 0.3}};
  const TestFunction g = test_function_suite(2)[3];
  const double h = 1e-3;
  const int paths = 100000;
  std::vector<double> d(paths);
  for (int k = 0; k < paths; ++k) {
    const PathRecord p = simulate_path(m, x, {h, {}}, {21, static_cast<std::uint64_t>(k)}, {});
    d[k] = (g.value(p.final_state) - g.value(x)) / h;
  }
  const auto est = numerics::mean_and_se(d);
  CHECK(std::abs(est.mean - apply_generator(m, g, x)) < 3 * est.se + 5 * h);
}

TEST_CASE("long-run averages on one path") {
  const ModelSpec c = testing::neuron(2, 0.2, 0.8);
  const PathRecord pc = simulate_path(c, State::Zero(2), {2000.0, {}}, {3, 0}, coarse());
  const auto suite = test_function_suite(2);
  CHECK(ergodic_average(c, pc, suite[0], coarse()).mean == 1.0);
  CHECK(ergodic_average(c, pc, times_total_rate(c, suite[0]), coarse()).mean ==
        doctest::Approx(1.6).epsilon(1e-12));
  CHECK(jump_chain_average(pc, suite[0]).mean == 1.0);

  const ModelSpec m = sigmoid_neuron(2);
  const PathRecord p = simulate_path(m, State::Zero(2), {5000.0, {}}, {4, 0}, coarse());
  std::vector<TestFunction> fs;
  for (const auto& g : suite) fs.push_back(g);
  for (const auto& g : suite) fs.push_back(times_total_rate(m, g));
  for (const auto& g : suite) fs.push_back(generator_of(m, g));
  const BatchIntegrals bi = integrate_path(m, p, fs, coarse());
  const auto rate = bi.jump_rate();
  const auto fbar = bi.time_average(5);
  CHECK(std::abs(rate.mean - fbar.mean) < 3 * numerics::combined_se(rate.se, fbar.se));
  CHECK(rate.mean == doctest::Approx(jump_rate(p).mean).epsilon(1e-12));
  for (std::size_t l = 0; l < suite.size(); ++l) {
    const auto chain = bi.chain_average(l);
    const auto ratio = bi.time_ratio(5 + l, 5);
    INFO(suite[l].name);
    CHECK(std::abs(chain.mean - ratio.mean) <= 3 * numerics::combined_se(chain.se, ratio.se) + 1e-12);
    const auto lg = bi.time_average(10 + l);
    CHECK(std::abs(lg.mean) <= 3 * lg.se + 1e-12);
    CHECK(chain.mean == doctest::Approx(jump_chain_average(p, suite[l]).mean).epsilon(1e-12));
  }
}
