#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "pdmp/density.hpp"
#include "pdmp/ipp.hpp"
#include "support.hpp"

using namespace pdmp;

namespace {

IntegratorConfig coarse() {
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  return cfg;
}

const EmpiricalMeasure& sigmoid_sample(int n) {
  static std::map<int, EmpiricalMeasure> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  static std::map<int, ModelSpec> models;
  const ModelSpec& m = models.emplace(n, testing::sigmoid_neuron(n)).first->second;
  SamplingConfig sc;
  sc.horizon = 11112;  // ~1e4 samples after burn-in
  sc.seed = 11;
  return cache.emplace(n, estimate_invariant(m, sc, coarse())).first->second;
}

TestFunction constant(double c) {
  return {"const", [c](const State&) { return c; }, [](const State& x) { return State::Zero(x.size()); }};
}

}  // namespace

TEST_CASE("time-sampled empirical measure") {
  const EmpiricalMeasure& m = sigmoid_sample(2);
  CHECK(m.size() >= 10000);
  CHECK(m.provenance == "time-sampled");
  CHECK(m.weight_sum() == doctest::Approx(1.0));
  for (const State& x : m.samples) {
    CHECK(x.minCoeff() >= 0.0);
    CHECK(x.maxCoeff() < 2.0);
  }
}

TEST_CASE("representation formula") {
  const ModelSpec model = testing::sigmoid_neuron(2);
  const EmpiricalMeasure& m = sigmoid_sample(2);
  const auto suite = test_function_suite(2);
  std::vector<TestFunction> g = {constant(1.0), constant(0.0), suite[2]};
  const RepresentationResult r = representation_rhs(model, m, g, coarse());
  CHECK(r.capped == 0);
  CHECK(std::abs(r.values[0].mean - 1.0) <= std::max(0.01, 3.0 * r.values[0].se));
  CHECK(r.values[1].mean == 0.0);
  const numerics::MeanSe direct = m.mean(suite[2]);
  CHECK(std::abs(r.values[2].mean - direct.mean) <=
        3.0 * numerics::combined_se(r.values[2].se, direct.se));
}

TEST_CASE("grid densities integrate to one") {
  std::mt19937_64 gen(5);
  std::normal_distribution<double> nd;
  EmpiricalMeasure m;
  for (int k = 0; k < 20000; ++k) m.samples.push_back(State::Constant(1, nd(gen)));
  m.weights.assign(m.samples.size(), 1.0 / 20000.0);
  const GridDensity h = histogram(m, 0);
  const GridDensity k = kde(m, 0);
  CHECK(h.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.integral() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(k.bandwidth.has_value());
  CHECK(h.method == "histogram/freedman-diaconis");
  CHECK(std::abs(k.values[k.axes[0].count / 2] - 1.0 / std::sqrt(2.0 * M_PI)) < 0.02);
}

TEST_CASE("kde derivative sup converges on a known density") {
  const double target = std::exp(-0.5) / std::sqrt(2.0 * M_PI);  // sup |φ'| at ±1
  NonInteractingSpec flat;
  flat.dimension = 1;
  flat.drift = [](double) { return 1.0; };
  flat.drift_derivative = [](double) { return 0.0; };
  const RegionSpec everywhere{0.0, 0, 0.0};
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  double last = 1e9;
  for (int n : {1000, 10000, 100000}) {
    std::vector<double> data(static_cast<std::size_t>(n));
    for (double& v : data) v = nd(gen);
    const GridDensity gd = kde(data, 1024);
    const double err = std::abs(smoothness_probe(gd, flat, everywhere, 1)[0] - target);
    CHECK(err < last);
    last = err;
  }
  CHECK(last < 0.05);
}

TEST_CASE("smoothness probe and region membership") {
  NonInteractingSpec spec = neuron_structure(testing::neuron_params(2, 1.0, 1.0, 0.1, RateFunction::constant(1.0)));
  GridDensity uniform;
  uniform.axes = {GridAxis{0.0, 1.0, 100}};
  uniform.values.assign(100, 1.0);
  const RegionSpec region{0.05, 1, 0.1};
  for (double v : smoothness_probe(uniform, spec, region, 3)) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));
  CHECK_FALSE(region.contains(spec, 0.0));
  CHECK_FALSE(region.contains(spec, 0.299));   // (k+2)A = 0.3
  CHECK(region.contains(spec, 0.5));
  CHECK_FALSE(region.contains(spec, 0.96));    // |b~| = 0.04 <= d
  const RegionSpec empty{2.0, 1, 0.1};
  CHECK_THROWS_AS(smoothness_probe(uniform, spec, empty, 1), InvariantError);
}

TEST_CASE("regularity threshold") {
  const RegularityThreshold r = regularity_threshold(3, 2.0, 1.0);
  CHECK(r.k_star == 3);
  CHECK(r.guaranteed);
  CHECK_FALSE(regularity_threshold(3, 0.0, 1.0).guaranteed);
  CHECK_FALSE(regularity_threshold(1, 0.0, 1.0).guaranteed);
  CHECK(regularity_threshold(1, 1.5, 1.0).k_star == 1);
  for (int N = 1; N <= 20; ++N) CHECK(regularity_threshold(N, 1.01, 1.0).k_star >= 0);
  for (int N = 1; N <= 6; ++N) {
    long long prev = regularity_threshold(N, 0.0, 1.0).k_star;
    for (double f0 = 0.1; f0 < 5.0; f0 += 0.1) {
      const long long k = regularity_threshold(N, f0, 1.0).k_star;
      CHECK(k >= prev);
      CHECK(regularity_threshold(N, f0, 1.5).k_star <= k);
      prev = k;
    }
  }
  CHECK_THROWS_AS(regularity_threshold(2, 1.0, 0.0), InvariantError);
}

TEST_CASE("one-dimensional integration by parts") {
  const ModelSpec model = testing::sigmoid_neuron(1);
  const EmpiricalMeasure& m = sigmoid_sample(1);
  const ScalarTest g = bump_test_function(0.2, 0.7);
  const RegionSpec region{0.1, 0, 0.0};
  const TestFunction H1 = constant(1.0);
  const TestFunction H2{"decay", [](const State& x) { return 1.0 / (1.0 + x[0] * x[0]); },
                        [](const State& x) {
                          const double d = 1.0 + x[0] * x[0];
                          return State::Constant(1, -2.0 * x[0] / (d * d));
                        }};
  IntegratorConfig cfg;
  cfg.step = 1e-3;
  for (const TestFunction& H : {H1, H2}) {
    const IdentityCheck c = ipp_check(model, H, g, region, m, cfg);
    CHECK(c.pass);
    CHECK(std::abs(c.lhs) > 0.1);
  }
  const IdentityCheck zero = ipp_check(model, H1, bump_test_function(0.2, 0.7, 0.0), region, m, cfg);
  CHECK(zero.residual == 0.0);
  CHECK_THROWS_AS(ipp_check(model, H1, bump_test_function(0.2, 0.99), region, m, cfg), InvariantError);

  for (const ScalarTest& t : {g, bump_test_function(0.3, 0.9, 2.0), bump_test_function(0.05, 0.4, 0.5)}) {
    const BoundCheck b = ipp_bound_check(model, t, m);
    CHECK(b.pass);
    CHECK(b.epsilon > 0.0);
  }
}

TEST_CASE("two-particle integration by parts") {
  const ModelSpec model = testing::sigmoid_neuron(2);
  const EmpiricalMeasure& m = sigmoid_sample(2);
  const ScalarTest g = bump_test_function(0.45, 0.85);
  const RegionSpec region{0.1, 0, 0.2};
  const IdentityCheck c = ipp_check(model, constant(1.0), g, region, m, coarse());
  CHECK(c.se > 0.0);
  CHECK(c.pass);
}
