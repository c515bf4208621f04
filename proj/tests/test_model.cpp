#include "doctest.h"

#include "pdmp/model.hpp"
#include "pdmp/model_io.hpp"
#include "support.hpp"

using namespace pdmp;

TEST_CASE("neuron jump resets the spiking neuron and adds weights") {
  NeuronParams p = testing::neuron_params(2, 1.0, 1.0, 0.0, RateFunction::constant(1.0));
  p.weights(0, 1) = 0.2;
  const ModelSpec m = build_neuron_model(p);
  const State y = jump(m, 0, State{{0.5, 0.3}});
  CHECK(y[0] == 0.0);
  CHECK(y[1] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(m.house_of_cards());
  CHECK(m.non_interacting());
}

TEST_CASE("neuron jump Jacobian is the identity with a zero at the spiking neuron") {
  const ModelSpec m = testing::neuron(4);
  const State x{{0.1, -2.0, 3.0, 0.7}};
  for (int i = 0; i < 4; ++i) {
    Matrix expected = Matrix::Identity(4, 4);
    expected(i, i) = 0.0;
    CHECK((jump_jacobian(m, i, x) - expected).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((m.drift(x) - (-(x.array() - 1.0)).matrix()).norm() < 1e-15);
}

TEST_CASE("total rate sums the declared rate functions") {
  auto f = RateFunction::custom([](double v) { return std::min(5.0, 1.0 + v * v); }, 5.0, 1.0);
  const ModelSpec m = build_neuron_model(testing::neuron_params(2, 1.0, 1.0, 0.1, f));
  CHECK(total_rate(m, State{{1.0, 2.0}}) == 7.0);

  const ModelSpec c = testing::neuron(3, 0.1, 0.4);
  CHECK(total_rate(c, State{{3.0, -1.0, 0.2}}) == doctest::Approx(1.2).epsilon(1e-15));

  NeuronParams p = testing::neuron_params(2, 1.0, 1.0, 0.1, RateFunction::constant(2.0));
  p.rates[0] = RateFunction::constant(0.0, 2.0);
  CHECK(total_rate(build_neuron_model(p), State{{0.0, 0.0}}) == 2.0);
}

TEST_CASE("rate families respect floor and bound") {
  const auto s = RateFunction::sigmoid(0.5, 2.0, 4.0, 0.5);
  CHECK(s(0.5) == doctest::Approx(1.25));
  CHECK(s(-100.0) >= 0.5);
  CHECK(s(100.0) <= 2.0);
  const auto a = RateFunction::affine_clipped(0.5, 1.0, 0.2, 1.2);
  CHECK(a(-10.0) == 0.2);
  CHECK(a(0.3) == doctest::Approx(0.8));
  CHECK(a(10.0) == 1.2);
  CHECK_THROWS_AS(RateFunction::constant(2.0, 1.0), InvariantError);
  CHECK_THROWS_AS(RateFunction::sigmoid(1.0, 0.5, 1.0, 0.0), InvariantError);
}

TEST_CASE("rate above the declared bound is an error, not a clip") {
  auto f = RateFunction::custom([](double v) { return v * v; }, 4.0, 0.0);
  CHECK_THROWS_AS(build_neuron_model(testing::neuron_params(1, 1.0, 1.0, 0.0, f)),
                  InvariantError);

  ModelParts parts;
  parts.dimension = 1;
  parts.rate_bound = 4.0;
  parts.drift = [](const State& x) { return State(-x); };
  parts.jump_maps = {[](const State& x) { return State(0.0 * x); }};
  parts.rates = {[](const State& x) { return x[0] * x[0]; }};
  const ModelSpec m(std::move(parts));
  CHECK(m.rate(0, State{{1.5}}) == 2.25);
  CHECK_THROWS_AS(m.rate(0, State{{3.0}}), InvariantError);
}

TEST_CASE("neuron parameters are validated") {
  auto bad = testing::neuron_params(2, 1.0, 1.0, 0.1, RateFunction::constant(1.0));
  bad.lambda = 0.0;
  CHECK_THROWS_AS(build_neuron_model(bad), InvariantError);
  bad = testing::neuron_params(2, 1.0, -1.0, 0.1, RateFunction::constant(1.0));
  CHECK_THROWS_AS(build_neuron_model(bad), InvariantError);
  bad = testing::neuron_params(2, 1.0, 1.0, 0.1, RateFunction::constant(1.0));
  bad.weights(0, 1) = -0.1;
  CHECK_THROWS_AS(build_neuron_model(bad), InvariantError);
  CHECK_THROWS_AS(jump(testing::neuron(2), 2, State::Zero(2)), InvariantError);
}

TEST_CASE("sampled model check on neuron and nonlinear models") {
  for (const ModelSpec& m : {testing::neuron(3), testing::nonlinear(3)}) {
    const ModelCheck c = check_model(m);
    CHECK(c.ok);
    CHECK(c.max_reset_value == 0.0);
    CHECK(c.max_jacobian_error < 1e-4);
  }
}

TEST_CASE("model file round trip") {
  const auto j = nlohmann::json::parse(R"({"type":"neuron","N":2,"lambda":1.5,"v_star":2,
      "weights":[[0,0.2],[0.1,0]],
      "rates":[{"kind":"constant","value":1},
               {"kind":"sigmoid","floor":0.5,"bound":2,"slope":4,"center":0.5}]})");
  const NeuronParams p = neuron_params_from_json(j);
  CHECK(p.N == 2);
  CHECK(p.weights(1, 0) == 0.1);
  CHECK(p.rates[1].kind() == RateFunction::Kind::sigmoid);
  const NeuronParams q = neuron_params_from_json(neuron_params_to_json(p));
  CHECK(neuron_params_to_json(q) == neuron_params_to_json(p));
  CHECK_THROWS_AS(neuron_params_from_json(nlohmann::json::parse(R"({"N":2})")), ConfigError);
  CHECK_THROWS_AS(model_from_json(nlohmann::json::parse(
                      R"({"N":1,"lambda":1,"v_star":1,"weights":0,"rates":{"kind":"cubic"}})")),
                  ConfigError);
}
