#pragma once

// Models shared by the unit tests and the acceptance binary.

#include <cmath>

#include "pdmp/model.hpp"

namespace pdmp::testing {

inline NeuronParams neuron_params(int n, double lambda, double v_star, double weight,
                                  const RateFunction& rate) {
  NeuronParams p;
  p.N = n;
  p.lambda = lambda;
  p.v_star = v_star;
  p.weights = Matrix::Constant(n, n, weight);
  p.weights.diagonal().setZero();
  p.rates.assign(n, rate);
  return p;
}

inline ModelSpec neuron(int n, double weight = 0.2, double rate = 1.0) {
  return build_neuron_model(neuron_params(n, 1.0, 1.0, weight, RateFunction::constant(rate)));
}

// Neuron with sigmoid rates between 0.5 and 2.
inline ModelSpec sigmoid_neuron(int n, double weight = 0.2) {
  return build_neuron_model(
      neuron_params(n, 1.0, 1.0, weight, RateFunction::sigmoid(0.5, 2.0, 4.0, 0.5)));
}

// Interacting nonlinear drift with house-of-cards jumps and nonlinear shifts:
//   b^l(x) = -x^l + 0.5 sin(x^{l+1}) + 0.3
//   Δ_i(x)^j = x^j + 0.2 + 0.1 sin(x^j), Δ_i(x)^i = 0
//   f_i(x) = 0.5 + 0.5 / (1 + (x^i)^2)
inline ModelSpec nonlinear(int n) {
  ModelParts parts;
  parts.name = "nonlinear";
  parts.dimension = n;
  parts.house_of_cards = true;
  parts.rate_bound = 1.0;
  parts.drift = [n](const State& x) {
    State v(n);
    for (int l = 0; l < n; ++l) v[l] = -x[l] + 0.5 * std::sin(x[(l + 1) % n]) + 0.3;
    return v;
  };
  parts.drift_jacobian = [n](const State& x) {
    Matrix m = -Matrix::Identity(n, n);
    for (int l = 0; l < n; ++l) m(l, (l + 1) % n) += 0.5 * std::cos(x[(l + 1) % n]);
    return m;
  };
  for (int i = 0; i < n; ++i) {
    parts.jump_maps.push_back([n, i](const State& x) {
      State y(n);
      for (int j = 0; j < n; ++j) y[j] = j == i ? 0.0 : x[j] + 0.2 + 0.1 * std::sin(x[j]);
      return y;
    });
    parts.jump_jacobians.push_back([n, i](const State& x) {
      Matrix m = Matrix::Zero(n, n);
      for (int j = 0; j < n; ++j)
        if (j != i) m(j, j) = 1.0 + 0.1 * std::cos(x[j]);
      return m;
    });
    parts.rates.push_back([i](const State& x) { return 0.5 + 0.5 / (1.0 + x[i] * x[i]); });
  }
  return ModelSpec(std::move(parts));
}

}  // namespace pdmp::testing
