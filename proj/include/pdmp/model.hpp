#pragma once

// PDMP model descriptions: drift, jump maps, jump Jacobians and bounded jump
// rates, plus the "no interactions in the flow" structure and the
// interacting-neuron preset.
//
// Particle indices are 0-based throughout the C++ API. File formats written by
// the command line tool use 1-based indices.

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/types.hpp"

namespace pdmp {

using VectorField = std::function<State(const State&)>;
using MatrixField = std::function<Matrix(const State&)>;
using ScalarField = std::function<double(const State&)>;
using ScalarMap = std::function<double(double)>;

/// Scalar jump-rate function v -> f(v) with declared bound and floor.
class RateFunction {
 public:
  enum class Kind { constant, sigmoid, affine_clipped, custom };

  /// f(v) = value. The declared bound defaults to the value itself.
  static RateFunction constant(double value, std::optional<double> bound = {});
  /// f(v) = floor + (bound - floor) / (1 + exp(-slope (v - center))).
  static RateFunction sigmoid(double floor, double bound, double slope, double center);
  /// f(v) = clamp(intercept + slope v, floor, bound).
  static RateFunction affine_clipped(double intercept, double slope, double floor,
                                     double bound);
  static RateFunction custom(ScalarMap fn, double bound, double floor);

  double operator()(double v) const { return fn_(v); }
  Kind kind() const noexcept { return kind_; }
  double bound() const noexcept { return bound_; }
  double floor() const noexcept { return floor_; }
  /// Parameters in declaration order (value | floor,bound,slope,center | ...).
  const std::vector<double>& parameters() const noexcept { return params_; }
  bool is_constant() const noexcept { return kind_ == Kind::constant; }

 private:
  RateFunction(Kind kind, ScalarMap fn, double bound, double floor,
               std::vector<double> params);

  Kind kind_;
  ScalarMap fn_;
  double bound_;
  double floor_;
  std::vector<double> params_;
};

/// Closed-form single-particle flow objects, available for the neuron preset.
struct ScalarClosedForm {
  std::function<double(double, double)> flow;         ///< (v, t) -> flow at t
  std::function<double(double, double)> drift_along;  ///< (v, t) -> drift(flow(v, t))
  std::function<double(double, double)> inverse_sensitivity;  ///< (v, t) -> z_t(v)
  std::function<double(double)> kappa;  ///< hitting time of y along the flow from 0
  /// (i, j, t, y) -> v such that flow(v + a_i^j(v), t) = y.
  std::function<double(int, int, double, double)> jump_flow_inverse;
  double limit_from_zero = 0.0;  ///< lim_{t->inf} flow(0, t)
};

/// Shift a_i^j(v) applied to particle j when particle i jumps, with derivative.
struct PairShift {
  ScalarMap value;
  ScalarMap derivative;
};

/// Particles that only interact through jumps: drift acts coordinatewise,
/// jumps reset the jumping particle to 0 and shift the others by a_i^j(v^j),
/// rates depend on the particle's own position only.
struct NonInteractingSpec {
  int dimension = 0;
  ScalarMap drift;
  ScalarMap drift_derivative;
  std::vector<std::vector<PairShift>> shifts;  ///< shifts[i][j], diagonal unused
  std::vector<RateFunction> rates;
  double a = 1.0;  ///< lower bound on |d(v + a_i^j(v))/dv|
  double A = 0.0;  ///< bound on the shifts and their derivatives
  double B = 1.0;  ///< bound on the drift derivative
  std::optional<ScalarClosedForm> closed_form;

  double jump(int i, int j, double v) const { return v + shifts[i][j].value(v); }
  double jump_derivative(int i, int j, double v) const {
    return 1.0 + shifts[i][j].derivative(v);
  }
  double rate_floor() const;
  double rate_bound() const;
  /// Checks a > 0, |1 + a'| >= a and |a|, |a'| <= A on sampled points of [-10, 10]
  /// and the supplied derivatives against central differences.
  void validate() const;
};

struct NeuronParams {
  int N = 1;
  double lambda = 1.0;
  double v_star = 1.0;
  Matrix weights;  ///< weights(i, j) = W_{i->j}; diagonal ignored
  std::vector<RateFunction> rates;
};

/// Optional closed-form vector flow and its sensitivity matrices.
struct ExactFlow {
  std::function<State(const State&, double)> flow;
  std::function<Matrix(const State&, double)> sensitivity;          ///< Y_t(x)
  std::function<Matrix(const State&, double)> inverse_sensitivity;  ///< Z_t(x)
};

/// Raw ingredients for a ModelSpec. Optional Jacobians left empty fall back to
/// central finite differences.
struct ModelParts {
  std::string name = "custom";
  int dimension = 0;
  VectorField drift;
  MatrixField drift_jacobian;
  std::vector<VectorField> jump_maps;
  std::vector<MatrixField> jump_jacobians;
  std::vector<ScalarField> rates;
  double rate_bound = 0.0;
  bool house_of_cards = false;
  std::shared_ptr<const NonInteractingSpec> structure;
  std::shared_ptr<const NeuronParams> neuron;
  std::optional<ExactFlow> exact_flow;
};

/// Immutable PDMP description. Safe to share between threads.
class ModelSpec {
 public:
  explicit ModelSpec(ModelParts parts);

  const std::string& name() const noexcept { return parts_.name; }
  int dimension() const noexcept { return parts_.dimension; }
  double rate_bound() const noexcept { return parts_.rate_bound; }
  bool house_of_cards() const noexcept { return parts_.house_of_cards; }
  bool non_interacting() const noexcept { return parts_.structure != nullptr; }

  State drift(const State& x) const;
  /// Supplied Jacobian, or central differences with step 1e-6 max(1, |x^l|).
  Matrix drift_jacobian(const State& x) const;
  /// f_i(x). Throws InvariantError if the value leaves [0, rate_bound].
  double rate(int i, const State& x) const;
  /// All N rates at once, with the same checks as rate().
  void rates(const State& x, Eigen::Ref<Eigen::VectorXd> out) const;

  const ModelParts& parts() const noexcept { return parts_; }
  const NonInteractingSpec* structure() const noexcept { return parts_.structure.get(); }
  const NeuronParams* neuron() const noexcept { return parts_.neuron.get(); }
  const std::optional<ExactFlow>& exact_flow() const noexcept { return parts_.exact_flow; }

  void check_index(int i) const;

 private:
  ModelParts parts_;
};

/// f̄(x) = sum_i f_i(x).
double total_rate(const ModelSpec& model, const State& x);
/// Post-jump configuration Δ_i(x).
State jump(const ModelSpec& model, int i, const State& x);
/// Jacobian A^i(x) of Δ_i.
Matrix jump_jacobian(const ModelSpec& model, int i, const State& x);

/// Builds the interacting-neuron model: drift -λ(x^i - v*), jumps reset the
/// spiking neuron to 0 and add W_{i->j} to the others.
ModelSpec build_neuron_model(const NeuronParams& params);

/// Single-particle structure of the neuron model (a = 1, A = max W, B = λ).
NonInteractingSpec neuron_structure(const NeuronParams& params);

/// Assembles a full ModelSpec from a non-interacting description.
ModelSpec build_non_interacting_model(std::shared_ptr<const NonInteractingSpec> spec,
                                      std::string name = "non_interacting");

/// Result of a sampled invariant check on a model.
struct ModelCheck {
  double max_jacobian_error = 0.0;  ///< max ||A^i - FD Jacobian||_inf
  double max_reset_value = 0.0;     ///< max |Δ_i(x)^i| (house-of-cards)
  double max_rate_excess = 0.0;     ///< max (f̄ - N rate_bound)
  bool ok = true;
};

/// Samples `count` states uniformly in [lo, hi]^N (fixed seed) and checks the
/// house-of-cards reset, the rate bound and A^i against central differences
/// with step `fd_step`.
ModelCheck check_model(const ModelSpec& model, int count = 1000, double lo = -10.0,
                       double hi = 10.0, double fd_step = 1e-5,
                       double jacobian_tol = 1e-4);

}  // namespace pdmp
