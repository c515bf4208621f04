#pragma once

// One-jump density propagation in the non-interacting case: if Z_n has
// density ν with ν / f̄ = ∏ r(x^j), the next pre-jump state has density
// Σ_i q_i, assembled here by the change of variables
//   y^j = γ̃_t(Δ_i^j(x^j)) (j != i),  y^i = γ̃_t(0).

#include <functional>
#include <vector>

#include "pdmp/flow.hpp"

namespace pdmp {

/// Scalar density r with compact support [lo, hi], times a scale factor.
struct CompactDensity {
  std::function<double(double)> shape;
  double lo = 0.0;
  double hi = 1.0;
  double scale = 1.0;

  double operator()(double v) const { return v <= lo || v >= hi ? 0.0 : scale * shape(v); }
};

/// exp(-1 / (1 - u^2)) with u mapped from (lo, hi) to (-1, 1).
CompactDensity smooth_bump(double lo, double hi);

/// C(f_i, r) = ∫ r f_i, adaptive Simpson on the support to 1e-10.
double rate_mass(const NonInteractingSpec& spec, const CompactDensity& r, int i);

/// Rescales r so that ν = f̄ ∏ r(x^j) is a probability density.
CompactDensity normalize_product_input(const NonInteractingSpec& spec, CompactDensity r);

class CoareaPropagator {
 public:
  CoareaPropagator(const NonInteractingSpec& spec, CompactDensity r, IntegratorConfig cfg);

  /// q_i(y). Zero when y^i lies behind 0 on the flow; DomainError (with the
  /// flow limit as boundary) when y^i is at or past the flow limit.
  double q(int i, const State& y) const;
  double total(const State& y) const;

  double flow_limit() const noexcept { return limit_; }
  double rate_mass(int i) const { return mass_.at(static_cast<std::size_t>(i)); }
  const CompactDensity& input() const noexcept { return r_; }

  /// β^{-1}_{i→j,t}(y): the pre-jump coordinate that the jump of i and a
  /// flow of length t carry to y.
  double beta_inverse(int i, int j, double t, double y) const;

 private:
  const NonInteractingSpec* spec_;
  CompactDensity r_;
  IntegratorConfig cfg_;
  double limit_;
  std::vector<double> mass_;
};

/// Convenience wrapper building a propagator for one evaluation.
double coarea_propagate(const NonInteractingSpec& spec, const CompactDensity& r, int i,
                        const State& y, const IntegratorConfig& cfg);

/// Closed form for the neuron model with constant rates f and equal weights a:
///   q_i(y) = C N f / λ (v*)^{N-1-Nf/λ} ∏_{j≠i} r(v*(y^j - y^i)/(v* - y^i) - a)
///            (v* - y^i)^{Nf/λ - N} 1_{0 <= y^i < v*}.
double neuron_q_closed_form(int N, double lambda, double v_star, double f, double a,
                            const CompactDensity& r, int i, const State& y);

struct TabulatedPoint {
  State y;
  double q_total = 0.0;
  std::vector<double> q;  ///< per jump index
};

/// Σ_i q_i on a tensor grid of `per_axis` points per coordinate over
/// [lo_l, hi_l]. Points whose coordinates reach the flow limit are skipped.
std::vector<TabulatedPoint> tabulate(const CoareaPropagator& prop, const std::vector<double>& lo,
                                     const std::vector<double>& hi, std::size_t per_axis,
                                     unsigned workers = 1);

/// Midpoint tensor quadrature of Σ_i q_i over a box.
double integrate_total(const CoareaPropagator& prop, const std::vector<double>& lo,
                       const std::vector<double>& hi, std::size_t per_axis, unsigned workers = 1);

}  // namespace pdmp
