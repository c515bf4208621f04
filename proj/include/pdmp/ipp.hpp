#pragma once

// One level of the integration by parts identity for the first particle of
// a non-interacting model:
//   π_H(g'') = π_{G(H)}(g') - Σ_{i>=2} π_{G_i(H)}([g∘Δ_i^1]'),
// with π_H(φ) = Σ_l E_m[ f_l(x) ∫ e(Δ_l x, t) H(γ_t Δ_l x) φ(γ̃_t(Δ_l^1 x^1)) dt ].

#include <functional>

#include "pdmp/density.hpp"

namespace pdmp {

/// Smooth scalar g with its first two derivatives and a declared support.
struct ScalarTest {
  std::function<double(double)> g, d1, d2;
  double lo = 0.0;
  double hi = 0.0;
  double sup_abs = 0.0;  ///< ||g||_inf
};

/// Smooth bump (exp(-1/(1-u^2)) on (lo, hi)) with analytic derivatives.
ScalarTest bump_test_function(double lo, double hi, double amplitude = 1.0);

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double residual = 0.0;  ///< lhs - rhs
  double se = 0.0;        ///< combined standard error
  bool pass = false;
};

/// Verdict: |residual| <= 3 se + quadrature allowance
/// (1e-8 (|lhs| + |rhs|), covering the deterministic time quadrature).
IdentityCheck ipp_check(const ModelSpec& model, const TestFunction& H, const ScalarTest& g,
                        const RegionSpec& region, const EmpiricalMeasure& m,
                        const IntegratorConfig& cfg, unsigned workers = 1);

struct BoundCheck {
  double m_gprime = 0.0;  ///< m̂(g')
  double se = 0.0;
  double epsilon = 0.0;   ///< inf |b̃| on the support of g
  double C = 0.0;         ///< sup (f + |b̃'|) / epsilon on the support
  double bound = 0.0;     ///< 2 C ||g||_inf
  bool pass = false;
};

/// The one-dimensional bound |m(g')| <= 2 C(ε) ||g||_inf.
BoundCheck ipp_bound_check(const ModelSpec& model, const ScalarTest& g, const EmpiricalMeasure& m);

}  // namespace pdmp
