#pragma once

// Deterministic flow between jumps: fixed-step RK4 (or the model's closed
// form), variational matrices, survival function and the scalar-flow tools of
// the non-interacting case.
//
// Time grid convention: a flow started at time 0 visits the nodes k*h; the
// state at an arbitrary t is one partial RK4 step from the last node <= t.
// Every routine below (flow, survival, thinning candidates, quadratures) uses
// this same grid, so they agree with each other to rounding.

#include <cmath>
#include <utility>
#include <vector>

#include "pdmp/model.hpp"

namespace pdmp {

struct IntegratorConfig {
  double step = 1e-3;        ///< RK4 step h
  double max_time = 1e3;     ///< cap for open-ended integrals and waiting times
  double trunc_eps = 1e-8;   ///< open integrals stop once survival < trunc_eps
  bool use_closed_form = true;  ///< use the model's exact flow when available

  void validate() const;
};

struct FlowResult {
  State end_state;
  double integrated_rate = 0.0;  ///< Λ(t) = ∫_0^t f̄(γ_s(x)) ds, trapezoid
  std::vector<std::pair<double, State>> path;  ///< grid nodes, when requested
};

struct Variational {
  State end_state;
  Matrix Y;  ///< Jacobian of the flow in its initial condition
  Matrix Z;  ///< its inverse, integrated jointly
};

struct Truncation {
  double time = 0.0;     ///< T_max: first grid node with survival < trunc_eps
  bool capped = false;   ///< true when max_time was reached first
};

/// Walks the flow grid from a start state, optionally accumulating Λ.
class FlowCursor {
 public:
  FlowCursor(const ModelSpec& model, State start, const IntegratorConfig& cfg,
             bool track_rate = false);

  double node_time() const noexcept { return static_cast<double>(index_) * step_; }
  double next_node_time() const noexcept { return static_cast<double>(index_ + 1) * step_; }
  const State& node_state() const noexcept { return node_; }
  /// f̄ at the current node (track_rate only).
  double node_rate() const noexcept { return node_rate_; }
  /// Λ at the current node (track_rate only).
  double node_integrated_rate() const noexcept { return integrated_; }
  double step() const noexcept { return step_; }

  /// Moves to the next grid node.
  void advance();
  /// State at time t >= node_time(); advances through earlier nodes.
  State state_at(double t);
  /// Λ(t) for t >= node_time(), trapezoid on the last partial interval.
  double integrated_rate_at(double t, const State& state_t) const;

 private:
  const ModelSpec* model_;
  State origin_;
  State node_;
  long long index_ = 0;
  double step_;
  bool exact_;
  bool track_rate_;
  double node_rate_ = 0.0;
  double integrated_ = 0.0;
};

/// γ_t(x).
State flow(const ModelSpec& model, const State& x, double t, const IntegratorConfig& cfg);

/// γ_t(x) together with Λ(t) and optionally the visited grid.
FlowResult flow_with_rate(const ModelSpec& model, const State& x, double t,
                          const IntegratorConfig& cfg, bool record_path = false);

/// (Y_t, Z_t) from Y' = ḃ(γ)Y, Z' = -Z ḃ(γ), Y_0 = Z_0 = Id, integrated with
/// the flow in one RK4 system.
Variational variational(const ModelSpec& model, const State& x, double t,
                        const IntegratorConfig& cfg);

/// e(x, t) = exp(-Λ(t)).
double survival(const ModelSpec& model, const State& x, double t, const IntegratorConfig& cfg);

/// First grid time at which survival drops below cfg.trunc_eps, capped by max_time.
Truncation truncation_time(const ModelSpec& model, const State& x, const IntegratorConfig& cfg);

/// Trapezoid quadrature of ∫_0^{T_max} e(y, t) φ(t, γ_t(y)) dt. The visitor is
/// called once per grid node as visit(t, state, survival, weight); the caller
/// accumulates weight * survival * φ.
template <typename Visitor>
Truncation integrate_until_truncation(const ModelSpec& model, const State& y,
                                      const IntegratorConfig& cfg, Visitor&& visit) {
  FlowCursor cursor(model, y, cfg, true);
  const double target = -std::log(cfg.trunc_eps);
  const double h = cfg.step;
  visit(0.0, cursor.node_state(), 1.0, 0.5 * h);
  for (;;) {
    cursor.advance();
    const double t = cursor.node_time();
    const double lam = cursor.node_integrated_rate();
    const bool done = lam >= target;
    const bool capped = !done && t >= cfg.max_time;
    visit(t, cursor.node_state(), std::exp(-lam), (done || capped) ? 0.5 * h : h);
    if (done || capped) return {t, capped};
  }
}

// --- single-particle flow of the non-interacting case ----------------------

/// γ̃_t(v).
double scalar_flow(const NonInteractingSpec& spec, double v, double t, const IntegratorConfig& cfg);

/// (γ̃_t(v), z_t(v)) with z' = -b̃'(γ̃) z, z_0 = 1.
std::pair<double, double> scalar_flow_with_inverse_sensitivity(const NonInteractingSpec& spec,
                                                              double v, double t,
                                                              const IntegratorConfig& cfg);

/// κ(y): the time at which the flow started at 0 reaches y. Bisection on a
/// geometrically grown bracket (closed form for the neuron preset). Throws
/// DomainError when 0 is an equilibrium or y is not on the forward orbit of 0.
double kappa(const NonInteractingSpec& spec, double y, const IntegratorConfig& cfg);

/// lim γ̃_t(0): the closed-form limit, or the value once |b̃| has vanished
/// numerically (or max_time is reached).
double flow_limit_from_zero(const NonInteractingSpec& spec, const IntegratorConfig& cfg);

/// Whether y lies on the forward orbit of 0 (between 0 and the flow limit).
bool reachable_from_zero(const NonInteractingSpec& spec, double y, double limit);

/// min over the grid on [0, T] of |b̃(γ̃_t(v))|.
double equilibrium_avoidance(const NonInteractingSpec& spec, double v, double T,
                             const IntegratorConfig& cfg);

}  // namespace pdmp
