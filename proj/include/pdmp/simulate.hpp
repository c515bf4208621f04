#pragma once

// Trajectory simulation by thinning, path records and the long-run
// estimators built on them (time averages, jump-chain averages, jump rate,
// generator residuals).

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/flow.hpp"
#include "pdmp/numerics.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

struct JumpEvent {
  double tau = 0.0;  ///< waiting time from the start state
  int index = 0;     ///< jumping particle (0-based)
  State pre_state;   ///< γ_τ(x)
};

/// First jump from x by thinning against the constant proposal rate
/// N * rate_bound. A candidate at s is accepted when u * N * rate_bound <
/// f̄(γ_s(x)); the same u picks the index from the cumulative rates.
/// Throws TimeoutError when nothing is accepted before cfg.max_time.
JumpEvent next_jump(const ModelSpec& model, const State& x, Rng& rng, const IntegratorConfig& cfg);

/// Cross-check sampler: solves Λ(τ) = -log U on the flow grid, then draws
/// the index with probability f_i / f̄ at γ_τ(x).
JumpEvent next_jump_inversion(const ModelSpec& model, const State& x, Rng& rng,
                              const IntegratorConfig& cfg);

/// The path stops at the horizon or after max_jumps jumps, whichever comes
/// first. With only max_jumps set the path ends at the last jump.
struct StopRule {
  std::optional<double> horizon;
  std::optional<std::size_t> max_jumps;
};

struct PathRecord {
  RngSpec rng;
  State initial;
  std::vector<double> times;    ///< T_k, strictly increasing
  std::vector<int> indices;     ///< I_k
  std::vector<State> pre;       ///< Z_k = X_{T_k-}
  std::vector<State> post;      ///< X_{T_k} = Δ_{I_k}(Z_k)
  double final_time = 0.0;
  State final_state;

  std::size_t jumps() const noexcept { return times.size(); }
  /// Start time and start state of the segment that follows jump k
  /// (k = 0 is the segment started at X_0).
  double segment_start(std::size_t k) const { return k == 0 ? 0.0 : times[k - 1]; }
  const State& segment_state(std::size_t k) const { return k == 0 ? initial : post[k - 1]; }
  double segment_end(std::size_t k) const { return k < times.size() ? times[k] : final_time; }
};

PathRecord simulate_path(const ModelSpec& model, const State& x0, const StopRule& stop,
                         const RngSpec& rng_spec, const IntegratorConfig& cfg);

/// X at absolute time t along a recorded path.
State state_at(const ModelSpec& model, const PathRecord& path, double t, const IntegratorConfig& cfg);

struct PathCheck {
  double max_reflow_error = 0.0;  ///< max |Z_{k+1} - γ(X_{T_k})| on re-integration
  bool post_states_exact = true;  ///< X_{T_k} == Δ_{I_k}(Z_k) bit for bit
  bool resets_exact = true;       ///< house-of-cards resets are exactly 0
  bool times_increasing = true;
};

PathCheck check_path(const ModelSpec& model, const PathRecord& path, const IntegratorConfig& cfg);

// ---------------------------------------------------------------------------

/// A scalar observable with an optional analytic gradient.
struct TestFunction {
  std::string name;
  std::function<double(const State&)> value;
  std::function<State(const State&)> gradient;  ///< empty: central differences
};

/// The fixed bounded smooth suite: 1, x¹, sin x¹, exp(-|x|²) and the clipped
/// product clamp(x¹ x², -25, 25) (x¹ x¹ when N = 1).
std::vector<TestFunction> test_function_suite(int dimension);

/// Lg(x) = Σ_i f_i(x) [g(Δ_i x) - g(x)] + <∇g(x), b(x)>.
double apply_generator(const ModelSpec& model, const TestFunction& g, const State& x);

/// Lg as a test function of its own.
TestFunction generator_of(const ModelSpec& model, const TestFunction& g);

/// f̄ g.
TestFunction times_total_rate(const ModelSpec& model, const TestFunction& g);

struct EstimatorConfig {
  double burn_in_fraction = 0.1;  ///< fraction of jumps discarded at the start
  std::size_t batches = 30;
};

/// Per-batch time integrals along one path after burn-in. Batches are
/// contiguous groups of inter-jump segments, so every batch is a union of
/// whole segments. integrals[b][l] = ∫ g_l(X_s) ds over batch b.
struct BatchIntegrals {
  std::vector<std::vector<double>> integrals;
  std::vector<double> durations;
  std::vector<double> jump_counts;                 ///< jumps ending in batch b
  std::vector<std::vector<double>> chain_sums;     ///< Σ g_l(Z_k) over those jumps
  double burn_in_time = 0.0;
  std::size_t burn_in_jumps = 0;

  /// m̂(g_l) = Σ_b ∫g_l / Σ_b duration; SE from the batch ratios.
  numerics::MeanSe time_average(std::size_t l) const;
  /// m̂(g_num) / m̂(g_den); SE from the batch ratios.
  numerics::MeanSe time_ratio(std::size_t num, std::size_t den) const;
  /// Mean of g_l(Z_k) over the jump chain after burn-in.
  numerics::MeanSe chain_average(std::size_t l) const;
  /// N_T / T after burn-in.
  numerics::MeanSe jump_rate() const;
};

/// One pass over the path: trapezoid quadrature on the flow grid along every
/// segment for all functions at once.
BatchIntegrals integrate_path(const ModelSpec& model, const PathRecord& path,
                              const std::vector<TestFunction>& functions,
                              const IntegratorConfig& cfg, const EstimatorConfig& est = {});

numerics::MeanSe ergodic_average(const ModelSpec& model, const PathRecord& path,
                                 const TestFunction& g, const IntegratorConfig& cfg,
                                 const EstimatorConfig& est = {});

numerics::MeanSe jump_chain_average(const PathRecord& path, const TestFunction& g,
                                    const EstimatorConfig& est = {});

numerics::MeanSe jump_rate(const PathRecord& path, const EstimatorConfig& est = {});

}  // namespace pdmp
