#pragma once

// Skeletons of prescribed jump schedules, the derivation matrix σ of the
// endpoint with respect to the jump times, and goodness certificates.
//
// A schedule has jump indices i_0..i_n and times t_1..t_{n+1}:
//   x_0 = Δ_{i_0}(y),  y_k = γ_{t_k}(x_{k-1}),  x_k = Δ_{i_k}(y_k),
//   η = γ_{t_{n+1}}(x_n).
// Column k of σ (k = 1..n+1) is ∂η/∂t_k. Indices are 0-based in the API.

#include <cstdint>
#include <vector>

#include "pdmp/flow.hpp"

namespace pdmp {

struct JumpSchedule {
  std::vector<double> times;  ///< t_1..t_{n+1}
  std::vector<int> indices;   ///< i_0..i_n

  std::size_t n() const noexcept { return indices.empty() ? 0 : indices.size() - 1; }
  /// s_k = t_1 + ... + t_k (s_0 = 0).
  double cumulative(std::size_t k) const;
  void validate(int dimension) const;
};

struct SkeletonTrace {
  State start;              ///< y
  std::vector<State> post;  ///< x_0..x_n
  std::vector<State> pre;   ///< y_1..y_n
  State endpoint;           ///< η
};

SkeletonTrace skeleton(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                       const IntegratorConfig& cfg);

/// Order in which the products of Y and A matrices are formed.
enum class ProductOrder {
  backward_sweep,  ///< one right-to-left matrix sweep, prefixes reused
  per_column,      ///< each column pushed forward on its own (matrix-vector)
};

struct DerivationMatrix {
  Matrix sigma;                   ///< N x (n+1)
  Matrix gram;                    ///< σ σ^T
  double det_gram = 0.0;          ///< by LU on the gram matrix
  Eigen::VectorXd singular_values;
  double min_singular_value = 0;  ///< 0 when σ has fewer than N columns

  /// V_1..V_{n+1}: V_j is column n+2-j of σ.
  std::vector<State> fields() const;
};

DerivationMatrix derivation_matrix(const ModelSpec& model, const State& y,
                                   const JumpSchedule& sched, const IntegratorConfig& cfg,
                                   ProductOrder order = ProductOrder::backward_sweep);

/// Central differences of η in each t_k (forward differences where t_k = 0).
Matrix derivation_matrix_fd(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                            const IntegratorConfig& cfg, double step = 1e-5);

/// Analysis of an arbitrary N x m matrix (gram, determinant, SVD).
DerivationMatrix analyze(Matrix sigma);

/// V_1..V_{n+1} with every time set to zero.
std::vector<State> zero_time_fields(const ModelSpec& model, const State& y,
                                    const std::vector<int>& indices);

/// Closed-form det σ of the neuron model for the schedule i_k = k
/// (k = 0..N-1, N times):  λ^N (v*)^N ∏_{k=1}^N e^{-λ (s_N - s_{k-1})}.
double neuron_determinant(const JumpSchedule& sched, double lambda, double v_star);

struct Goodness {
  bool good = false;
  double min_singular_value = 0.0;
  double det_gram = 0.0;
  double threshold = 0.0;
};

/// good iff the smallest singular value of σ exceeds the threshold
/// (default 1e-8 ||σ||_2).
Goodness is_good(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                 const IntegratorConfig& cfg, std::optional<double> threshold = {});

struct SweepRow {
  State y;
  double min_singular_value = 0.0;
  double threshold = 0.0;
  bool good = false;
};

struct SweepReport {
  std::vector<int> indices;
  std::vector<SweepRow> rows;  ///< box corners first, then random draws
  std::size_t worst = 0;       ///< row with the smallest min singular value
  bool good = false;           ///< every row good
};

struct BoxSpec {
  double lo = -5.0;
  double hi = 5.0;
  std::size_t draws = 1000;
  std::uint64_t seed = 0;
  bool corners = true;
};

/// Goodness of one schedule at sampled starts y in a box. A non-refutation
/// certificate for the "for all y" claim, not a proof.
SweepReport sweep_box(const ModelSpec& model, const JumpSchedule& sched, const BoxSpec& box,
                      const IntegratorConfig& cfg, std::optional<double> threshold = {},
                      unsigned workers = 1);

/// All index sequences of the given length over `alphabet` (default 0..N-1).
/// Refuses N > 6.
std::vector<std::vector<int>> enumerate_index_sequences(int dimension, std::size_t length,
                                                        const std::vector<int>& alphabet = {});

}  // namespace pdmp
