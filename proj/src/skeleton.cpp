#include "pdmp/skeleton.hpp"

#include <algorithm>
#include <cmath>

#include "pdmp/parallel.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "skeleton";

}  // namespace

double JumpSchedule::cumulative(std::size_t k) const {
  double s = 0.0;
  for (std::size_t l = 0; l < k; ++l) s += times.at(l);
  return s;
}

void JumpSchedule::validate(int dimension) const {
  if (indices.empty()) throw InvariantError(kModule, "schedule needs at least one jump index");
  if (times.size() != indices.size())
    throw InvariantError(kModule, "schedule needs n+1 times for n+1 indices");
  for (double t : times)
    if (!(t >= 0.0) || !std::isfinite(t)) throw InvariantError(kModule, "schedule times must be >= 0");
  for (int i : indices)
    if (i < 0 || i >= dimension) throw InvariantError(kModule, "schedule index out of range");
}

SkeletonTrace skeleton(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                       const IntegratorConfig& cfg) {
  sched.validate(model.dimension());
  SkeletonTrace tr;
  tr.start = y;
  tr.post.push_back(jump(model, sched.indices[0], y));
  for (std::size_t k = 1; k <= sched.n(); ++k) {
    tr.pre.push_back(flow(model, tr.post.back(), sched.times[k - 1], cfg));
    tr.post.push_back(jump(model, sched.indices[k], tr.pre.back()));
  }
  tr.endpoint = flow(model, tr.post.back(), sched.times.back(), cfg);
  if (!tr.endpoint.allFinite()) throw NonFiniteError(kModule, "non-finite skeleton endpoint");
  return tr;
}

DerivationMatrix analyze(Matrix sigma) {
  DerivationMatrix d;
  d.sigma = std::move(sigma);
  d.gram = d.sigma * d.sigma.transpose();
  d.det_gram = d.gram.determinant();
  Eigen::JacobiSVD<Matrix> svd(d.sigma);
  d.singular_values = svd.singularValues();
  d.min_singular_value = d.sigma.cols() < d.sigma.rows() || d.singular_values.size() == 0
                             ? 0.0
                             : d.singular_values.minCoeff();
  return d;
}

std::vector<State> DerivationMatrix::fields() const {
  std::vector<State> out;
  for (Eigen::Index j = sigma.cols() - 1; j >= 0; --j) out.emplace_back(sigma.col(j));
  return out;
}

DerivationMatrix derivation_matrix(const ModelSpec& model, const State& y,
                                   const JumpSchedule& sched, const IntegratorConfig& cfg,
                                   ProductOrder order) {
  sched.validate(model.dimension());
  const std::size_t n = sched.n();
  const int N = model.dimension();

  // Segment k (1..n+1) flows x_{k-1} for t_k: Y_k and its endpoint.
  std::vector<State> x{jump(model, sched.indices[0], y)};
  std::vector<Matrix> Ys;
  std::vector<State> ends;
  for (std::size_t k = 1; k <= n + 1; ++k) {
    Variational v = variational(model, x.back(), sched.times[k - 1], cfg);
    ends.push_back(std::move(v.end_state));
    Ys.push_back(std::move(v.Y));
    if (k <= n) x.push_back(jump(model, sched.indices[k], ends.back()));
  }
  // y_k = ends[k-1]; η = ends[n].
  Matrix sigma(N, static_cast<Eigen::Index>(n + 1));
  sigma.col(static_cast<Eigen::Index>(n)) = model.drift(ends[n]);

  if (order == ProductOrder::backward_sweep) {
    Matrix P = Ys[n];
    for (std::size_t k = n; k >= 1; --k) {
      const Matrix PA = P * jump_jacobian(model, sched.indices[k], ends[k - 1]);
      sigma.col(static_cast<Eigen::Index>(k - 1)) = PA * model.drift(ends[k - 1]);
      P = PA * Ys[k - 1];
    }
  } else {
    for (std::size_t k = 1; k <= n; ++k) {
      State v = model.drift(ends[k - 1]);
      v = jump_jacobian(model, sched.indices[k], ends[k - 1]) * v;
      for (std::size_t m = k + 1; m <= n; ++m) {
        v = Ys[m - 1] * v;
        v = jump_jacobian(model, sched.indices[m], ends[m - 1]) * v;
      }
      sigma.col(static_cast<Eigen::Index>(k - 1)) = Ys[n] * v;
    }
  }
  if (!sigma.allFinite()) throw NonFiniteError(kModule, "non-finite derivation matrix");
  return analyze(std::move(sigma));
}

Matrix derivation_matrix_fd(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                            const IntegratorConfig& cfg, double step) {
  sched.validate(model.dimension());
  Matrix out(model.dimension(), static_cast<Eigen::Index>(sched.times.size()));
  JumpSchedule probe = sched;
  for (std::size_t k = 0; k < sched.times.size(); ++k) {
    const double t = sched.times[k];
    probe.times[k] = t + step;
    const State up = skeleton(model, y, probe, cfg).endpoint;
    if (t - step >= 0.0) {
      probe.times[k] = t - step;
      out.col(static_cast<Eigen::Index>(k)) = (up - skeleton(model, y, probe, cfg).endpoint) / (2 * step);
    } else {
      probe.times[k] = t;
      out.col(static_cast<Eigen::Index>(k)) = (up - skeleton(model, y, probe, cfg).endpoint) / step;
    }
    probe.times[k] = t;
  }
  return out;
}

std::vector<State> zero_time_fields(const ModelSpec& model, const State& y,
                                    const std::vector<int>& indices) {
  if (indices.empty()) throw InvariantError(kModule, "need at least one jump index");
  for (int i : indices) model.check_index(i);
  const std::size_t n = indices.size() - 1;
  std::vector<State> xbar{jump(model, indices[0], y)};
  for (std::size_t k = 1; k <= n; ++k) xbar.push_back(jump(model, indices[k], xbar.back()));

  std::vector<State> out{model.drift(xbar[n])};
  // V_{j+1} = A^{i_n}(x̄_{n-1}) ... A^{i_{n-j+1}}(x̄_{n-j}) b(x̄_{n-j}).
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t c = n - j;
    State v = model.drift(xbar[c]);
    for (std::size_t m = c + 1; m <= n; ++m) v = jump_jacobian(model, indices[m], xbar[m - 1]) * v;
    out.push_back(std::move(v));
  }
  return out;
}

Goodness is_good(const ModelSpec& model, const State& y, const JumpSchedule& sched,
                 const IntegratorConfig& cfg, std::optional<double> threshold) {
  const DerivationMatrix d = derivation_matrix(model, y, sched, cfg);
  Goodness g;
  g.min_singular_value = d.min_singular_value;
  g.det_gram = d.det_gram;
  const double norm2 = d.singular_values.size() ? d.singular_values.maxCoeff() : 0.0;
  g.threshold = threshold.value_or(1e-8 * norm2);
  if (!(g.threshold > 0.0)) g.threshold = threshold ? *threshold : 1e-300;
  g.good = g.min_singular_value > g.threshold;
  return g;
}

SweepReport sweep_box(const ModelSpec& model, const JumpSchedule& sched, const BoxSpec& box,
                      const IntegratorConfig& cfg, std::optional<double> threshold,
                      unsigned workers) {
  sched.validate(model.dimension());
  if (!(box.hi > box.lo)) throw InvariantError(kModule, "empty sampling box");
  const int N = model.dimension();
  std::vector<State> ys;
  if (box.corners && N <= 16) {
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << N); ++mask) {
      State y(N);
      for (int l = 0; l < N; ++l) y[l] = (mask >> l) & 1 ? box.hi : box.lo;
      ys.push_back(std::move(y));
    }
  }
  Rng rng({box.seed, 0x5eed});
  for (std::size_t k = 0; k < box.draws; ++k) {
    State y(N);
    for (int l = 0; l < N; ++l) y[l] = rng.uniform(box.lo, box.hi);
    ys.push_back(std::move(y));
  }

  SweepReport rep;
  rep.indices = sched.indices;
  rep.rows.resize(ys.size());
  parallel_for(ys.size(), workers, [&](std::size_t k) {
    const Goodness g = is_good(model, ys[k], sched, cfg, threshold);
    rep.rows[k] = {ys[k], g.min_singular_value, g.threshold, g.good};
  });
  rep.good = !rep.rows.empty();
  for (std::size_t k = 0; k < rep.rows.size(); ++k) {
    if (rep.rows[k].min_singular_value < rep.rows[rep.worst].min_singular_value) rep.worst = k;
    rep.good = rep.good && rep.rows[k].good;
  }
  return rep;
}

std::vector<std::vector<int>> enumerate_index_sequences(int dimension, std::size_t length,
                                                        const std::vector<int>& alphabet) {
  if (dimension > 6) throw InvariantError(kModule, "index enumeration is limited to N <= 6");
  if (length == 0) throw InvariantError(kModule, "sequence length must be positive");
  std::vector<int> letters = alphabet;
  if (letters.empty())
    for (int i = 0; i < dimension; ++i) letters.push_back(i);
  for (int i : letters)
    if (i < 0 || i >= dimension) throw InvariantError(kModule, "index out of range");
  std::vector<std::vector<int>> out;
  std::vector<std::size_t> digit(length, 0);
  for (;;) {
    std::vector<int> seq(length);
    for (std::size_t l = 0; l < length; ++l) seq[l] = letters[digit[l]];
    out.push_back(std::move(seq));
    std::size_t l = length;
    while (l > 0 && ++digit[l - 1] == letters.size()) digit[--l] = 0;
    if (l == 0) break;
  }
  return out;
}

double neuron_determinant(const JumpSchedule& sched, double lambda, double v_star) {
  const auto N = sched.times.size();
  if (sched.indices.size() != N) throw InvariantError("skeleton", "closed form needs N jumps and N times");
  for (std::size_t k = 0; k < N; ++k)
    if (sched.indices[k] != static_cast<int>(k))
      throw InvariantError("skeleton", "closed form needs the index sequence 1, 2, ..., N");
  double d = std::pow(lambda * v_star, static_cast<double>(N));
  for (std::size_t k = 1; k <= N; ++k) d *= std::exp(-lambda * (sched.cumulative(N) - sched.cumulative(k - 1)));
  return d;
}

}  // namespace pdmp
