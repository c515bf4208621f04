#include "pdmp/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pdmp {

namespace {

constexpr const char* kModule = "simulate";

std::optional<JumpEvent> thin(const ModelSpec& model, const State& x, Rng& rng,
                              const IntegratorConfig& cfg, double limit,
                              Eigen::VectorXd& rates) {
  const double proposal = model.dimension() * model.rate_bound();
  FlowCursor cursor(model, x, cfg);
  double s = 0.0;
  for (;;) {
    s += rng.exponential(proposal);
    if (s > limit) return std::nullopt;
    State y = cursor.state_at(s);
    model.rates(y, rates);
    const double level = rng.uniform() * proposal;
    double acc = 0.0;
    for (int i = 0; i < model.dimension(); ++i) {
      acc += rates[i];
      if (level < acc) return JumpEvent{s, i, std::move(y)};
    }
  }
}

[[noreturn]] void timeout(double cap) {
  std::ostringstream os;
  os << "no jump accepted before max_time = " << cap;
  throw TimeoutError(kModule, os.str());
}

int pick_index(const Eigen::VectorXd& rates, double u) {
  const double level = u * rates.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < rates.size(); ++i) {
    acc += rates[i];
    if (level < acc) return static_cast<int>(i);
  }
  return static_cast<int>(rates.size() - 1);
}

}  // namespace

JumpEvent next_jump(const ModelSpec& model, const State& x, Rng& rng, const IntegratorConfig& cfg) {
  Eigen::VectorXd rates(model.dimension());
  auto ev = thin(model, x, rng, cfg, cfg.max_time, rates);
  if (!ev) timeout(cfg.max_time);
  return std::move(*ev);
}

JumpEvent next_jump_inversion(const ModelSpec& model, const State& x, Rng& rng,
                              const IntegratorConfig& cfg) {
  const double target = rng.exponential(1.0);
  FlowCursor cursor(model, x, cfg, true);
  FlowCursor before = cursor;
  while (cursor.node_integrated_rate() < target) {
    if (cursor.next_node_time() > cfg.max_time) timeout(cfg.max_time);
    before = cursor;
    cursor.advance();
  }
  // Λ(t) = target inside the last grid interval; bisect on the trapezoid.
  double lo = before.node_time();
  double hi = cursor.node_time();
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (before.integrated_rate_at(mid, before.state_at(mid)) < target ? lo : hi) = mid;
  }
  JumpEvent ev;
  ev.tau = hi;
  ev.pre_state = hi < cursor.node_time() ? before.state_at(hi) : cursor.node_state();
  Eigen::VectorXd rates(model.dimension());
  model.rates(ev.pre_state, rates);
  ev.index = pick_index(rates, rng.uniform());
  return ev;
}

PathRecord simulate_path(const ModelSpec& model, const State& x0, const StopRule& stop,
                         const RngSpec& rng_spec, const IntegratorConfig& cfg) {
  if (!stop.horizon && !stop.max_jumps)
    throw InvariantError(kModule, "a path needs a horizon or a jump count");
  if (stop.horizon && !(*stop.horizon >= 0.0))
    throw InvariantError(kModule, "horizon must be nonnegative");
  if (x0.size() != model.dimension()) throw InvariantError(kModule, "initial state has the wrong dimension");
  cfg.validate();

  PathRecord path;
  path.rng = rng_spec;
  path.initial = x0;
  Rng rng(rng_spec);
  Eigen::VectorXd rates(model.dimension());
  const std::size_t cap = stop.max_jumps.value_or(static_cast<std::size_t>(-1));
  double now = 0.0;
  State x = x0;
  while (path.jumps() < cap) {
    const double remaining = stop.horizon ? *stop.horizon - now : cfg.max_time;
    const double limit = std::min(remaining, cfg.max_time);
    auto ev = thin(model, x, rng, cfg, limit, rates);
    if (!ev) {
      if (limit < remaining || !stop.horizon) timeout(cfg.max_time);
      break;
    }
    now += ev->tau;
    State after = jump(model, ev->index, ev->pre_state);
    if (!after.allFinite()) throw NonFiniteError(kModule, "non-finite post-jump state");
    path.times.push_back(now);
    path.indices.push_back(ev->index);
    path.pre.push_back(std::move(ev->pre_state));
    path.post.push_back(after);
    x = std::move(after);
  }
  if (stop.horizon) {
    path.final_time = *stop.horizon;
    path.final_state = flow(model, x, path.final_time - now, cfg);
  } else {
    path.final_time = now;
    path.final_state = x;
  }
  return path;
}

State state_at(const ModelSpec& model, const PathRecord& path, double t, const IntegratorConfig& cfg) {
  if (t < 0.0 || t > path.final_time) throw InvariantError(kModule, "time outside the recorded path");
  const auto k = static_cast<std::size_t>(
      std::upper_bound(path.times.begin(), path.times.end(), t) - path.times.begin());
  return flow(model, path.segment_state(k), t - path.segment_start(k), cfg);
}

PathCheck check_path(const ModelSpec& model, const PathRecord& path, const IntegratorConfig& cfg) {
  PathCheck out;
  for (std::size_t k = 0; k < path.jumps(); ++k) {
    const double dt = path.times[k] - path.segment_start(k);
    if (!(dt > 0.0)) out.times_increasing = false;
    const State z = flow(model, path.segment_state(k), std::max(dt, 0.0), cfg);
    out.max_reflow_error = std::max(out.max_reflow_error, (z - path.pre[k]).cwiseAbs().maxCoeff());
    const State after = jump(model, path.indices[k], path.pre[k]);
    if (after != path.post[k]) out.post_states_exact = false;
    if (model.house_of_cards() && path.post[k][path.indices[k]] != 0.0) out.resets_exact = false;
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<TestFunction> test_function_suite(int dimension) {
  const int second = std::min(2, dimension) - 1;
  std::vector<TestFunction> out;
  out.push_back({"one", [](const State&) { return 1.0; },
                 [](const State& x) { return State(State::Zero(x.size())); }});
  out.push_back({"x1", [](const State& x) { return x[0]; },
                 [](const State& x) { return State(State::Unit(x.size(), 0)); }});
  out.push_back({"sin_x1", [](const State& x) { return std::sin(x[0]); },
                 [](const State& x) { return State(std::cos(x[0]) * State::Unit(x.size(), 0)); }});
  out.push_back({"gauss", [](const State& x) { return std::exp(-x.squaredNorm()); },
                 [](const State& x) { return State(-2.0 * std::exp(-x.squaredNorm()) * x); }});
  out.push_back({"clipped_product",
                 [second](const State& x) { return std::clamp(x[0] * x[second], -25.0, 25.0); },
                 [second](const State& x) {
                   State g = State::Zero(x.size());
                   const double p = x[0] * x[second];
                   if (p > -25.0 && p < 25.0) {
                     g[0] += x[second];
                     g[second] += x[0];
                   }
                   return g;
                 }});
  return out;
}

double apply_generator(const ModelSpec& model, const TestFunction& g, const State& x) {
  const double gx = g.value(x);
  const State grad = g.gradient ? g.gradient(x) : numerics::fd_gradient(g.value, x);
  double out = grad.dot(model.drift(x));
  for (int i = 0; i < model.dimension(); ++i) {
    const double f = model.rate(i, x);
    if (f != 0.0) out += f * (g.value(jump(model, i, x)) - gx);
  }
  return out;
}

TestFunction generator_of(const ModelSpec& model, const TestFunction& g) {
  return {"L" + g.name, [&model, g](const State& x) { return apply_generator(model, g, x); }, {}};
}

TestFunction times_total_rate(const ModelSpec& model, const TestFunction& g) {
  return {"fbar_" + g.name, [&model, g](const State& x) { return total_rate(model, x) * g.value(x); },
          {}};
}

// ---------------------------------------------------------------------------

namespace {

numerics::MeanSe ratio_estimate(const std::vector<double>& num, const std::vector<double>& den) {
  double tn = 0.0, td = 0.0;
  std::vector<double> ratios(num.size());
  for (std::size_t b = 0; b < num.size(); ++b) {
    tn += num[b];
    td += den[b];
    ratios[b] = num[b] / den[b];
  }
  return {tn / td, numerics::mean_and_se(ratios).se};
}

std::vector<double> column(const std::vector<std::vector<double>>& rows, std::size_t l) {
  std::vector<double> out(rows.size());
  for (std::size_t b = 0; b < rows.size(); ++b) out[b] = rows[b][l];
  return out;
}

}  // namespace

numerics::MeanSe BatchIntegrals::time_average(std::size_t l) const {
  return ratio_estimate(column(integrals, l), durations);
}

numerics::MeanSe BatchIntegrals::time_ratio(std::size_t num, std::size_t den) const {
  return ratio_estimate(column(integrals, num), column(integrals, den));
}

numerics::MeanSe BatchIntegrals::chain_average(std::size_t l) const {
  return ratio_estimate(column(chain_sums, l), jump_counts);
}

numerics::MeanSe BatchIntegrals::jump_rate() const { return ratio_estimate(jump_counts, durations); }

BatchIntegrals integrate_path(const ModelSpec& model, const PathRecord& path,
                              const std::vector<TestFunction>& functions,
                              const IntegratorConfig& cfg, const EstimatorConfig& est) {
  const std::size_t K = path.jumps();
  const auto burn = static_cast<std::size_t>(std::floor(est.burn_in_fraction * static_cast<double>(K)));
  const std::size_t segments = K - burn + 1;
  const std::size_t B = est.batches;
  if (B == 0 || segments < B) throw InvariantError(kModule, "too few jumps for batch means");
  if (!(path.final_time > path.segment_start(burn)))
    throw InvariantError(kModule, "empty integration window");

  const std::size_t L = functions.size();
  BatchIntegrals out;
  out.integrals.assign(B, std::vector<double>(L, 0.0));
  out.chain_sums.assign(B, std::vector<double>(L, 0.0));
  out.durations.assign(B, 0.0);
  out.jump_counts.assign(B, 0.0);
  out.burn_in_jumps = burn;
  out.burn_in_time = path.segment_start(burn);

  std::vector<double> prev(L), cur(L);
  auto eval = [&](const State& x, std::vector<double>& into) {
    for (std::size_t l = 0; l < L; ++l) into[l] = functions[l].value(x);
  };
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t k = burn + s;
    const std::size_t b = s * B / segments;
    const double duration = path.segment_end(k) - path.segment_start(k);
    auto& acc = out.integrals[b];
    if (duration > 0.0) {
      FlowCursor cursor(model, path.segment_state(k), cfg);
      eval(cursor.node_state(), prev);
      double t_prev = 0.0;
      while (t_prev < duration) {
        const double t = std::min(cursor.next_node_time(), duration);
        eval(cursor.state_at(t), cur);
        const double w = 0.5 * (t - t_prev);
        for (std::size_t l = 0; l < L; ++l) acc[l] += w * (prev[l] + cur[l]);
        // Same rounding as the integral of g = 1, so that average is exactly 1.
        out.durations[b] += w * 2.0;
        std::swap(prev, cur);
        t_prev = t;
      }
    }
    if (k < K) {
      out.jump_counts[b] += 1.0;
      eval(path.pre[k], cur);
      for (std::size_t l = 0; l < L; ++l) out.chain_sums[b][l] += cur[l];
    }
  }
  return out;
}

numerics::MeanSe ergodic_average(const ModelSpec& model, const PathRecord& path,
                                 const TestFunction& g, const IntegratorConfig& cfg,
                                 const EstimatorConfig& est) {
  if (!(path.final_time > 0.0)) throw InvariantError(kModule, "time average over an empty path");
  return integrate_path(model, path, {g}, cfg, est).time_average(0);
}

numerics::MeanSe jump_chain_average(const PathRecord& path, const TestFunction& g,
                                    const EstimatorConfig& est) {
  const std::size_t K = path.jumps();
  const auto burn = static_cast<std::size_t>(std::floor(est.burn_in_fraction * static_cast<double>(K)));
  if (K - burn < est.batches) throw InvariantError(kModule, "too few jumps after burn-in");
  std::vector<double> values;
  values.reserve(K - burn);
  for (std::size_t k = burn; k < K; ++k) values.push_back(g.value(path.pre[k]));
  return numerics::batch_means(values, est.batches);
}

numerics::MeanSe jump_rate(const PathRecord& path, const EstimatorConfig& est) {
  const std::size_t K = path.jumps();
  const auto burn = static_cast<std::size_t>(std::floor(est.burn_in_fraction * static_cast<double>(K)));
  const std::size_t segments = K - burn + 1;
  if (segments < est.batches) throw InvariantError(kModule, "too few jumps for batch means");
  std::vector<double> counts(est.batches, 0.0), durations(est.batches, 0.0);
  for (std::size_t s = 0; s < segments; ++s) {
    const std::size_t k = burn + s;
    const std::size_t b = s * est.batches / segments;
    durations[b] += path.segment_end(k) - path.segment_start(k);
    if (k < K) counts[b] += 1.0;
  }
  return ratio_estimate(counts, durations);
}

}  // namespace pdmp
