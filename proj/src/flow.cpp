#include "pdmp/flow.hpp"

#include <algorithm>
#include <limits>
#include <sstream>

#include "pdmp/numerics.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "flow";

void require_finite(const State& x) {
  if (!x.allFinite()) throw NonFiniteError(kModule, "non-finite state during flow integration");
}

void require_time(double t) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw InvariantError(kModule, "flow time must be finite and >= 0");
}

bool use_exact(const ModelSpec& model, const IntegratorConfig& cfg) {
  return cfg.use_closed_form && model.exact_flow().has_value();
}

bool use_exact(const NonInteractingSpec& spec, const IntegratorConfig& cfg) {
  return cfg.use_closed_form && spec.closed_form.has_value();
}

// Scalar flow values on the grid k*h started from v, extended lazily.
class ScalarGrid {
 public:
  ScalarGrid(const NonInteractingSpec& spec, double v, double h) : spec_(spec), h_(h) {
    nodes_.push_back(v);
  }

  double at(double t) {
    const auto k = static_cast<std::size_t>(std::floor(t / h_));
    while (nodes_.size() <= k) nodes_.push_back(step(nodes_.back(), h_));
    const double r = t - static_cast<double>(k) * h_;
    return r > 0.0 ? step(nodes_[k], r) : nodes_[k];
  }

 private:
  double step(double v, double h) const {
    const double out = numerics::rk4_step(v, h, [this](double u) { return spec_.drift(u); });
    if (!std::isfinite(out)) throw NonFiniteError(kModule, "non-finite scalar flow");
    return out;
  }

  const NonInteractingSpec& spec_;
  double h_;
  std::vector<double> nodes_;
};

}  // namespace

void IntegratorConfig::validate() const {
  if (!(step > 0.0) || !std::isfinite(step)) throw InvariantError(kModule, "integrator step must be positive");
  if (!(max_time > 0.0)) throw InvariantError(kModule, "max_time must be positive");
  if (!(trunc_eps > 0.0 && trunc_eps < 1.0)) throw InvariantError(kModule, "trunc_eps must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// FlowCursor

FlowCursor::FlowCursor(const ModelSpec& model, State start, const IntegratorConfig& cfg,
                       bool track_rate)
    : model_(&model),
      origin_(std::move(start)),
      node_(origin_),
      step_(cfg.step),
      exact_(use_exact(model, cfg)),
      track_rate_(track_rate) {
  cfg.validate();
  require_finite(origin_);
  if (track_rate_) node_rate_ = total_rate(model, node_);
}

void FlowCursor::advance() {
  ++index_;
  if (exact_) {
    node_ = model_->exact_flow()->flow(origin_, node_time());
  } else {
    node_ = numerics::rk4_step(node_, step_, [this](const State& x) { return model_->drift(x); });
  }
  require_finite(node_);
  if (track_rate_) {
    const double r = total_rate(*model_, node_);
    integrated_ += 0.5 * step_ * (node_rate_ + r);
    node_rate_ = r;
  }
}

State FlowCursor::state_at(double t) {
  if (t < node_time()) throw InvariantError(kModule, "flow cursor cannot move backwards in time");
  while (static_cast<double>(index_ + 1) * step_ <= t) advance();
  const double r = t - node_time();
  if (r <= 0.0) return node_;
  State out = exact_ ? model_->exact_flow()->flow(origin_, t)
                     : numerics::rk4_step(node_, r, [this](const State& x) { return model_->drift(x); });
  require_finite(out);
  return out;
}

double FlowCursor::integrated_rate_at(double t, const State& state_t) const {
  const double r = t - node_time();
  if (r <= 0.0) return integrated_;
  return integrated_ + 0.5 * r * (node_rate_ + total_rate(*model_, state_t));
}

// ---------------------------------------------------------------------------

State flow(const ModelSpec& model, const State& x, double t, const IntegratorConfig& cfg) {
  require_time(t);
  if (t == 0.0) return x;
  FlowCursor cursor(model, x, cfg);
  return cursor.state_at(t);
}

FlowResult flow_with_rate(const ModelSpec& model, const State& x, double t,
                          const IntegratorConfig& cfg, bool record_path) {
  require_time(t);
  FlowCursor cursor(model, x, cfg, true);
  FlowResult out;
  if (record_path) out.path.emplace_back(0.0, x);
  while (cursor.next_node_time() <= t) {
    cursor.advance();
    if (record_path) out.path.emplace_back(cursor.node_time(), cursor.node_state());
  }
  out.end_state = cursor.state_at(t);
  out.integrated_rate = cursor.integrated_rate_at(t, out.end_state);
  if (record_path && t > cursor.node_time()) out.path.emplace_back(t, out.end_state);
  return out;
}

Variational variational(const ModelSpec& model, const State& x, double t,
                        const IntegratorConfig& cfg) {
  require_time(t);
  cfg.validate();
  const Eigen::Index n = x.size();
  Variational out;
  if (use_exact(model, cfg) && model.exact_flow()->sensitivity) {
    const auto& ef = *model.exact_flow();
    out.end_state = ef.flow(x, t);
    out.Y = ef.sensitivity(x, t);
    out.Z = ef.inverse_sensitivity(x, t);
    return out;
  }

  // Stacked system [x; vec(Y); vec(Z)].
  Eigen::VectorXd v(n + 2 * n * n);
  v.head(n) = x;
  Eigen::Map<Matrix>(v.data() + n, n, n).setIdentity();
  Eigen::Map<Matrix>(v.data() + n + n * n, n, n).setIdentity();
  auto rhs = [&](const Eigen::VectorXd& s) {
    Eigen::VectorXd d(s.size());
    const State xs = s.head(n);
    const Matrix J = model.drift_jacobian(xs);
    d.head(n) = model.drift(xs);
    Eigen::Map<const Matrix> Y(s.data() + n, n, n);
    Eigen::Map<const Matrix> Z(s.data() + n + n * n, n, n);
    Eigen::Map<Matrix>(d.data() + n, n, n) = J * Y;
    Eigen::Map<Matrix>(d.data() + n + n * n, n, n) = -Z * J;
    return d;
  };
  const double h = cfg.step;
  const auto full = static_cast<long long>(std::floor(t / h));
  for (long long k = 0; k < full; ++k) v = numerics::rk4_step(v, h, rhs);
  const double r = t - static_cast<double>(full) * h;
  if (r > 0.0) v = numerics::rk4_step(v, r, rhs);
  if (!v.allFinite()) throw NonFiniteError(kModule, "non-finite entries in variational matrices");
  out.end_state = v.head(n);
  out.Y = Eigen::Map<const Matrix>(v.data() + n, n, n);
  out.Z = Eigen::Map<const Matrix>(v.data() + n + n * n, n, n);
  return out;
}

double survival(const ModelSpec& model, const State& x, double t, const IntegratorConfig& cfg) {
  if (t == 0.0) return 1.0;
  return std::exp(-flow_with_rate(model, x, t, cfg).integrated_rate);
}

Truncation truncation_time(const ModelSpec& model, const State& x, const IntegratorConfig& cfg) {
  return integrate_until_truncation(model, x, cfg, [](double, const State&, double, double) {});
}

// ---------------------------------------------------------------------------
// Scalar flow

double scalar_flow(const NonInteractingSpec& spec, double v, double t, const IntegratorConfig& cfg) {
  require_time(t);
  if (use_exact(spec, cfg)) return spec.closed_form->flow(v, t);
  cfg.validate();
  ScalarGrid grid(spec, v, cfg.step);
  return grid.at(t);
}

std::pair<double, double> scalar_flow_with_inverse_sensitivity(const NonInteractingSpec& spec,
                                                              double v, double t,
                                                              const IntegratorConfig& cfg) {
  require_time(t);
  if (use_exact(spec, cfg)) {
    return {spec.closed_form->flow(v, t), spec.closed_form->inverse_sensitivity(v, t)};
  }
  cfg.validate();
  auto rhs = [&](const Eigen::Vector2d& s) {
    return Eigen::Vector2d(spec.drift(s[0]), -spec.drift_derivative(s[0]) * s[1]);
  };
  Eigen::Vector2d s(v, 1.0);
  const double h = cfg.step;
  const auto full = static_cast<long long>(std::floor(t / h));
  for (long long k = 0; k < full; ++k) s = numerics::rk4_step(s, h, rhs);
  const double r = t - static_cast<double>(full) * h;
  if (r > 0.0) s = numerics::rk4_step(s, r, rhs);
  if (!s.allFinite()) throw NonFiniteError(kModule, "non-finite scalar sensitivity");
  return {s[0], s[1]};
}

double kappa(const NonInteractingSpec& spec, double y, const IntegratorConfig& cfg) {
  if (use_exact(spec, cfg) && spec.closed_form->kappa) return spec.closed_form->kappa(y);
  cfg.validate();
  const double b0 = spec.drift(0.0);
  if (b0 == 0.0) throw DomainError(kModule, "0 is an equilibrium of the single-particle flow", 0.0);
  if (y == 0.0) return 0.0;
  const double dir = b0 > 0.0 ? 1.0 : -1.0;
  if ((y - 0.0) * dir < 0.0)
    throw DomainError(kModule, "level lies behind the start of the flow from 0", 0.0);

  ScalarGrid grid(spec, 0.0, cfg.step);
  auto gap = [&](double t) { return (grid.at(t) - y) * dir; };
  double lo = 0.0;
  double hi = 1.0;
  while (gap(hi) < 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > cfg.max_time) {
      const double limit = grid.at(cfg.max_time);
      std::ostringstream os;
      os.precision(17);
      os << "level " << y << " is not reached before max_time; flow limit ~ " << limit;
      throw DomainError(kModule, os.str(), limit);
    }
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return std::abs(gap(lo)) <= std::abs(gap(hi)) ? lo : hi;
}

double flow_limit_from_zero(const NonInteractingSpec& spec, const IntegratorConfig& cfg) {
  if (use_exact(spec, cfg)) return spec.closed_form->limit_from_zero;
  cfg.validate();
  ScalarGrid grid(spec, 0.0, cfg.step);
  double v = 0.0;
  for (double t = 0.0; t <= cfg.max_time; t += 1.0) {
    v = grid.at(t);
    if (std::abs(spec.drift(v)) < 1e-14 * std::max(1.0, std::abs(v))) break;
  }
  return v;
}

bool reachable_from_zero(const NonInteractingSpec& spec, double y, double limit) {
  const double b0 = spec.drift(0.0);
  if (b0 > 0.0) return y >= 0.0 && y < limit;
  if (b0 < 0.0) return y <= 0.0 && y > limit;
  return y == 0.0;
}

double equilibrium_avoidance(const NonInteractingSpec& spec, double v, double T,
                             const IntegratorConfig& cfg) {
  if (!(T > 0.0)) throw InvariantError(kModule, "horizon must be positive");
  cfg.validate();
  const double h = cfg.step;
  const auto nodes = static_cast<long long>(std::ceil(T / h));
  double best = std::numeric_limits<double>::infinity();
  if (use_exact(spec, cfg)) {
    for (long long k = 0; k <= nodes; ++k) {
      const double t = std::min(T, static_cast<double>(k) * h);
      best = std::min(best, std::abs(spec.closed_form->drift_along(v, t)));
    }
    return best;
  }
  double x = v;
  best = std::abs(spec.drift(x));
  for (long long k = 1; k <= nodes; ++k) {
    const double dt = std::min(T, static_cast<double>(k) * h) - static_cast<double>(k - 1) * h;
    x = numerics::rk4_step(x, dt, [&](double u) { return spec.drift(u); });
    best = std::min(best, std::abs(spec.drift(x)));
  }
  return best;
}

}  // namespace pdmp
