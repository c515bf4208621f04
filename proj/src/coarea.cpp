#include "pdmp/coarea.hpp"

#include <cmath>
#include <optional>
#include <sstream>

#include "pdmp/numerics.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "coarea";

bool exact(const NonInteractingSpec& spec, const IntegratorConfig& cfg) {
  return cfg.use_closed_form && spec.closed_form.has_value();
}

// γ̃_{-t}(y): the backward flow, RK4 on -b̃.
double backward_flow(const NonInteractingSpec& spec, double y, double t, double h) {
  auto rhs = [&](double u) { return -spec.drift(u); };
  const auto full = static_cast<long long>(std::floor(t / h));
  double v = y;
  for (long long k = 0; k < full; ++k) v = numerics::rk4_step(v, h, rhs);
  const double r = t - static_cast<double>(full) * h;
  if (r > 0.0) v = numerics::rk4_step(v, r, rhs);
  if (!std::isfinite(v)) throw NonFiniteError(kModule, "non-finite backward flow");
  return v;
}

// Solves Δ_i^j(u) = w by bisection; the map is monotone with slope >= a.
double invert_jump(const NonInteractingSpec& spec, int i, int j, double w) {
  const double slope = spec.jump_derivative(i, j, w);
  const double dir = slope > 0.0 ? 1.0 : -1.0;
  auto gap = [&](double u) { return (spec.jump(i, j, u) - w) * dir; };
  double lo = w - 1.0;
  double hi = w + 1.0;
  for (int k = 0; gap(lo) > 0.0; ++k) {
    lo -= std::ldexp(1.0, k);
    if (k > 60) throw InvariantError(kModule, "cannot bracket the jump inverse");
  }
  for (int k = 0; gap(hi) < 0.0; ++k) {
    hi += std::ldexp(1.0, k);
    if (k > 60) throw InvariantError(kModule, "cannot bracket the jump inverse");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    (gap(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

// ∫_0^t f(γ̃_s(v)) ds, trapezoid on the flow grid.
double rate_integral(const NonInteractingSpec& spec, const RateFunction& f, double v, double t,
                     const IntegratorConfig& cfg) {
  if (f.is_constant()) return f(v) * t;
  const double h = cfg.step;
  const bool closed = exact(spec, cfg);
  auto rhs = [&](double u) { return spec.drift(u); };
  const auto full = static_cast<long long>(std::floor(t / h));
  double x = v;
  double prev = f(x);
  double acc = 0.0;
  for (long long k = 1; k <= full; ++k) {
    x = closed ? spec.closed_form->flow(v, static_cast<double>(k) * h) : numerics::rk4_step(x, h, rhs);
    const double cur = f(x);
    acc += 0.5 * h * (prev + cur);
    prev = cur;
  }
  const double r = t - static_cast<double>(full) * h;
  if (r > 0.0) {
    x = closed ? spec.closed_form->flow(v, t) : numerics::rk4_step(x, r, rhs);
    acc += 0.5 * r * (prev + f(x));
  }
  return acc;
}

}  // namespace

CompactDensity smooth_bump(double lo, double hi) {
  if (!(hi > lo)) throw InvariantError(kModule, "bump support must have hi > lo");
  CompactDensity r;
  r.lo = lo;
  r.hi = hi;
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  r.shape = [mid, half](double v) {
    const double u = (v - mid) / half;
    return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0;
  };
  return r;
}

double rate_mass(const NonInteractingSpec& spec, const CompactDensity& r, int i) {
  const RateFunction& f = spec.rates.at(static_cast<std::size_t>(i));
  return numerics::adaptive_simpson([&](double v) { return r(v) * f(v); }, r.lo, r.hi, 1e-10);
}

CompactDensity normalize_product_input(const NonInteractingSpec& spec, CompactDensity r) {
  // ∫ f̄ ∏ r = Σ_i C_i R^{N-1} with R = ∫ r; scaling r by c multiplies it by c^N.
  r.scale = 1.0;
  const int N = spec.dimension;
  const double R = numerics::adaptive_simpson([&](double v) { return r(v); }, r.lo, r.hi, 1e-10);
  double mass = 0.0;
  for (int i = 0; i < N; ++i) mass += rate_mass(spec, r, i) * std::pow(R, N - 1);
  if (!(mass > 0.0)) throw InvariantError(kModule, "input density has no rate mass");
  r.scale = std::pow(mass, -1.0 / static_cast<double>(N));
  return r;
}

CoareaPropagator::CoareaPropagator(const NonInteractingSpec& spec, CompactDensity r,
                                   IntegratorConfig cfg)
    : spec_(&spec), r_(std::move(r)), cfg_(cfg) {
  cfg_.validate();
  if (spec.drift(0.0) == 0.0)
    throw DomainError(kModule, "0 is an equilibrium of the single-particle flow", 0.0);
  limit_ = flow_limit_from_zero(spec, cfg_);
  for (int i = 0; i < spec.dimension; ++i) mass_.push_back(pdmp::rate_mass(spec, r_, i));
}

double CoareaPropagator::beta_inverse(int i, int j, double t, double y) const {
  const NonInteractingSpec& spec = *spec_;
  if (exact(spec, cfg_) && spec.closed_form->jump_flow_inverse)
    return spec.closed_form->jump_flow_inverse(i, j, t, y);
  return invert_jump(spec, i, j, backward_flow(spec, y, t, cfg_.step));
}

double CoareaPropagator::q(int i, const State& y) const {
  const NonInteractingSpec& spec = *spec_;
  const int N = spec.dimension;
  if (y.size() != N) throw InvariantError(kModule, "state has the wrong dimension");
  if (i < 0 || i >= N) throw InvariantError(kModule, "jump index out of range");
  const double yi = y[i];
  if (!reachable_from_zero(spec, yi, limit_)) {
    const double dir = spec.drift(0.0) > 0.0 ? 1.0 : -1.0;
    if (yi * dir < 0.0) return 0.0;
    std::ostringstream os;
    os.precision(17);
    os << "level " << yi << " is at or beyond the flow limit " << limit_;
    throw DomainError(kModule, os.str(), limit_);
  }

  const double t = kappa(spec, yi, cfg_);
  double value = mass_[static_cast<std::size_t>(i)];
  double lam = rate_integral(spec, spec.rates[static_cast<std::size_t>(i)], 0.0, t, cfg_);
  for (int j = 0; j < N; ++j) {
    if (j == i) continue;
    const double u = beta_inverse(i, j, t, y[j]);
    const double rj = r_(u);
    if (rj == 0.0) return 0.0;
    const double w = spec.jump(i, j, u);
    const double z = scalar_flow_with_inverse_sensitivity(spec, w, t, cfg_).second;
    value *= rj * std::abs(z / spec.jump_derivative(i, j, u));
    lam += rate_integral(spec, spec.rates[static_cast<std::size_t>(j)], w, t, cfg_);
  }
  double fbar = 0.0;
  for (int j = 0; j < N; ++j) fbar += spec.rates[static_cast<std::size_t>(j)](y[j]);
  return value * std::exp(-lam) * fbar / std::abs(spec.drift(yi));
}

double CoareaPropagator::total(const State& y) const {
  double s = 0.0;
  for (int i = 0; i < spec_->dimension; ++i) s += q(i, y);
  return s;
}

double coarea_propagate(const NonInteractingSpec& spec, const CompactDensity& r, int i,
                        const State& y, const IntegratorConfig& cfg) {
  return CoareaPropagator(spec, r, cfg).q(i, y);
}

double neuron_q_closed_form(int N, double lambda, double v_star, double f, double a,
                            const CompactDensity& r, int i, const State& y) {
  const double yi = y[i];
  if (!(yi >= 0.0 && yi < v_star)) return 0.0;
  const double gap = v_star - yi;
  double prod = 1.0;
  for (int j = 0; j < N; ++j)
    if (j != i) prod *= r(v_star * (y[j] - yi) / gap - a);
  if (prod == 0.0) return 0.0;
  const double C = numerics::adaptive_simpson([&](double v) { return r(v) * f; }, r.lo, r.hi, 1e-10);
  const double e = static_cast<double>(N) * f / lambda;
  return C * static_cast<double>(N) * f / lambda * std::pow(v_star, N - 1 - e) * prod *
         std::pow(gap, e - N);
}

std::vector<TabulatedPoint> tabulate(const CoareaPropagator& prop, const std::vector<double>& lo,
                                     const std::vector<double>& hi, std::size_t per_axis,
                                     unsigned workers) {
  const std::size_t N = lo.size();
  if (hi.size() != N || per_axis < 2) throw InvariantError(kModule, "bad tabulation grid");
  std::size_t total = 1;
  for (std::size_t l = 0; l < N; ++l) total *= per_axis;
  const double limit = prop.flow_limit();

  std::vector<std::optional<TabulatedPoint>> slots(total);
  parallel_for(total, workers, [&](std::size_t k) {
    State y(static_cast<Eigen::Index>(N));
    std::size_t rest = k;
    for (std::size_t l = N; l-- > 0;) {
      const std::size_t c = rest % per_axis;
      rest /= per_axis;
      y[static_cast<Eigen::Index>(l)] = lo[l] + (hi[l] - lo[l]) * static_cast<double>(c) /
                                                    static_cast<double>(per_axis - 1);
    }
    TabulatedPoint p;
    p.y = y;
    for (std::size_t i = 0; i < N; ++i) {
      // q_i is undefined once y^i reaches the flow limit; such points are skipped.
      const double yi = y[static_cast<Eigen::Index>(i)];
      if ((limit > 0.0 && yi >= limit) || (limit < 0.0 && yi <= limit)) return;
      p.q.push_back(prop.q(static_cast<int>(i), y));
      p.q_total += p.q.back();
    }
    slots[k] = std::move(p);
  });
  std::vector<TabulatedPoint> out;
  for (auto& s : slots)
    if (s) out.push_back(std::move(*s));
  return out;
}

double integrate_total(const CoareaPropagator& prop, const std::vector<double>& lo,
                       const std::vector<double>& hi, std::size_t per_axis, unsigned workers) {
  const std::size_t N = lo.size();
  if (hi.size() != N || per_axis < 1) throw InvariantError(kModule, "bad quadrature grid");
  std::size_t total = 1;
  double cell = 1.0;
  for (std::size_t l = 0; l < N; ++l) {
    total *= per_axis;
    cell *= (hi[l] - lo[l]) / static_cast<double>(per_axis);
  }
  std::vector<double> values(total, 0.0);
  parallel_for(total, workers, [&](std::size_t k) {
    State y(static_cast<Eigen::Index>(N));
    std::size_t rest = k;
    for (std::size_t l = N; l-- > 0;) {
      const std::size_t c = rest % per_axis;
      rest /= per_axis;
      y[static_cast<Eigen::Index>(l)] =
          lo[l] + (hi[l] - lo[l]) * (static_cast<double>(c) + 0.5) / static_cast<double>(per_axis);
    }
    values[k] = prop.total(y);
  });
  double acc = 0.0;
  for (double v : values) acc += v;
  return acc * cell;
}

}  // namespace pdmp
