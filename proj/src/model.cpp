#include "pdmp/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdmp/numerics.hpp"
#include "pdmp/rng.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "model";

[[noreturn]] void fail(const std::string& what) { throw InvariantError(kModule, what); }

void require_bound(double bound, double floor) {
  if (!std::isfinite(bound) || bound <= 0.0) fail("rate bound must be finite and positive");
  if (!std::isfinite(floor) || floor < 0.0) fail("rate floor must be finite and nonnegative");
  if (floor > bound) fail("rate floor exceeds rate bound");
}

std::vector<State> sample_states(int dimension, int count, double lo, double hi,
                                 std::uint64_t seed) {
  Rng rng({seed, 0});
  std::vector<State> out;
  out.reserve(static_cast<std::size_t>(count));
  for (int c = 0; c < count; ++c) {
    State x(dimension);
    for (int l = 0; l < dimension; ++l) x[l] = rng.uniform(lo, hi);
    out.push_back(std::move(x));
  }
  return out;
}

ModelParts non_interacting_parts(std::shared_ptr<const NonInteractingSpec> spec,
                                 std::string name) {
  spec->validate();
  const int n = spec->dimension;
  ModelParts parts;
  parts.name = std::move(name);
  parts.dimension = n;
  parts.house_of_cards = true;
  parts.rate_bound = spec->rate_bound();

  parts.drift = [spec](const State& x) {
    State v(x.size());
    for (Eigen::Index l = 0; l < x.size(); ++l) v[l] = spec->drift(x[l]);
    return v;
  };
  parts.drift_jacobian = [spec](const State& x) {
    Matrix m = Matrix::Zero(x.size(), x.size());
    for (Eigen::Index l = 0; l < x.size(); ++l) m(l, l) = spec->drift_derivative(x[l]);
    return m;
  };
  for (int i = 0; i < n; ++i) {
    parts.jump_maps.push_back([spec, i](const State& x) {
      State y(x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j)
        y[j] = (j == i) ? 0.0 : spec->jump(i, static_cast<int>(j), x[j]);
      return y;
    });
    parts.jump_jacobians.push_back([spec, i](const State& x) {
      Matrix m = Matrix::Zero(x.size(), x.size());
      for (Eigen::Index j = 0; j < x.size(); ++j)
        if (j != i) m(j, j) = spec->jump_derivative(i, static_cast<int>(j), x[j]);
      return m;
    });
    parts.rates.push_back([spec, i](const State& x) { return spec->rates[i](x[i]); });
  }

  if (spec->closed_form) {
    const ScalarClosedForm cf = *spec->closed_form;
    ExactFlow exact;
    exact.flow = [cf](const State& x, double t) {
      State y(x.size());
      for (Eigen::Index l = 0; l < x.size(); ++l) y[l] = cf.flow(x[l], t);
      return y;
    };
    exact.sensitivity = [cf](const State& x, double t) {
      Matrix m = Matrix::Zero(x.size(), x.size());
      for (Eigen::Index l = 0; l < x.size(); ++l) m(l, l) = 1.0 / cf.inverse_sensitivity(x[l], t);
      return m;
    };
    exact.inverse_sensitivity = [cf](const State& x, double t) {
      Matrix m = Matrix::Zero(x.size(), x.size());
      for (Eigen::Index l = 0; l < x.size(); ++l) m(l, l) = cf.inverse_sensitivity(x[l], t);
      return m;
    };
    parts.exact_flow = std::move(exact);
  }
  parts.structure = std::move(spec);
  return parts;
}

}  // namespace

// ---------------------------------------------------------------------------
// RateFunction

RateFunction::RateFunction(Kind kind, ScalarMap fn, double bound, double floor,
                           std::vector<double> params)
    : kind_(kind), fn_(std::move(fn)), bound_(bound), floor_(floor), params_(std::move(params)) {
  require_bound(bound_, floor_);
}

RateFunction RateFunction::constant(double value, std::optional<double> bound) {
  if (!std::isfinite(value) || value < 0.0) fail("constant rate must be finite and nonnegative");
  const double b = bound.value_or(value);
  if (b < value) fail("constant rate exceeds its declared bound");
  if (b <= 0.0) fail("rate bound must be finite and positive");
  return RateFunction(Kind::constant, [value](double) { return value; }, b, value,
                      {value, b});
}

RateFunction RateFunction::sigmoid(double floor, double bound, double slope, double center) {
  require_bound(bound, floor);
  auto fn = [=](double v) {
    const double s = 1.0 / (1.0 + std::exp(-slope * (v - center)));
    return std::min(bound, floor + (bound - floor) * s);
  };
  return RateFunction(Kind::sigmoid, fn, bound, floor, {floor, bound, slope, center});
}

RateFunction RateFunction::affine_clipped(double intercept, double slope, double floor,
                                          double bound) {
  require_bound(bound, floor);
  auto fn = [=](double v) { return std::clamp(intercept + slope * v, floor, bound); };
  return RateFunction(Kind::affine_clipped, fn, bound, floor, {intercept, slope, floor, bound});
}

RateFunction RateFunction::custom(ScalarMap fn, double bound, double floor) {
  if (!fn) fail("custom rate needs a function");
  return RateFunction(Kind::custom, std::move(fn), bound, floor, {});
}

// ---------------------------------------------------------------------------
// NonInteractingSpec

double NonInteractingSpec::rate_floor() const {
  double f0 = std::numeric_limits<double>::infinity();
  for (const auto& r : rates) f0 = std::min(f0, r.floor());
  return f0;
}

double NonInteractingSpec::rate_bound() const {
  double F = 0.0;
  for (const auto& r : rates) F = std::max(F, r.bound());
  return F;
}

void NonInteractingSpec::validate() const {
  if (dimension < 1) fail("dimension must be positive");
  if (!drift || !drift_derivative) fail("scalar drift and its derivative are required");
  if (static_cast<int>(rates.size()) != dimension) fail("need one rate function per particle");
  if (static_cast<int>(shifts.size()) != dimension) fail("need an N x N table of jump shifts");
  if (!(a > 0.0)) fail("constant a must be positive");
  if (!(A >= 0.0)) fail("constant A must be nonnegative");
  if (!(B > 0.0)) fail("drift-derivative bound B must be positive");
  constexpr double kSlack = 1e-12;
  for (int i = 0; i < dimension; ++i) {
    if (static_cast<int>(shifts[i].size()) != dimension) fail("jump shift table must be N x N");
    for (int j = 0; j < dimension; ++j) {
      if (i == j) continue;
      const auto& s = shifts[i][j];
      if (!s.value || !s.derivative) fail("jump shift a_i^j and its derivative are required");
      for (int k = 0; k <= 200; ++k) {
        const double v = -10.0 + 0.1 * k;
        const double d = s.derivative(v);
        if (std::abs(1.0 + d) < a - kSlack) {
          std::ostringstream os;
          os << "|1 + (a_" << i + 1 << "^" << j + 1 << ")'(" << v << ")| < a";
          fail(os.str());
        }
        if (std::abs(s.value(v)) > A + kSlack || std::abs(d) > A + kSlack) {
          std::ostringstream os;
          os << "a_" << i + 1 << "^" << j + 1 << " or its derivative exceeds A at v = " << v;
          fail(os.str());
        }
        const double h = 1e-5;
        const double fd = (s.value(v + h) - s.value(v - h)) / (2 * h);
        if (std::abs(fd - d) > 1e-4) fail("supplied shift derivative disagrees with central differences");
      }
    }
  }
  for (int i = 0; i < dimension; ++i) {
    for (int k = 0; k <= 200; ++k) {
      const double v = -10.0 + 0.1 * k;
      const double f = rates[i](v);
      if (!(f >= rates[i].floor() - kSlack) || !(f <= rates[i].bound()))
        fail("rate function leaves [floor, bound] on the sampled domain");
    }
  }
}

// ---------------------------------------------------------------------------
// ModelSpec

ModelSpec::ModelSpec(ModelParts parts) : parts_(std::move(parts)) {
  const int n = parts_.dimension;
  if (n < 1) fail("dimension must be positive");
  if (!parts_.drift) fail("drift is required");
  if (static_cast<int>(parts_.jump_maps.size()) != n) fail("need one jump map per particle");
  if (static_cast<int>(parts_.rates.size()) != n) fail("need one rate per particle");
  if (!parts_.jump_jacobians.empty() && static_cast<int>(parts_.jump_jacobians.size()) != n)
    fail("jump Jacobians must be absent or one per particle");
  if (!std::isfinite(parts_.rate_bound) || parts_.rate_bound <= 0.0)
    fail("a finite positive rate bound must be declared");
  for (const auto& m : parts_.jump_maps)
    if (!m) fail("jump map missing");
  for (const auto& r : parts_.rates)
    if (!r) fail("rate function missing");

  if (parts_.house_of_cards) {
    for (const State& x : sample_states(n, 16, -10.0, 10.0, 0x5eed)) {
      for (int i = 0; i < n; ++i) {
        if (parts_.jump_maps[i](x)[i] != 0.0)
          fail("house-of-cards model must reset the jumping coordinate to exactly 0");
      }
    }
  }
}

State ModelSpec::drift(const State& x) const { return parts_.drift(x); }

Matrix ModelSpec::drift_jacobian(const State& x) const {
  if (parts_.drift_jacobian) return parts_.drift_jacobian(x);
  return numerics::fd_jacobian(parts_.drift, x, 1e-6, true);
}

void ModelSpec::check_index(int i) const {
  if (i < 0 || i >= parts_.dimension) {
    std::ostringstream os;
    os << "particle index " << i << " out of range [0, " << parts_.dimension << ")";
    throw InvariantError(kModule, os.str());
  }
}

double ModelSpec::rate(int i, const State& x) const {
  check_index(i);
  const double f = parts_.rates[i](x);
  if (!(f >= 0.0) || !(f <= parts_.rate_bound)) {
    std::ostringstream os;
    os.precision(17);
    os << "rate f_" << i + 1 << " = " << f << " outside [0, " << parts_.rate_bound
       << "] (declared bound)";
    throw InvariantError(kModule, os.str());
  }
  return f;
}

void ModelSpec::rates(const State& x, Eigen::Ref<Eigen::VectorXd> out) const {
  for (int i = 0; i < parts_.dimension; ++i) out[i] = rate(i, x);
}

double total_rate(const ModelSpec& model, const State& x) {
  double sum = 0.0;
  for (int i = 0; i < model.dimension(); ++i) sum += model.rate(i, x);
  return sum;
}

State jump(const ModelSpec& model, int i, const State& x) {
  model.check_index(i);
  return model.parts().jump_maps[i](x);
}

Matrix jump_jacobian(const ModelSpec& model, int i, const State& x) {
  model.check_index(i);
  const auto& jacs = model.parts().jump_jacobians;
  if (!jacs.empty() && jacs[i]) return jacs[i](x);
  return numerics::fd_jacobian(model.parts().jump_maps[i], x, 1e-6, true);
}

// ---------------------------------------------------------------------------
// Builders

NonInteractingSpec neuron_structure(const NeuronParams& p) {
  if (p.N < 1) fail("neuron model needs N >= 1");
  if (!(p.lambda > 0.0) || !std::isfinite(p.lambda)) fail("lambda must be positive");
  if (!(p.v_star > 0.0) || !std::isfinite(p.v_star)) fail("v_star must be positive");
  if (p.weights.rows() != p.N || p.weights.cols() != p.N) fail("weights must be N x N");
  if (static_cast<int>(p.rates.size()) != p.N) fail("need one rate function per neuron");

  NonInteractingSpec spec;
  spec.dimension = p.N;
  const double lambda = p.lambda;
  const double vs = p.v_star;
  spec.drift = [=](double v) { return -lambda * (v - vs); };
  spec.drift_derivative = [=](double) { return -lambda; };
  spec.shifts.assign(p.N, std::vector<PairShift>(p.N));
  double A = 0.0;
  for (int i = 0; i < p.N; ++i) {
    for (int j = 0; j < p.N; ++j) {
      if (i == j) continue;
      const double w = p.weights(i, j);
      if (!(w >= 0.0) || !std::isfinite(w)) fail("synaptic weights must be nonnegative");
      spec.shifts[i][j] = {[w](double) { return w; }, [](double) { return 0.0; }};
      A = std::max(A, w);
    }
  }
  spec.rates = p.rates;
  spec.a = 1.0;
  spec.A = A;
  spec.B = lambda;

  ScalarClosedForm cf;
  cf.flow = [=](double v, double t) { return vs + std::exp(-lambda * t) * (v - vs); };
  cf.drift_along = [=](double v, double t) { return -lambda * std::exp(-lambda * t) * (v - vs); };
  cf.inverse_sensitivity = [=](double, double t) { return std::exp(lambda * t); };
  cf.kappa = [=](double y) {
    if (y < 0.0 || y >= vs)
      throw DomainError("flow", "level not reachable from 0 along the neuron flow", y < 0 ? 0.0 : vs);
    return -std::log1p(-y / vs) / lambda;
  };
  const Matrix W = p.weights;
  cf.jump_flow_inverse = [=](int i, int j, double t, double y) {
    return vs + std::exp(lambda * t) * (y - vs) - W(i, j);
  };
  cf.limit_from_zero = vs;
  spec.closed_form = std::move(cf);
  return spec;
}

ModelSpec build_non_interacting_model(std::shared_ptr<const NonInteractingSpec> spec,
                                      std::string name) {
  if (!spec) fail("null non-interacting spec");
  return ModelSpec(non_interacting_parts(std::move(spec), std::move(name)));
}

ModelSpec build_neuron_model(const NeuronParams& params) {
  auto structure = std::make_shared<const NonInteractingSpec>(neuron_structure(params));
  ModelParts parts = non_interacting_parts(structure, "neuron");
  parts.neuron = std::make_shared<const NeuronParams>(params);
  const double lambda = params.lambda;
  // Exact linear-drift Jacobian.
  parts.drift_jacobian = [lambda](const State& x) {
    return Matrix(-lambda * Matrix::Identity(x.size(), x.size()));
  };
  return ModelSpec(std::move(parts));
}

// ---------------------------------------------------------------------------

ModelCheck check_model(const ModelSpec& model, int count, double lo, double hi, double fd_step,
                       double jacobian_tol) {
  ModelCheck out;
  const int n = model.dimension();
  for (const State& x : sample_states(n, count, lo, hi, 0xc0ffee)) {
    for (int i = 0; i < n; ++i) {
      const Matrix analytic = jump_jacobian(model, i, x);
      const Matrix fd = numerics::fd_jacobian(model.parts().jump_maps[i], x, fd_step, false);
      out.max_jacobian_error =
          std::max(out.max_jacobian_error, (analytic - fd).cwiseAbs().rowwise().sum().maxCoeff());
      if (model.house_of_cards())
        out.max_reset_value = std::max(out.max_reset_value, std::abs(jump(model, i, x)[i]));
    }
    out.max_rate_excess = std::max(out.max_rate_excess, total_rate(model, x) - n * model.rate_bound());
  }
  out.ok = out.max_jacobian_error < jacobian_tol && out.max_reset_value == 0.0 &&
           out.max_rate_excess <= 1e-12;
  return out;
}

}  // namespace pdmp
