#include "pdmp/ipp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pdmp/memo.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "ipp";
constexpr int kSupportProbes = 2001;

const NonInteractingSpec& structure_of(const ModelSpec& model) {
  if (model.structure() == nullptr)
    throw InvariantError(kModule, "integration by parts needs a non-interacting model");
  return *model.structure();
}

numerics::MeanSe estimate(const std::vector<double>& v) {
  if (v.size() >= 60) return numerics::batch_means(v, 30);
  return numerics::mean_and_se(v);
}

template <typename Fn>
void for_support(const ScalarTest& g, Fn&& fn) {
  for (int k = 0; k < kSupportProbes; ++k)
    fn(g.lo + (g.hi - g.lo) * static_cast<double>(k) / (kSupportProbes - 1));
}

}  // namespace

ScalarTest bump_test_function(double lo, double hi, double amplitude) {
  if (!(hi > lo)) throw InvariantError(kModule, "bump support must have hi > lo");
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  auto phi = [](double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; };
  ScalarTest t;
  t.lo = lo;
  t.hi = hi;
  t.sup_abs = std::abs(amplitude) * std::exp(-1.0);
  t.g = [=](double v) { return amplitude * phi((v - mid) / half); };
  t.d1 = [=](double v) {
    const double u = (v - mid) / half;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return amplitude * phi(u) * (-2.0 * u / (s * s)) / half;
  };
  t.d2 = [=](double v) {
    const double u = (v - mid) / half;
    if (std::abs(u) >= 1.0) return 0.0;
    const double s = 1.0 - u * u;
    return amplitude * phi(u) * (4.0 * u * u / std::pow(s, 4) - (2.0 + 6.0 * u * u) / std::pow(s, 3)) /
           (half * half);
  };
  return t;
}

IdentityCheck ipp_check(const ModelSpec& model, const TestFunction& H, const ScalarTest& g,
                        const RegionSpec& region, const EmpiricalMeasure& m,
                        const IntegratorConfig& cfg, unsigned workers) {
  const NonInteractingSpec& spec = structure_of(model);
  if (m.size() == 0) throw InvariantError(kModule, "empty empirical measure");
  for_support(g, [&](double v) {
    if (!region.contains(spec, v))
      throw InvariantError(kModule, "support of g leaves the region |v| > (k+2)A, |b~(v)| > d");
  });

  const int N = model.dimension();
  auto grad_H = [&](const State& z) -> State {
    if (H.gradient) return H.gradient(z);
    return numerics::fd_gradient([&](const State& s) { return H.value(s); }, z);
  };

  std::vector<double> lhs(m.size(), 0.0), rhs(m.size(), 0.0);
  StartMemo<std::pair<double, double>> memo;
  const double total_weight = m.weight_sum();
  parallel_for(m.size(), workers, [&](std::size_t s) {
    const State& x = m.samples[s];
    const double w = m.weights[s] * static_cast<double>(m.size()) / total_weight;
    double L = 0.0, R = 0.0;
    for (int l = 0; l < N; ++l) {
      const double fl = model.rate(l, x);
      if (fl == 0.0) continue;
      const State y = jump(model, l, x);
      if (auto hit = memo.find(l, y)) {
        L += fl * hit->first;
        R += fl * hit->second;
        continue;
      }
      double il = 0.0, ir = 0.0;
      integrate_until_truncation(model, y, cfg,
                                 [&](double, const State& z, double e, double weight) {
        const double v = z[0];
        const double g1 = g.d1(v);
        const double g2 = g.d2(v);
        // Every term vanishes off supp g (and off its shifted copies).
        double sub = 0.0;
        for (int i = 1; i < N; ++i) {
          const double dv = spec.jump_derivative(i, 0, v);
          const double phi = g.d1(spec.jump(i, 0, v)) * dv;
          if (phi == 0.0) continue;
          const double Gi = model.rate(i, z) / (spec.drift(spec.jump(i, 0, v)) * dv) *
                            H.value(jump(model, i, z));
          sub += Gi * phi;
        }
        if (g1 == 0.0 && g2 == 0.0 && sub == 0.0) return;
        const double Hz = H.value(z);
        double main = 0.0;
        if (g1 != 0.0) {
          const double GH =
              (total_rate(model, z) * Hz - grad_H(z).dot(model.drift(z)) + Hz * spec.drift_derivative(v)) /
              spec.drift(v);
          main = GH * g1;
        }
        il += weight * e * Hz * g2;
        ir += weight * e * (main - sub);
      });
      memo.store(l, y, {il, ir});
      L += fl * il;
      R += fl * ir;
    }
    lhs[s] = w * L;
    rhs[s] = w * R;
  });

  const numerics::MeanSe a = estimate(lhs);
  const numerics::MeanSe b = estimate(rhs);
  IdentityCheck out;
  out.lhs = a.mean;
  out.rhs = b.mean;
  out.residual = a.mean - b.mean;
  out.se = numerics::combined_se(a.se, b.se);
  out.pass = std::abs(out.residual) <= 3.0 * out.se + 1e-8 * (std::abs(a.mean) + std::abs(b.mean));
  return out;
}

BoundCheck ipp_bound_check(const ModelSpec& model, const ScalarTest& g, const EmpiricalMeasure& m) {
  const NonInteractingSpec& spec = structure_of(model);
  if (model.dimension() != 1) throw InvariantError(kModule, "the bound check is one-dimensional");
  BoundCheck out;
  out.epsilon = std::numeric_limits<double>::infinity();
  double sup = 0.0;
  for_support(g, [&](double v) {
    out.epsilon = std::min(out.epsilon, std::abs(spec.drift(v)));
    sup = std::max(sup, spec.rates[0](v) + std::abs(spec.drift_derivative(v)));
  });
  if (!(out.epsilon > 0.0)) throw InvariantError(kModule, "drift vanishes on the support of g");
  out.C = sup / out.epsilon;
  out.bound = 2.0 * out.C * g.sup_abs;

  std::vector<double> v(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) v[s] = g.d1(m.samples[s][0]);
  const numerics::MeanSe ms = estimate(v);
  out.m_gprime = ms.mean;
  out.se = ms.se;
  out.pass = std::abs(ms.mean) <= out.bound;
  return out;
}

}  // namespace pdmp
