#include "pdmp/density.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pdmp/memo.hpp"
#include "pdmp/parallel.hpp"

namespace pdmp {

namespace {

constexpr const char* kModule = "density";

numerics::MeanSe sequence_estimate(const std::vector<double>& values, std::size_t batches) {
  if (values.empty()) throw InvariantError(kModule, "estimate over an empty sample");
  if (batches > 1 && values.size() >= 2 * batches) return numerics::batch_means(values, batches);
  return numerics::mean_and_se(values);
}

std::vector<double> coordinate(const EmpiricalMeasure& m, int coord) {
  if (m.size() == 0) throw InvariantError(kModule, "empty empirical measure");
  if (coord < 0 || coord >= m.samples.front().size())
    throw InvariantError(kModule, "coordinate out of range");
  std::vector<double> out(m.size());
  for (std::size_t s = 0; s < m.size(); ++s) out[s] = m.samples[s][coord];
  return out;
}

void normalize(GridDensity& gd) {
  const double mass = gd.integral();
  if (!(mass > 0.0)) throw InvariantError(kModule, "grid density has no mass");
  for (double& v : gd.values) v /= mass;
}

}  // namespace

numerics::MeanSe EmpiricalMeasure::mean(const TestFunction& g, std::size_t batches) const {
  if (samples.empty()) throw InvariantError(kModule, "empty empirical measure");
  std::vector<double> v(samples.size());
  const double total = weight_sum();
  for (std::size_t s = 0; s < samples.size(); ++s)
    v[s] = g.value(samples[s]) * weights[s] * static_cast<double>(samples.size()) / total;
  return sequence_estimate(v, batches);
}

double EmpiricalMeasure::weight_sum() const {
  return std::accumulate(weights.begin(), weights.end(), 0.0);
}

EmpiricalMeasure estimate_invariant(const ModelSpec& model, const SamplingConfig& sc,
                                    const IntegratorConfig& cfg, unsigned workers) {
  if (!(sc.horizon > 0.0) || !(sc.stride > 0.0) || sc.paths == 0)
    throw InvariantError(kModule, "sampling needs a positive horizon, stride and path count");
  if (!(sc.burn_in_fraction >= 0.0 && sc.burn_in_fraction < 1.0))
    throw InvariantError(kModule, "burn-in fraction must lie in [0, 1)");
  const State x0 = sc.start.value_or(State::Zero(model.dimension()));
  if (x0.size() != model.dimension()) throw InvariantError(kModule, "start state has the wrong dimension");

  const double burn = sc.burn_in_fraction * sc.horizon;
  std::vector<std::vector<State>> per_path(sc.paths);
  parallel_for(sc.paths, workers, [&](std::size_t p) {
    const PathRecord path = simulate_path(model, x0, StopRule{sc.horizon, std::nullopt},
                                          RngSpec{sc.seed, p}, cfg);
    auto& out = per_path[p];
    double t = burn;
    for (std::size_t k = 0; k <= path.jumps() && t <= path.final_time; ++k) {
      const double start = path.segment_start(k);
      const double end = path.segment_end(k);
      const bool last = k == path.jumps();
      if (!(t < end || (last && t <= end))) continue;
      FlowCursor cursor(model, path.segment_state(k), cfg);
      while (t < end || (last && t <= end)) {
        out.push_back(cursor.state_at(t - start));
        t = burn + static_cast<double>(out.size()) * sc.stride;
      }
    }
  });

  EmpiricalMeasure m;
  m.provenance = "time-sampled";
  m.seed = sc.seed;
  for (auto& v : per_path)
    for (auto& x : v) m.samples.push_back(std::move(x));
  if (m.samples.empty()) throw InvariantError(kModule, "no states sampled after burn-in");
  m.weights.assign(m.samples.size(), 1.0 / static_cast<double>(m.samples.size()));
  return m;
}

EmpiricalMeasure jump_chain_measure(const PathRecord& path, double burn_in_fraction) {
  const auto burn = static_cast<std::size_t>(std::floor(burn_in_fraction * static_cast<double>(path.jumps())));
  EmpiricalMeasure m;
  m.provenance = "jump-chain";
  m.seed = path.rng.seed;
  m.samples.assign(path.pre.begin() + static_cast<std::ptrdiff_t>(burn), path.pre.end());
  if (m.samples.empty()) throw InvariantError(kModule, "no jumps after burn-in");
  m.weights.assign(m.samples.size(), 1.0 / static_cast<double>(m.samples.size()));
  return m;
}

// ---------------------------------------------------------------------------

double GridDensity::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes) v *= a.width();
  return v;
}

double GridDensity::integral() const {
  return std::accumulate(values.begin(), values.end(), 0.0) * cell_volume();
}

GridDensity histogram(const EmpiricalMeasure& m, int coord) {
  const std::vector<double> x = coordinate(m, coord);
  const auto [mn, mx] = std::minmax_element(x.begin(), x.end());
  const double iqr = numerics::quantile(x, 0.75) - numerics::quantile(x, 0.25);
  const double width = 2.0 * iqr * std::cbrt(1.0 / static_cast<double>(x.size()));
  const double span = *mx - *mn;
  std::size_t bins = 1;
  if (width > 0.0 && span > 0.0) bins = static_cast<std::size_t>(std::clamp(std::ceil(span / width), 1.0, 1e5));
  GridDensity gd;
  gd.method = "histogram/freedman-diaconis";
  const double pad = span > 0.0 ? 0.0 : 0.5;
  gd.axes = {GridAxis{*mn - pad, *mx + pad, bins}};
  gd.values.assign(bins, 0.0);
  const GridAxis& ax = gd.axes.front();
  for (double v : x) {
    auto k = static_cast<std::size_t>(std::floor((v - ax.lo) / ax.width()));
    gd.values[std::min(k, bins - 1)] += 1.0;
  }
  normalize(gd);
  return gd;
}

double silverman_bandwidth(const std::vector<double>& data) {
  if (data.size() < 2) throw InvariantError(kModule, "bandwidth needs at least two values");
  const numerics::MeanSe ms = numerics::mean_and_se(data);
  const double sd = ms.se * std::sqrt(static_cast<double>(data.size()));
  const double iqr = numerics::quantile(data, 0.75) - numerics::quantile(data, 0.25);
  double spread = std::min(sd, iqr / 1.34);
  if (!(spread > 0.0)) spread = sd > 0.0 ? sd : 1.0;
  return 0.9 * spread * std::pow(static_cast<double>(data.size()), -0.2);
}

GridDensity kde(const std::vector<double>& data, std::size_t cells, double bandwidth_scale) {
  if (cells < 2) throw InvariantError(kModule, "kde needs at least two cells");
  const double bw = bandwidth_scale * silverman_bandwidth(data);
  const auto [mn, mx] = std::minmax_element(data.begin(), data.end());
  GridDensity gd;
  gd.method = "kde/silverman";
  gd.bandwidth = bw;
  gd.axes = {GridAxis{*mn - 4.0 * bw, *mx + 4.0 * bw, cells}};
  gd.values.assign(cells, 0.0);
  const GridAxis& ax = gd.axes.front();

  // Sorted data lets each cell visit only the points within 8 bandwidths.
  std::vector<double> sorted(data);
  std::sort(sorted.begin(), sorted.end());
  const double reach = 8.0 * bw;
  for (std::size_t c = 0; c < cells; ++c) {
    const double y = ax.center(c);
    auto lo = std::lower_bound(sorted.begin(), sorted.end(), y - reach);
    auto hi = std::upper_bound(lo, sorted.end(), y + reach);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
      const double u = (y - *it) / bw;
      acc += std::exp(-0.5 * u * u);
    }
    gd.values[c] = acc;
  }
  normalize(gd);
  return gd;
}

GridDensity kde(const EmpiricalMeasure& m, int coord, std::size_t cells, double bandwidth_scale) {
  return kde(coordinate(m, coord), cells, bandwidth_scale);
}

// ---------------------------------------------------------------------------

RepresentationResult representation_rhs(const ModelSpec& model, const EmpiricalMeasure& m,
                                        const std::vector<TestFunction>& g,
                                        const IntegratorConfig& cfg, unsigned workers,
                                        std::size_t batches) {
  if (m.size() == 0) throw InvariantError(kModule, "empty empirical measure");
  if (!model.house_of_cards())
    throw InvariantError(kModule, "the representation formula needs house-of-cards jumps");
  const int n = model.dimension();
  const std::size_t L = g.size();
  std::vector<std::vector<double>> per_sample(L, std::vector<double>(m.size(), 0.0));
  std::vector<char> capped(m.size(), 0);
  const double total_weight = m.weight_sum();
  struct Inner {
    std::vector<double> values;
    bool capped = false;
  };
  StartMemo<Inner> memo;

  parallel_for(m.size(), workers, [&](std::size_t s) {
    const State& x = m.samples[s];
    const double w = m.weights[s] * static_cast<double>(m.size()) / total_weight;
    std::vector<double> acc(L, 0.0);
    for (int i = 0; i < n; ++i) {
      const double fi = model.rate(i, x);
      if (fi == 0.0) continue;
      const State y = jump(model, i, x);
      std::optional<Inner> inner = memo.find(i, y);
      if (!inner) {
        inner = Inner{std::vector<double>(L, 0.0), false};
        inner->capped = integrate_until_truncation(
            model, y, cfg, [&](double, const State& z, double e, double weight) {
              for (std::size_t l = 0; l < L; ++l) inner->values[l] += weight * e * g[l].value(z);
            }).capped;
        memo.store(i, y, *inner);
      }
      if (inner->capped) capped[s] = 1;
      for (std::size_t l = 0; l < L; ++l) acc[l] += fi * inner->values[l];
    }
    for (std::size_t l = 0; l < L; ++l) per_sample[l][s] = w * acc[l];
  });

  RepresentationResult out;
  for (std::size_t l = 0; l < L; ++l) out.values.push_back(sequence_estimate(per_sample[l], batches));
  out.capped = static_cast<std::size_t>(std::count(capped.begin(), capped.end(), 1));
  return out;
}

// ---------------------------------------------------------------------------

bool RegionSpec::contains(const NonInteractingSpec& spec, double v) const {
  return static_cast<double>(k + 2) * A < std::abs(v) && std::abs(spec.drift(v)) > d;
}

std::vector<double> smoothness_probe(const GridDensity& gd, const NonInteractingSpec& spec,
                                     const RegionSpec& region, int order) {
  if (gd.axes.size() != 1) throw InvariantError(kModule, "smoothness probe expects a 1D grid density");
  if (order < 1) throw InvariantError(kModule, "probe order must be >= 1");
  const GridAxis& ax = gd.axes.front();
  const double w = ax.width();
  std::vector<char> inside(ax.count);
  for (std::size_t c = 0; c < ax.count; ++c) inside[c] = region.contains(spec, ax.center(c));

  std::vector<double> sup(static_cast<std::size_t>(order), 0.0);
  for (int m = 1; m <= order; ++m) {
    const auto span = static_cast<std::size_t>(m);
    bool any = false;
    for (std::size_t s = 0; s + span < ax.count; ++s) {
      if (!std::all_of(inside.begin() + static_cast<std::ptrdiff_t>(s),
                       inside.begin() + static_cast<std::ptrdiff_t>(s + span + 1),
                       [](char c) { return c != 0; }))
        continue;
      double acc = 0.0;
      double binom = 1.0;
      for (int j = 0; j <= m; ++j) {
        const double sign = ((m - j) % 2 == 0) ? 1.0 : -1.0;
        acc += sign * binom * gd.values[s + static_cast<std::size_t>(j)];
        binom = binom * static_cast<double>(m - j) / static_cast<double>(j + 1);
      }
      sup[static_cast<std::size_t>(m - 1)] =
          std::max(sup[static_cast<std::size_t>(m - 1)], std::abs(acc) / std::pow(w, m));
      any = true;
    }
    if (!any) throw InvariantError(kModule, "region holds no complete stencil on the grid");
  }
  return sup;
}

RegularityThreshold regularity_threshold(int N, double f0, double B) {
  if (N < 1 || !(B > 0.0) || !(f0 >= 0.0))
    throw InvariantError(kModule, "threshold needs N >= 1, B > 0 and f0 >= 0");
  RegularityThreshold out;
  const double rhs = static_cast<double>(N) * f0 - static_cast<double>(N - 1) * B;
  out.bound = rhs / B;
  auto k = static_cast<long long>(std::ceil(out.bound)) - 1;
  while (B * static_cast<double>(k + 1) < rhs) ++k;
  while (!(B * static_cast<double>(k) < rhs)) --k;
  out.k_star = k;
  out.guaranteed = k >= 0;
  return out;
}

}  // namespace pdmp
