// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Every tolerance and runtime budget is fixed below.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "pdmp/cli.hpp"
#include "pdmp/coarea.hpp"
#include "pdmp/density.hpp"
#include "pdmp/ipp.hpp"
#include "pdmp/skeleton.hpp"
#include "support.hpp"

using namespace pdmp;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

IntegratorConfig rk4(double h = 1e-3) {
  IntegratorConfig cfg;
  cfg.step = h;
  cfg.use_closed_form = false;
  return cfg;
}

JumpSchedule identity_schedule(int N, Rng& rng, double tmax) {
  JumpSchedule s;
  for (int i = 0; i < N; ++i) {
    s.indices.push_back(i);
    s.times.push_back(rng.uniform(0.0, tmax));
  }
  return s;
}

// 1. det σ against λ^N (v*)^N ∏ e^{-λ (s_N - s_{k-1})}.
Verdict neuron_determinant_identity() {
  Rng rng({101, 0});
  double worst_exact = 0.0, worst_rk4 = 0.0;
  for (int N : {2, 3, 5}) {
    const NeuronParams p = testing::neuron_params(N, 0.8, 1.5, 0.25, RateFunction::constant(1.0));
    const ModelSpec m = build_neuron_model(p);
    for (int trial = 0; trial < 100; ++trial) {
      const JumpSchedule s = identity_schedule(N, rng, 2.0);
      State y(N);
      for (int l = 0; l < N; ++l) y[l] = rng.uniform(-2.0, 2.0);
      const double exact = neuron_determinant(s, p.lambda, p.v_star);
      worst_exact = std::max(worst_exact, std::abs(derivation_matrix(m, y, s, {}).sigma.determinant() / exact - 1.0));
      worst_rk4 = std::max(worst_rk4, std::abs(derivation_matrix(m, y, s, rk4()).sigma.determinant() / exact - 1.0));
    }
  }
  return {worst_exact < 1e-6 && worst_rk4 < 1e-4,
          "max rel error exact " + fmt(worst_exact) + " (< 1e-6), rk4 " + fmt(worst_rk4) + " (< 1e-4)"};
}

// 2. σ against central differences in the times.
Verdict sigma_vs_fd() {
  Rng rng({202, 0});
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const bool custom = trial % 2 == 1;
    const int N = custom ? 3 : 2 + trial % 3;
    NeuronParams p = testing::neuron_params(N, rng.uniform(0.5, 1.5), rng.uniform(0.5, 2.0), 0.0,
                                            RateFunction::constant(1.0));
    for (int i = 0; i < N; ++i)
      for (int j = 0; j < N; ++j)
        if (i != j) p.weights(i, j) = rng.uniform(0.0, 0.5);
    const ModelSpec m = custom ? testing::nonlinear(3) : build_neuron_model(p);
    JumpSchedule s;
    const auto len = 1 + rng.below(4);
    for (std::uint64_t k = 0; k < len; ++k) {
      s.indices.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(N))));
      s.times.push_back(rng.uniform(0.0, 1.0));
    }
    State y(N);
    for (int l = 0; l < N; ++l) y[l] = rng.uniform(-2.0, 2.0);
    const IntegratorConfig cfg = rk4();
    const Matrix diff = derivation_matrix(m, y, s, cfg).sigma - derivation_matrix_fd(m, y, s, cfg);
    worst = std::max(worst, diff.cwiseAbs().rowwise().sum().maxCoeff());
  }
  return {worst < 1e-4, "max ||sigma - sigma_FD||_inf " + fmt(worst) + " over 50 triples (< 1e-4)"};
}

// 3. Thinning: waiting times Exp(3) and uniform indices.
Verdict thinning_exactness() {
  const std::size_t n = 100000;
  const ModelSpec m = build_neuron_model(
      testing::neuron_params(3, 1.0, 1.0, 0.2, RateFunction::constant(1.0, 2.0)));  // bound 2: half the candidates rejected
  const PathRecord path = simulate_path(m, State::Zero(3), StopRule{std::nullopt, n}, {303, 0}, rk4(1e-2));
  std::vector<double> gaps(n);
  std::vector<double> counts(3, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    gaps[k] = path.times[k] - (k == 0 ? 0.0 : path.times[k - 1]);
    counts[static_cast<std::size_t>(path.indices[k])] += 1.0;
  }
  std::sort(gaps.begin(), gaps.end());
  double ks = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double F = 1.0 - std::exp(-3.0 * gaps[k]);
    ks = std::max({ks, F - static_cast<double>(k) / n, static_cast<double>(k + 1) / n - F});
  }
  const double critical = 1.6276 / std::sqrt(static_cast<double>(n));  // α = 0.01
  const double sigma = std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / n);
  double worst_z = 0.0;
  for (double c : counts) worst_z = std::max(worst_z, std::abs(c / n - 1.0 / 3.0) / sigma);
  return {ks < critical && worst_z <= 3.0,
          "KS " + fmt(ks) + " < " + fmt(critical) + ", max index deviation " + fmt(worst_z) + " sigma (<= 3)"};
}

// 4 and 5 share one long run.
const std::vector<cli::Check>& long_run() {
  static const std::vector<cli::Check> checks = [] {
    const ModelSpec m = testing::sigmoid_neuron(2);
    IntegratorConfig cfg;
    cfg.step = 1e-2;
    const PathRecord path = simulate_path(m, State::Zero(2), StopRule{1e5, std::nullopt}, {404, 0}, cfg);
    return cli::long_run_checks(m, path, cfg);
  }();
  return checks;
}

Verdict checks_with_prefix(const std::string& prefix) {
  Verdict v;
  std::size_t n = 0;
  double worst = 0.0;
  for (const auto& c : long_run()) {
    if (c.identity.rfind(prefix, 0) != 0) continue;
    ++n;
    v.pass = v.pass && c.pass;
    if (c.se > 0.0) worst = std::max(worst, std::abs(c.lhs - c.rhs) / c.se);
  }
  v.pass = v.pass && n == 5;
  v.detail = std::to_string(n) + " suite functions, worst |diff| / se " + fmt(worst) + " (<= 3)";
  return v;
}

const EmpiricalMeasure& samples(int N) {
  static std::map<int, EmpiricalMeasure> cache;
  auto it = cache.find(N);
  if (it != cache.end()) return it->second;
  SamplingConfig sc;
  sc.horizon = 11112;  // 10^4 states at stride 1 after 10% burn-in
  sc.seed = 600 + static_cast<std::uint64_t>(N);
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  return cache.emplace(N, estimate_invariant(testing::sigmoid_neuron(N), sc, cfg)).first->second;
}

// 6. Representation formula.
Verdict representation() {
  const ModelSpec m = testing::sigmoid_neuron(2);
  const EmpiricalMeasure& mh = samples(2);
  const TestFunction one{"one", [](const State&) { return 1.0; }, {}};
  const TestFunction sin1 = test_function_suite(2)[2];
  IntegratorConfig cfg;
  cfg.step = 1e-2;
  const RepresentationResult r = representation_rhs(m, mh, {one, sin1}, cfg);
  const numerics::MeanSe direct = mh.mean(sin1);
  const double d1 = std::abs(r.values[0].mean - 1.0);
  const double tol1 = std::max(0.01, 3.0 * r.values[0].se);
  const double se2 = numerics::combined_se(r.values[1].se, direct.se);
  const double d2 = std::abs(r.values[1].mean - direct.mean);
  return {d1 <= tol1 && d2 <= 3.0 * se2 && r.capped == 0 && mh.size() >= 10000,
          std::to_string(mh.size()) + " samples: g=1 gives " + fmt(r.values[0].mean) + " (tol " + fmt(tol1) +
              "), sin x1 diff " + fmt(d2) + " <= " + fmt(3.0 * se2)};
}

// 7. Coarea propagation.
Verdict coarea() {
  const double f = 1.5, a = 0.2;
  const NonInteractingSpec spec = neuron_structure(testing::neuron_params(2, 1.0, 1.0, a, RateFunction::constant(f)));
  const CompactDensity r = normalize_product_input(spec, smooth_bump(0.1, 0.6));
  const CoareaPropagator generic(spec, r, rk4(1e-2));
  double worst = 0.0;
  std::size_t compared = 0;
  for (int p = 0; p < 50; ++p)
    for (int q = 0; q < 50; ++q) {
      const State y(Eigen::Vector2d(0.99 * p / 49.0, 0.99 * q / 49.0));
      for (int i = 0; i < 2; ++i) {
        const double exact = neuron_q_closed_form(2, 1.0, 1.0, f, a, r, i, y);
        if (exact <= 1e-6) continue;
        worst = std::max(worst, std::abs(generic.q(i, y) / exact - 1.0));
        ++compared;
      }
    }
  const CoareaPropagator closed(spec, r, IntegratorConfig{});
  const double mass = integrate_total(closed, {0.0, 0.0}, {1.0, 1.0}, 200);
  const double mass_generic = integrate_total(generic, {0.0, 0.0}, {1.0, 1.0}, 100);
  return {worst < 1e-3 && std::abs(mass - 1.0) <= 1e-2 && std::abs(mass_generic - 1.0) <= 1e-2 && compared > 0,
          "max rel diff " + fmt(worst) + " over " + std::to_string(compared) + " values (< 1e-3), mass " +
              fmt(mass) + " / generic " + fmt(mass_generic) + " (1 +- 1e-2)"};
}

// 8. One-dimensional integration by parts and the bound.
Verdict ipp() {
  const ModelSpec m = testing::sigmoid_neuron(1);
  const EmpiricalMeasure& mh = samples(1);
  const TestFunction one{"one", [](const State&) { return 1.0; },
                         [](const State& x) { return State::Zero(x.size()); }};
  const RegionSpec region{0.1, 0, 0.0};
  const IdentityCheck c = ipp_check(m, one, bump_test_function(0.2, 0.7), region, mh, rk4());
  Verdict v{c.pass && mh.size() >= 10000,
            "residual " + fmt(c.residual) + " vs 3 se " + fmt(3.0 * c.se) + " (lhs " + fmt(c.lhs) + ")"};
  int bounds = 0;
  for (const ScalarTest& g : {bump_test_function(0.2, 0.7), bump_test_function(0.3, 0.85, 2.0),
                              bump_test_function(0.05, 0.4, 0.5)}) {
    const BoundCheck b = ipp_bound_check(m, g, mh);
    bounds += b.pass ? 1 : 0;
  }
  v.pass = v.pass && bounds == 3;
  v.detail += ", bound holds for " + std::to_string(bounds) + "/3 g";
  return v;
}

// 9. κ inversion, drift sign and equilibrium avoidance.
Verdict kappa_and_flow() {
  const NonInteractingSpec spec =
      neuron_structure(testing::neuron_params(2, 1.0, 1.5, 0.2, RateFunction::constant(1.0)));
  const IntegratorConfig cfg = rk4();
  double inv = 0.0, closed = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double y = 1.5 * k / 101.0;
    const double t = kappa(spec, y, cfg);
    inv = std::max(inv, std::abs(scalar_flow(spec, 0.0, t, cfg) - y));
    closed = std::max(closed, std::abs(t - std::log(1.5 / (1.5 - y))));
  }
  // RK4 states round onto the equilibrium within T = 50, so the witness uses
  // the exact drift along the flow.
  double avoid = std::numeric_limits<double>::infinity();
  for (int k = 0; k < 20; ++k) {
    const double v = -2.0 + 5.0 * k / 19.0;
    if (v == 1.5) continue;
    avoid = std::min(avoid, equilibrium_avoidance(spec, v, 50.0, IntegratorConfig{}));
  }
  return {inv < 1e-10 && closed < 1e-9 && avoid > 0.0,
          "max |flow(kappa(y)) - y| " + fmt(inv) + " (< 1e-10), |kappa - log| " + fmt(closed) +
              " (< 1e-9), min avoidance " + fmt(avoid) + " (> 0)"};
}

// 10. Regularity threshold.
Verdict threshold() {
  const RegularityThreshold r = regularity_threshold(3, 2.0, 1.0);
  bool ok = r.k_star == 3 && r.guaranteed;
  for (int N = 1; N <= 10; ++N) {
    const double edge = (N - 1.0) / N;
    for (double f0 : {0.0, 0.5 * edge, edge}) ok = ok && !regularity_threshold(N, f0, 1.0).guaranteed;
    long long prev = regularity_threshold(N, 0.0, 1.0).k_star;
    for (int s = 1; s <= 100; ++s) {
      const long long k = regularity_threshold(N, 0.05 * s, 1.0).k_star;
      ok = ok && k >= prev;
      prev = k;
    }
  }
  return {ok, "k*(N=3, f0=2, B=1) = " + std::to_string(r.k_star) + ", no guarantee for f0 <= (N-1)/N, monotone in f0"};
}

// 11. Byte-identical artifacts.
Verdict reproducibility() {
  const fs::path root = fs::temp_directory_path() / "pdmp_acceptance_repro";
  fs::remove_all(root);
  const std::vector<std::vector<std::string>> runs{
      {"simulate", "--horizon", "200", "--paths", "2", "--seed", "3"},
      {"verify-identities", "--horizon", "2000", "--samples", "500", "--seed", "3"},
      {"propagate-density", "--grid", "20", "--quad", "50"},
      {"check-good", "--length", "2", "--draws", "30"},
  };
  std::size_t files = 0;
  bool same = true;
  for (std::size_t r = 0; r < runs.size(); ++r) {
    for (const char* copy : {"a", "b"}) {
      auto args = runs[r];
      args.insert(args.end(), {"--out", (root / std::to_string(r) / copy).string()});
      std::ostringstream o, e;
      if (cli::run(args, o, e) == cli::kUsage) same = false;
    }
    for (const auto& entry : fs::directory_iterator(root / std::to_string(r) / "a")) {
      const fs::path other = root / std::to_string(r) / "b" / entry.path().filename();
      std::ifstream fa(entry.path(), std::ios::binary), fb(other, std::ios::binary);
      const std::string sa{std::istreambuf_iterator<char>(fa), {}}, sb{std::istreambuf_iterator<char>(fb), {}};
      same = same && fs::exists(other) && sa == sb;
      ++files;
    }
  }
  fs::remove_all(root);
  return {same && files > 0, std::to_string(files) + " artifacts compared byte for byte"};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget;  // seconds
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "neuron determinant identity", 10.0, neuron_determinant_identity},
      {2, "sigma vs finite differences", 30.0, sigma_vs_fd},
      {3, "thinning exactness", 20.0, thinning_exactness},
      {4, "jump-chain identity", 60.0, [] { return checks_with_prefix("jump-chain/"); }},
      {5, "stationarity", 60.0, [] { return checks_with_prefix("stationarity/"); }},
      {6, "representation formula", 60.0, representation},
      {7, "coarea propagation", 30.0, coarea},
      {8, "integration by parts", 60.0, ipp},
      {9, "kappa inversion and flow properties", 5.0, kappa_and_flow},
      {10, "regularity threshold", 1.0, threshold},
      {11, "reproducibility", 60.0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool in_time = secs < c.budget;
    const bool pass = v.pass && in_time;
    failed += pass ? 0 : 1;
    std::printf("criterion %2d %s  %s: %s [%.2f s, budget %.0f s%s]\n", c.id, pass ? "PASS" : "FAIL", c.name,
                v.detail.c_str(), secs, c.budget, in_time ? "" : ", exceeded");
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
