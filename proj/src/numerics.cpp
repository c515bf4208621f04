#include "pdmp/numerics.hpp"

#include <numeric>

#include "pdmp/types.hpp"

namespace pdmp::numerics {

namespace {

double simpson_rec(const std::function<double(double)>& f, double a, double b, double fa,
                   double fm, double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol,
                        int max_depth) {
  if (a == b) return 0.0;
  const double fa = f(a);
  const double fb = f(b);
  const double fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

MeanSe mean_and_se(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n == 0) throw InvariantError("numerics", "mean of an empty sample");
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  if (n == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return {mean, std::sqrt(ss / static_cast<double>(n - 1) / static_cast<double>(n))};
}

MeanSe batch_means(std::span<const double> values, std::size_t batches) {
  if (batches == 0 || values.size() < batches)
    throw InvariantError("numerics", "batch means needs at least one value per batch");
  std::vector<double> block(batches);
  const std::size_t n = values.size();
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t lo = b * n / batches;
    const std::size_t hi = (b + 1) * n / batches;
    block[b] = std::accumulate(values.begin() + lo, values.begin() + hi, 0.0) /
               static_cast<double>(hi - lo);
  }
  const MeanSe blocks = mean_and_se(block);
  const double grand = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n);
  return {grand, blocks.se};
}

double quantile(std::vector<double> data, double p) {
  if (data.empty()) throw InvariantError("numerics", "quantile of an empty sample");
  std::sort(data.begin(), data.end());
  const double pos = std::clamp(p, 0.0, 1.0) * static_cast<double>(data.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, data.size() - 1);
  return data[lo] + (pos - static_cast<double>(lo)) * (data[hi] - data[lo]);
}

}  // namespace pdmp::numerics
