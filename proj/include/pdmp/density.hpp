#pragma once

// Invariant-measure estimation from simulated paths, grid densities
// (histogram, Gaussian KDE), the representation formula, the marginal
// regularity region and the regularity threshold.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pdmp/simulate.hpp"

namespace pdmp {

struct EmpiricalMeasure {
  std::vector<State> samples;
  std::vector<double> weights;  ///< equal weights summing to 1
  std::string provenance;       ///< "time-sampled" or "jump-chain"
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
  /// Weighted mean of g with a batch-means standard error over the sample
  /// sequence (30 batches), which absorbs the serial correlation of
  /// time-sampled paths.
  numerics::MeanSe mean(const TestFunction& g, std::size_t batches = 30) const;
  double weight_sum() const;
};

struct SamplingConfig {
  double horizon = 1e4;
  double burn_in_fraction = 0.1;  ///< of the horizon (time sampling)
  double stride = 1.0;
  std::size_t paths = 1;
  std::uint64_t seed = 0;
  std::optional<State> start;     ///< default: the zero state
};

/// States sampled at burn_in + k * stride along independent paths.
EmpiricalMeasure estimate_invariant(const ModelSpec& model, const SamplingConfig& sc,
                                    const IntegratorConfig& cfg, unsigned workers = 1);

/// Pre-jump states Z_k after the burn-in fraction of jumps, one path.
EmpiricalMeasure jump_chain_measure(const PathRecord& path, double burn_in_fraction = 0.1);

struct GridAxis {
  double lo = 0.0;
  double hi = 1.0;
  std::size_t count = 1;  ///< cells

  double width() const { return (hi - lo) / static_cast<double>(count); }
  double center(std::size_t k) const { return lo + (static_cast<double>(k) + 0.5) * width(); }
};

struct GridDensity {
  std::vector<GridAxis> axes;
  std::vector<double> values;     ///< row-major over axes, nonnegative
  std::string method;             ///< "histogram/freedman-diaconis" or "kde/silverman"
  std::optional<double> bandwidth;

  double cell_volume() const;
  double integral() const;        ///< Σ values * cell volume
};

/// Histogram of coordinate `coord` with Freedman-Diaconis bin width.
GridDensity histogram(const EmpiricalMeasure& m, int coord);

/// Gaussian KDE of coordinate `coord`, Silverman bandwidth (times `scale`),
/// evaluated at `cells` cell centers covering the data +- 4 bandwidths.
GridDensity kde(const EmpiricalMeasure& m, int coord, std::size_t cells = 512,
                double bandwidth_scale = 1.0);

/// Same, for raw scalar data.
GridDensity kde(const std::vector<double>& data, std::size_t cells = 512,
                double bandwidth_scale = 1.0);
double silverman_bandwidth(const std::vector<double>& data);

/// Representation formula right-hand side for every g at once:
///   Σ_i E_m̂[ f_i(x) ∫_0^T e(Δ_i x, t) g(γ_t(Δ_i x)) dt ],
/// trapezoid on the flow grid, truncated where survival < trunc_eps.
struct RepresentationResult {
  std::vector<numerics::MeanSe> values;
  std::size_t capped = 0;  ///< samples whose truncation reached max_time
};

RepresentationResult representation_rhs(const ModelSpec& model, const EmpiricalMeasure& m,
                                        const std::vector<TestFunction>& g,
                                        const IntegratorConfig& cfg, unsigned workers = 1,
                                        std::size_t batches = 30);

/// S_{d,k+2} = { v : (k+2) A < |v|, |b̃(v)| > d }.
struct RegionSpec {
  double d = 0.0;
  int k = 0;
  double A = 0.0;

  bool contains(const NonInteractingSpec& spec, double v) const;
};

/// Per-order suprema of |forward-difference derivatives| of a 1D grid density
/// over grid points whose whole stencil lies in the region.
std::vector<double> smoothness_probe(const GridDensity& gd, const NonInteractingSpec& spec,
                                     const RegionSpec& region, int order);

struct RegularityThreshold {
  long long k_star = 0;  ///< largest integer with B k* < N f0 - (N-1) B
  bool guaranteed = false;
  double bound = 0.0;    ///< N f0 / B - (N-1)
};

RegularityThreshold regularity_threshold(int N, double f0, double B);

}  // namespace pdmp
