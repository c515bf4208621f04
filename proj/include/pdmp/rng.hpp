#pragma once

#include <cstdint>
#include <random>

namespace pdmp {

/// Identifies one random stream: a base seed shared by a run and a stream id
/// per path or worker item.
struct RngSpec {
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;
};

/// Random source with a fully specified output sequence: Mersenne Twister
/// seeded through std::seed_seq, uniform variates built from the top 53 bits.
/// Identical RngSpec gives bit-identical draws on every conforming platform.
class Rng {
 public:
  explicit Rng(RngSpec spec);

  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Exponential with the given rate, by inversion.
  double exponential(double rate);
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

  const RngSpec& spec() const noexcept { return spec_; }

 private:
  RngSpec spec_;
  std::mt19937_64 engine_;
};

}  // namespace pdmp
