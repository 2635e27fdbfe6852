#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>

namespace robq {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based Philox4x32-10 generator.
//
// State is (seed, stream, counter); two generators with the same seed and
// stream produce identical sequences on every platform. Independent
// substreams are derived with substream(id), which is how replica i of a
// robust wrapper gets its randomness. Distributions are implemented here
// rather than through <random> so results do not depend on the standard
// library in use.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Standard normal (Box-Muller, one value per call; the sine branch is kept).
  double normal();
  // Uniform in [0, n). n must be positive.
  std::size_t uniform_index(std::size_t n);
  // +1.0 or -1.0 with equal probability.
  double sign();

  Rng substream(std::uint64_t id) const;
  // A fresh 64-bit seed drawn from this generator.
  std::uint64_t next_seed() { return (*this)(); }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int available_ = 0;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace robq
