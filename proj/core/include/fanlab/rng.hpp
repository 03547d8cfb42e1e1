#pragma once

#include <cstdint>

#include "fanlab/dense_matrix.hpp"

namespace fanlab {

// Value-type descriptor of a random stream. Every randomized operation takes
// an RngStream and is a pure function of (inputs, stream): the same
// (seed, stream_id) always reproduces the same draw sequence. Independent
// draws inside one algorithm are given distinct sub-streams via substream().
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;

  // Deterministically derives a child stream. Distinct (stream_id, child)
  // pairs map to distinct child ids with overwhelming probability.
  RngStream substream(std::uint64_t child) const noexcept;

  bool operator==(const RngStream&) const = default;
};

// Counter-based SplitMix64 generator. The integer stream is specified exactly
// by the two constants below plus the avalanche mix, so it is bit-reproducible
// on any conforming platform. Gaussians come from the Marsaglia polar method
// (rejection on the unit disk), which consumes a variable but fully
// deterministic number of uniforms per pair; it relies on std::log/std::sqrt,
// so Gaussian bit-reproducibility across platforms holds up to the <= 1 ulp
// wobble of the platform's log(). Repeated runs on one platform are
// bit-identical.
class RandomGenerator {
 public:
  explicit RandomGenerator(RngStream stream) noexcept;

  std::uint64_t next_u64() noexcept;

  // Uniform double in [0, 1), 53 usable bits.
  double next_unit() noexcept;

  // Standard normal draw.
  double next_gaussian() noexcept;

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// m x n matrix of iid N(0, sigma^2) entries, filled row by row.
// sigma == 0 returns the zero matrix without consuming draws;
// sigma < 0 raises InvalidParameterError.
DenseMatrix gaussian_matrix(std::size_t m, std::size_t n, double sigma,
                            RngStream rng);

}  // namespace fanlab
