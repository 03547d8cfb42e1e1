#include "fanlab/rng.hpp"

#include <cmath>
#include <string>

#include "fanlab/errors.hpp"

namespace fanlab {

namespace {

// Weyl increment (odd): 2^64 / golden ratio.
constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

// SplitMix64 finalizer (Stafford mix 13 variant used by splitmix64).
constexpr std::uint64_t avalanche(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

}  // namespace

RngStream RngStream::substream(std::uint64_t child) const noexcept {
  // Mix the parent id with the child tag through two avalanche rounds so that
  // sibling and nested derivations do not collide in practice.
  return {seed, avalanche(avalanche(stream_id ^ 0x8BADF00D5ULL) + kGamma * (child + 1))};
}

RandomGenerator::RandomGenerator(RngStream stream) noexcept
    : state_(avalanche(stream.seed ^ avalanche(stream.stream_id ^ kGamma))) {}

std::uint64_t RandomGenerator::next_u64() noexcept {
  state_ += kGamma;
  return avalanche(state_);
}

double RandomGenerator::next_unit() noexcept {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomGenerator::next_gaussian() noexcept {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u, v, s;
  do {
    u = 2.0 * next_unit() - 1.0;
    v = 2.0 * next_unit() - 1.0;
    s = u * u + v * v;
  } while (s >= 1.0 || s == 0.0);
  const double f = std::sqrt(-2.0 * std::log(s) / s);
  spare_ = v * f;
  has_spare_ = true;
  return u * f;
}

DenseMatrix gaussian_matrix(std::size_t m, std::size_t n, double sigma,
                            RngStream rng) {
  if (m == 0 || n == 0) {
    throw InvalidInputError("gaussian_matrix: zero dimension " +
                            std::to_string(m) + "x" + std::to_string(n));
  }
  if (!(sigma >= 0.0)) {
    throw InvalidParameterError("gaussian_matrix: sigma must be >= 0, got " +
                                std::to_string(sigma));
  }
  DenseMatrix out(m, n);
  if (sigma == 0.0) return out;
  RandomGenerator gen(rng);
  double* p = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    p[i] = sigma * gen.next_gaussian();
  }
  return out;
}

}  // namespace fanlab
