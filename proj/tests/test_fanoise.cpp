#include <cmath>
#include <cstddef>
#include <numeric>
#include <vector>

#include "doctest.h"
#include "fanlab/dense_matrix.hpp"
#include "fanlab/errors.hpp"
#include "fanlab/fanoise.hpp"
#include "fanlab/rng.hpp"
#include "fanlab/svd.hpp"

using namespace fanlab;

namespace {

DenseMatrix random_matrix(std::size_t m, std::size_t n, std::uint64_t seed) {
  return gaussian_matrix(m, n, 1.0, RngStream{seed, 0});
}

// Rank-r batch: product of two Gaussian factors.
DenseMatrix rank_deficient(std::size_t m, std::size_t n, std::size_t r,
                           std::uint64_t seed) {
  return multiply(gaussian_matrix(m, r, 1.0, RngStream{seed, 10}),
                  gaussian_matrix(r, n, 1.0, RngStream{seed, 11}));
}

double mean(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) /
         static_cast<double>(xs.size());
}

double stderr_of_mean(const std::vector<double>& xs) {
  const double m = mean(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                   static_cast<double>(xs.size()));
}

}  // namespace

TEST_CASE("scaling vector closed examples") {
  const std::vector<double> s{4.0, 1.0};

  SUBCASE("uniform ignores the spectrum") {
    const std::vector<double> v = scaling_vector(s, ScalingMode::uniform);
    REQUIRE(v.size() == 2);
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 1.0);
  }
  SUBCASE("linear divides by the mean") {
    const std::vector<double> v = scaling_vector(s, ScalingMode::linear);
    CHECK(v[0] == doctest::Approx(1.6).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(0.4).epsilon(1e-15));
  }
  SUBCASE("sublinear uses square roots") {
    const std::vector<double> v = scaling_vector(s, ScalingMode::sublinear);
    CHECK(v[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-15));
    CHECK(v[1] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(scaling_vector({}, ScalingMode::uniform),
                    DegenerateSpectrumError);
    CHECK_THROWS_AS(scaling_vector({1.0, 0.0}, ScalingMode::linear),
                    InvalidInputError);
    CHECK_THROWS_AS(scaling_vector({1.0, -2.0}, ScalingMode::sublinear),
                    InvalidInputError);
    CHECK_THROWS_AS(scaling_vector(s, ScalingMode::none),
                    InvalidParameterError);
  }
}

TEST_CASE("mode and side spellings round-trip") {
  for (ScalingMode m : {ScalingMode::none, ScalingMode::uniform,
                        ScalingMode::linear, ScalingMode::sublinear}) {
    CHECK(parse_scaling_mode(to_string(m)) == m);
  }
  for (NoiseSideTarget s :
       {NoiseSideTarget::query, NoiseSideTarget::key, NoiseSideTarget::both}) {
    CHECK(parse_noise_side(to_string(s)) == s);
  }
  for (NoisePosition p :
       {NoisePosition::input_layer, NoisePosition::output_layer}) {
    CHECK(parse_noise_position(to_string(p)) == p);
  }
  CHECK_THROWS_AS(parse_scaling_mode("quadratic"), InvalidParameterError);
  CHECK_THROWS_AS(parse_noise_side("left"), InvalidParameterError);
  CHECK_THROWS_AS(parse_noise_position("middle"), InvalidParameterError);
}

TEST_CASE("alpha 0 and scaling none are exact no-ops") {
  const DenseMatrix e = random_matrix(6, 9, 42);

  NoiseConfig off;
  off.alpha = 0.0;
  off.scaling = ScalingMode::sublinear;
  const InjectionResult r0 = fanoise_inject(e, off);
  CHECK(r0.e_out == e);
  CHECK(r0.trace.rank_used == 0);
  CHECK(r0.trace.noise_energy == 0.0);
  CHECK(r0.trace.scaling_vector.empty());
  CHECK_FALSE(r0.trace.zero_rank_warning);

  NoiseConfig none;
  none.alpha = 0.8;
  none.scaling = ScalingMode::none;
  const InjectionResult r1 = fanoise_inject(e, none);
  CHECK(r1.e_out == e);
  CHECK(r1.trace.rank_used == 0);
  CHECK_FALSE(r1.trace.zero_rank_warning);
}

TEST_CASE("injection is deterministic and validates input") {
  const DenseMatrix e = random_matrix(5, 7, 7);
  NoiseConfig cfg;
  cfg.alpha = 0.3;
  cfg.rng = RngStream{11, 4};
  const InjectionResult a = fanoise_inject(e, cfg);
  const InjectionResult b = fanoise_inject(e, cfg);
  CHECK(a.e_out == b.e_out);
  CHECK(a.trace.noise_energy == b.trace.noise_energy);
  CHECK(a.e_out != e);  // alpha > 0 actually perturbs

  NoiseConfig bad = cfg;
  bad.alpha = -0.1;
  CHECK_THROWS_AS(fanoise_inject(e, bad), InvalidParameterError);
  CHECK_THROWS_AS(fanoise_inject(DenseMatrix(), cfg), InvalidInputError);
  DenseMatrix with_nan = e;
  with_nan(0, 0) = std::nan("");
  CHECK_THROWS_AS(fanoise_inject(with_nan, cfg), InvalidInputError);
}

TEST_CASE("zero-rank input round-trips with a warning") {
  const DenseMatrix zeros(4, 6);
  NoiseConfig cfg;
  cfg.alpha = 0.3;
  cfg.scaling = ScalingMode::uniform;
  const InjectionResult r = fanoise_inject(zeros, cfg);
  CHECK(r.e_out == zeros);
  CHECK(r.trace.zero_rank_warning);
  CHECK(r.trace.rank_used == 0);
  CHECK(r.trace.noise_energy == 0.0);
  CHECK(r.trace.scaling_vector.empty());
}

TEST_CASE("trace reports the numerical rank and a consistent energy split") {
  const DenseMatrix e = rank_deficient(10, 8, 3, 21);
  NoiseConfig cfg;
  cfg.alpha = 0.5;
  const InjectionResult r = fanoise_inject(e, cfg);
  CHECK(r.trace.rank_used == 3);
  CHECK(r.trace.scaling_vector.size() == 3);
  CHECK(r.trace.per_direction_energy.size() == 3);
  const double split = std::accumulate(r.trace.per_direction_energy.begin(),
                                       r.trace.per_direction_energy.end(), 0.0);
  CHECK(split == doctest::Approx(r.trace.noise_energy).epsilon(1e-10));
  const double direct = frobenius_norm([&] {
    DenseMatrix d = r.e_out;
    add_scaled(d, -1.0, e);
    return d;
  }());
  CHECK(direct * direct == doctest::Approx(r.trace.noise_energy).epsilon(1e-10));
}

TEST_CASE("perturbation stays in the row space of the batch") {
  std::uint64_t seed = 500;
  for (ScalingMode mode :
       {ScalingMode::uniform, ScalingMode::linear, ScalingMode::sublinear}) {
    for (int rep = 0; rep < 12; ++rep) {
      ++seed;
      const std::size_t m = 4 + rep % 5;
      const std::size_t n = 3 + rep % 7;
      const std::size_t r = 1 + rep % std::min(m, n);
      const DenseMatrix e = rank_deficient(m, n, r, seed);
      NoiseConfig cfg;
      cfg.alpha = 0.4;
      cfg.scaling = mode;
      cfg.rng = RngStream{seed, 2};
      const InjectionResult out = fanoise_inject(e, cfg);

      DenseMatrix delta = out.e_out;
      add_scaled(delta, -1.0, e);
      const SvdFactors f = thin_svd(e);
      // Component outside span(V): delta - (delta V) V^T.
      DenseMatrix proj = multiply_a_bt(multiply(delta, f.v), f.v);
      DenseMatrix residual = delta;
      add_scaled(residual, -1.0, proj);
      CHECK(frobenius_norm(residual) <= 1e-9 * frobenius_norm(delta));
    }
  }
}

TEST_CASE("mean injected energy matches the closed form") {
  const std::size_t bsz = 16;
  const std::size_t d = 32;
  const double alpha = 0.7;
  const DenseMatrix e = random_matrix(bsz, d, 99);
  const std::vector<double> s = singular_values(e);
  const RngStream base{123, 0};

  for (ScalingMode mode :
       {ScalingMode::uniform, ScalingMode::linear, ScalingMode::sublinear}) {
    const std::vector<double> sv = scaling_vector(s, mode);
    double expected = 0.0;
    for (double v : sv) expected += v * v;
    expected *= alpha * alpha / static_cast<double>(d) *
                static_cast<double>(bsz);

    const std::size_t reps = 2000;
    std::vector<double> energies;
    energies.reserve(reps);
    NoiseConfig cfg;
    cfg.alpha = alpha;
    cfg.scaling = mode;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      cfg.rng = base.substream(rep);
      energies.push_back(fanoise_inject(e, cfg).trace.noise_energy);
    }
    const double m = mean(energies);
    const double se = stderr_of_mean(energies);
    INFO("mode ", to_string(mode), " mean ", m, " expected ", expected);
    CHECK(std::fabs(m - expected) <= 4.0 * se);
  }
}

TEST_CASE("naive energy grows linearly in d, normalized stays flat") {
  const std::size_t bsz = 8;
  const double alpha = 0.25;
  const std::size_t reps = 800;
  const RngStream base{77, 0};

  auto mean_energy = [&](const DenseMatrix& e, bool normalized) {
    std::vector<double> energies;
    energies.reserve(reps);
    for (std::size_t rep = 0; rep < reps; ++rep) {
      const DenseMatrix out =
          normalized ? normalized_inject(e, alpha, base.substream(rep))
                     : naive_inject(e, alpha, base.substream(rep));
      DenseMatrix delta = out;
      add_scaled(delta, -1.0, e);
      const double f = frobenius_norm(delta);
      energies.push_back(f * f);
    }
    return mean(energies);
  };

  const DenseMatrix narrow(bsz, 32);  // zeros are fine: energy is about noise
  const DenseMatrix wide(bsz, 64);

  const double naive_narrow = mean_energy(narrow, false);
  const double naive_wide = mean_energy(wide, false);
  CHECK(naive_narrow / naive_wide == doctest::Approx(0.5).epsilon(0.05));
  CHECK(naive_narrow ==
        doctest::Approx(alpha * alpha * 8.0 * 32.0).epsilon(0.05));

  const double norm_narrow = mean_energy(narrow, true);
  const double norm_wide = mean_energy(wide, true);
  CHECK(norm_narrow / norm_wide == doctest::Approx(1.0).epsilon(0.05));
  CHECK(norm_narrow == doctest::Approx(alpha * alpha * 8.0).epsilon(0.05));
}

TEST_CASE("normalized_inject is naive_inject at alpha over sqrt d") {
  const DenseMatrix e = random_matrix(7, 25, 31);
  const RngStream rng{5, 6};
  const double alpha = 0.9;
  CHECK(normalized_inject(e, alpha, rng) ==
        naive_inject(e, alpha / std::sqrt(25.0), rng));
  CHECK_THROWS_AS(naive_inject(e, -1.0, rng), InvalidParameterError);
  CHECK_THROWS_AS(normalized_inject(DenseMatrix(), alpha, rng),
                  InvalidInputError);
}

TEST_CASE("uniform-mode perturbation has per-entry variance alpha^2 over d") {
  // Full-rank square input so the row space is all of R^d.
  const std::size_t d = 4;
  const DenseMatrix e = random_matrix(d, d, 8);
  const double alpha = 0.6;
  const double expected_var = alpha * alpha / static_cast<double>(d);
  const RngStream base{314, 0};

  const std::size_t reps = 3000;
  double sum_sq = 0.0;
  NoiseConfig cfg;
  cfg.alpha = alpha;
  cfg.scaling = ScalingMode::uniform;
  for (std::size_t rep = 0; rep < reps; ++rep) {
    cfg.rng = base.substream(rep);
    const InjectionResult out = fanoise_inject(e, cfg);
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        const double delta = out.e_out(i, j) - e(i, j);
        sum_sq += delta * delta;
      }
    }
  }
  const double pooled_var =
      sum_sq / static_cast<double>(reps * d * d);
  // 48000 pooled samples: relative stderr of the variance ~ 0.65%.
  CHECK(pooled_var == doctest::Approx(expected_var).epsilon(0.05));
}
