#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "doctest.h"
#include "fanlab/dense_matrix.hpp"
#include "fanlab/errors.hpp"
#include "fanlab/matrix_io.hpp"
#include "fanlab/rng.hpp"
#include "fanlab/spectral.hpp"
#include "fanlab/svd.hpp"
#include "fanlab/synth.hpp"

using namespace fanlab;
namespace fs = std::filesystem;

TEST_CASE("bulk edges and separability threshold at the reference shape") {
  const auto [lo, hi] = mp_edges(1000, 1536, 1.0);
  CHECK(std::fabs(lo - 0.193) <= 1e-3);
  CHECK(std::fabs(hi - 1.807) <= 1e-3);
  CHECK(lo + hi == doctest::Approx(2.0).epsilon(1e-12));  // |1-s| + (1+s)

  // Edges scale linearly in alpha.
  const auto [lo2, hi2] = mp_edges(1000, 1536, 2.0);
  CHECK(lo2 == doctest::Approx(2.0 * lo).epsilon(1e-15));
  CHECK(hi2 == doctest::Approx(2.0 * hi).epsilon(1e-15));

  // Square case: lower edge collapses to zero.
  CHECK(mp_edges(64, 64, 1.0).first == 0.0);
  CHECK(mp_edges(64, 64, 1.0).second == 2.0);

  // Threshold values quoted to two / one decimals.
  CHECK(std::fabs(tau_star(1000, 1536, 1.0) - 0.807) <= 1e-3);
  CHECK(std::fabs(tau_star(1000, 1536, 0.3) - 0.24) <= 5e-3);
  CHECK(std::fabs(tau_star(1000, 1536, 1.0) - 0.8) <= 5e-2);
  CHECK(tau_star(1000, 1536, 0.0) == 0.0);

  CHECK_THROWS_AS(mp_edges(0, 10, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(mp_edges(10, 0, 1.0), InvalidParameterError);
  CHECK_THROWS_AS(mp_edges(10, 10, -1.0), InvalidParameterError);
  CHECK_THROWS_AS(tau_star(0, 10, 1.0), InvalidParameterError);
}

TEST_CASE("weyl bound holds over randomized pairs") {
  RngStream base{7, 0};
  std::size_t checked = 0;
  for (int rep = 0; rep < 120; ++rep) {
    const RngStream child = base.substream(static_cast<std::uint64_t>(rep));
    RandomGenerator gen(child);
    const std::size_t m = 2 + static_cast<std::size_t>(gen.next_unit() * 14);
    const std::size_t n = 2 + static_cast<std::size_t>(gen.next_unit() * 14);
    const double noise_scale = std::pow(10.0, -2.0 + 3.0 * gen.next_unit());
    const DenseMatrix f = gaussian_matrix(m, n, 1.0, child.substream(1));
    const DenseMatrix noise =
        gaussian_matrix(m, n, noise_scale, child.substream(2));
    const WeylCheck w = weyl_check(f, noise);
    CHECK(w.violations == 0);
    CHECK(w.max_gap <= w.bound + 1e-9);
    ++checked;
  }
  CHECK(checked == 120);

  // Zero noise: spectra coincide, the gap is numerically zero.
  const DenseMatrix f = gaussian_matrix(6, 4, 1.0, RngStream{8, 0});
  const WeylCheck w = weyl_check(f, DenseMatrix(6, 4));
  CHECK(w.max_gap == 0.0);
  CHECK(w.bound == 0.0);
  CHECK(w.violations == 0);

  CHECK_THROWS_AS(weyl_check(f, DenseMatrix(5, 4)), InvalidInputError);
}

TEST_CASE("singular overlaps detect identical and perturbed factors") {
  SpectrumSpec spec;
  spec.m = 12;
  spec.n = 10;
  spec.decay = SpectrumDecay::explicit_values;
  spec.values = {5.0, 4.0, 3.0, 2.0, 1.0};
  spec.rng = RngStream{4, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);

  const std::vector<double> self = singular_overlap(f, f);
  REQUIRE(self.size() == 5);
  for (double o : self) CHECK(o == doctest::Approx(1.0).epsilon(1e-12));

  // A perturbation far below every spectral gap barely rotates the factors.
  DenseMatrix tiny = gaussian_matrix(12, 10, 1e-8, RngStream{4, 1});
  DenseMatrix noisy = f;
  add_scaled(noisy, 1.0, tiny);
  for (double o : singular_overlap(f, noisy)) CHECK(o >= 1.0 - 1e-4);
  for (double o : singular_overlap(f, noisy)) CHECK(o <= 1.0);
}

TEST_CASE("spiked covariance deviation vanishes at alpha 0") {
  SpectrumSpec spec;
  spec.m = 10;
  spec.n = 14;
  spec.rng = RngStream{11, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);
  const double dev = spiked_covariance_check(f, 0.0, 128, RngStream{11, 1});
  CHECK(dev <= 1e-12);
  CHECK_THROWS_AS(spiked_covariance_check(f, 1.0, 99, RngStream{11, 1}),
                  InvalidParameterError);
}

TEST_CASE("spiked covariance deviation decays like one over sqrt reps") {
  SpectrumSpec spec;
  spec.m = 60;
  spec.n = 90;
  spec.decay = SpectrumDecay::log_linear;
  spec.sigma_max = 3.0;
  spec.sigma_min = 0.3;
  spec.rng = RngStream{21, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);

  const std::vector<std::size_t> reps{100, 400, 1600};
  std::vector<double> devs;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    devs.push_back(
        spiked_covariance_check(f, 0.7, reps[i], RngStream{21, 1 + i}));
  }
  // Least-squares slope of log(dev) against log(reps).
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < reps.size(); ++i) {
    const double x = std::log(static_cast<double>(reps[i]));
    const double y = std::log(devs[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double count = static_cast<double>(reps.size());
  const double slope = (count * sxy - sx * sy) / (count * sxx - sx * sx);
  INFO("deviations ", devs[0], " ", devs[1], " ", devs[2], " slope ", slope);
  CHECK(slope <= -0.35);
  CHECK(slope >= -0.65);
}

TEST_CASE("experiment report is internally consistent") {
  SpectrumSpec spec;
  spec.m = 20;
  spec.n = 30;
  spec.decay = SpectrumDecay::log_linear;
  spec.sigma_max = 5.0;
  spec.sigma_min = 0.05;
  spec.rng = RngStream{31, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);

  const SpectralReport r = run_spectrum_experiment(f, 0.8, RngStream{31, 5});
  CHECK(r.m == 20);
  CHECK(r.n == 30);
  CHECK(r.alpha == 0.8);
  CHECK(r.sigma_base.size() == 20);
  CHECK(r.sigma_noise.size() == 20);
  CHECK(r.sigma_noisy.size() == 20);
  CHECK(r.overlaps.size() == r.overlap_degenerate.size());
  CHECK(r.overlaps.size() <= 20);
  CHECK(std::is_sorted(r.sigma_base.rbegin(), r.sigma_base.rend()));

  const auto [lo, hi] = mp_edges(20, 30, 0.8);
  CHECK(r.mp_lower == lo);
  CHECK(r.mp_upper == hi);
  CHECK(r.tau_star == tau_star(20, 30, 0.8));
  CHECK(r.weyl_violations == 0);
  CHECK(r.weyl_max_gap <= r.weyl_bound + 1e-9);
  for (double o : r.overlaps) {
    CHECK(o >= 0.0);
    CHECK(o <= 1.0);
  }

  // alpha = 0: no noise, all overlaps exactly recover.
  const SpectralReport clean = run_spectrum_experiment(f, 0.0, RngStream{31, 6});
  for (double o : clean.overlaps) CHECK(o == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(collapse_index(clean) == clean.overlaps.size());
}

TEST_CASE("degenerate spectral clusters are flagged, not scored") {
  SpectrumSpec spec;
  spec.m = 10;
  spec.n = 12;
  spec.decay = SpectrumDecay::explicit_values;
  spec.values = {2.0, 2.0, 2.0, 1.0};
  spec.rng = RngStream{41, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);

  const SpectralReport r = run_spectrum_experiment(f, 0.01, RngStream{41, 1});
  REQUIRE(r.overlap_degenerate.size() >= 4);
  CHECK(r.overlap_degenerate[0]);
  CHECK(r.overlap_degenerate[1]);
  CHECK(r.overlap_degenerate[2]);
  CHECK_FALSE(r.overlap_degenerate[3]);
}

TEST_CASE("collapse index skips flagged indices") {
  SpectralReport r;
  r.overlaps = {0.9, 0.6, 0.4, 0.3};
  r.overlap_degenerate = {false, false, true, false};
  CHECK(collapse_index(r) == 3);           // index 2 is flagged, skipped
  CHECK(collapse_index(r, 0.95) == 0);     // first index already below
  CHECK(collapse_index(r, 0.7) == 1);
  CHECK(collapse_index(r, 0.2) == 4);      // nothing collapses

  SpectralReport empty;
  CHECK(collapse_index(empty) == 0);
}

TEST_CASE("csv and meta writers produce the documented layout") {
  SpectrumSpec spec;
  spec.m = 5;
  spec.n = 7;
  spec.rng = RngStream{51, 0};
  const DenseMatrix f = make_spectrum_matrix(spec);
  const SpectralReport r = run_spectrum_experiment(f, 0.5, RngStream{51, 1});

  const fs::path dir = fs::temp_directory_path() / "fanlab_spectral_test";
  fs::create_directories(dir);
  const fs::path csv = dir / "spectrum.csv";
  const fs::path meta = dir / "spectrum.meta";
  write_spectrum_csv(csv.string(), r);
  write_spectrum_meta(meta.string(), r);

  const std::string csv_text = read_text_file(csv);
  CHECK(csv_text.rfind("index,sigma_base,sigma_noise,sigma_noisy,overlap_abs",
                       0) == 0);
  const std::size_t lines =
      static_cast<std::size_t>(std::count(csv_text.begin(), csv_text.end(), '\n'));
  CHECK(lines == 1 + r.sigma_base.size());

  const std::string meta_text = read_text_file(meta);
  for (const char* key : {"m=", "n=", "alpha=", "mp_lower=", "mp_upper=",
                          "tau_star=", "weyl_violations=", "seed="}) {
    INFO("missing key ", key);
    CHECK(meta_text.find(key) != std::string::npos);
  }
  fs::remove_all(dir);
}
