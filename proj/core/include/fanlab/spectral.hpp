#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/rng.hpp"

namespace fanlab {

// One noise-perturbation experiment over a base matrix F and a Gaussian
// noise matrix GN with per-entry std alpha/sqrt(n):
//   sigma_base / sigma_noise / sigma_noisy - spectra of F, GN, F + GN
//   mp_lower, mp_upper - bulk edges alpha * (|1 - sqrt(m/n)|, 1 + sqrt(m/n))
//   tau_star           - separability threshold alpha * sqrt(m/n)
//   overlaps           - |<v_i(F), v_i(F+GN)>| per right-singular index
//   overlap_degenerate - marks indices inside spectral clusters whose
//                        consecutive gaps are < 1e-8 * sigma_1, where
//                        per-vector overlaps are ill-posed
//   weyl_*             - Weyl bound audit of the perturbed spectrum
struct SpectralReport {
  std::vector<double> sigma_base;
  std::vector<double> sigma_noise;
  std::vector<double> sigma_noisy;
  double mp_lower = 0.0;
  double mp_upper = 0.0;
  double tau_star = 0.0;
  std::vector<double> overlaps;
  std::vector<bool> overlap_degenerate;
  std::size_t weyl_violations = 0;
  double weyl_max_gap = 0.0;
  double weyl_bound = 0.0;
  std::size_t m = 0;
  std::size_t n = 0;
  double alpha = 0.0;
  std::uint64_t seed = 0;
};

// Marchenko-Pastur bulk edges for an m x n matrix with per-entry noise std
// alpha/sqrt(n): (alpha * |1 - sqrt(m/n)|, alpha * (1 + sqrt(m/n))).
std::pair<double, double> mp_edges(std::size_t m, std::size_t n, double alpha);

// Spiked-covariance separability threshold alpha * sqrt(m/n): directions
// with singular value above tau_star stay detectable in F + GN.
double tau_star(std::size_t m, std::size_t n, double alpha);

// Checks |sigma_i(f + noise) - sigma_i(f)| <= sigma_max(noise) for every
// index (with 1e-9 additive slack for floating point). `bound` is
// sigma_max(noise) itself.
struct WeylCheck {
  double max_gap = 0.0;
  double bound = 0.0;
  std::size_t violations = 0;
};

WeylCheck weyl_check(const DenseMatrix& f, const DenseMatrix& noise);

// |<v_i(f), v_i(f_noisy)>| for right-singular vectors, up to the smaller of
// the two ranks at truncation tolerance svd_tol. Entries are clamped to
// [0, 1] (inner products of unit vectors can exceed 1 by rounding only).
std::vector<double> singular_overlap(const DenseMatrix& f,
                                     const DenseMatrix& f_noisy,
                                     double svd_tol = 1e-12);

// Averages X~^T X~ over `repetitions` draws of X~ = f + (alpha/sqrt(n)) GN
// and returns the max-norm deviation from the predicted
// f^T f + (m/n) alpha^2 I. Deviation shrinks like 1/sqrt(repetitions).
// Throws InvalidParameterError when repetitions < 100.
double spiked_covariance_check(const DenseMatrix& f, double alpha,
                               std::size_t repetitions, RngStream rng);

// Full experiment: draws GN from rng, computes all three spectra, the MP
// edges, tau_star, overlaps (with degeneracy flags), and the Weyl audit.
SpectralReport run_spectrum_experiment(const DenseMatrix& f, double alpha,
                                       RngStream rng);

// First index whose overlap drops below `threshold` (default 0.5), skipping
// degenerate-flagged indices; returns overlap count if none collapse.
std::size_t collapse_index(const SpectralReport& report,
                           double threshold = 0.5);

// CSV rows `index,sigma_base,sigma_noise,sigma_noisy,overlap_abs` (columns
// padded with empty fields past their spectrum's length) and a key=value
// sidecar with m, n, alpha, mp_lower, mp_upper, tau_star, weyl_violations,
// seed.
void write_spectrum_csv(const std::string& path, const SpectralReport& report);
void write_spectrum_meta(const std::string& path,
                         const SpectralReport& report);

}  // namespace fanlab

