#pragma once

#include <cstddef>
#include <vector>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/rng.hpp"

namespace fanlab {

// Requested singular spectrum of a synthetic m x n feature matrix.
//   power_law  - sigma_i = (i+1)^(-exponent), so exponent 0 is flat
//   log_linear - sigma_i log-spaced from sigma_max down to sigma_min
//   explicit_values - caller-provided, must be positive and descending
// `rank` is the number of nonzero singular values; 0 means min(m, n).
enum class SpectrumDecay { power_law, log_linear, explicit_values };

struct SpectrumSpec {
  std::size_t m = 0;
  std::size_t n = 0;
  SpectrumDecay decay = SpectrumDecay::power_law;
  double exponent = 1.0;    // power_law
  double sigma_max = 1.0;   // log_linear
  double sigma_min = 0.1;   // log_linear
  std::vector<double> values;  // explicit_values
  std::size_t rank = 0;
  RngStream rng{42, 0};
};

// The spectrum a spec asks for, before any matrix is built.
// Throws InvalidParameterError / InvalidInputError on non-positive or
// non-descending requests.
std::vector<double> requested_spectrum(const SpectrumSpec& spec);

// U diag(s) V^T with Haar-distributed orthonormal U (m x r) and V (n x r).
// Orthonormal factors come from modified Gram-Schmidt on Gaussian matrices;
// MGS normalizes against a positive pivot, which fixes the QR sign ambiguity
// and makes the construction bit-deterministic per rng.
DenseMatrix make_spectrum_matrix(const SpectrumSpec& spec);

// Haar-random matrix with orthonormal columns (rows >= cols >= 1), used by
// make_spectrum_matrix and exposed for tests.
DenseMatrix haar_orthonormal(std::size_t rows, std::size_t cols,
                             RngStream rng);

// Paired dataset: latent unit vectors z_i mapped through two fixed linear
// views A and B plus per-view Gaussian noise. Training pairs are
// (x_i, y_i) = (A z_i + noise, B z_i + noise); evaluation items get fresh
// latents plus `num_distractors_eval` distractor targets drawn from their own
// latents. Train and eval latents come from disjoint sub-streams.
struct PairedDatasetSpec {
  std::size_t num_pairs = 0;
  std::size_t latent_dim = 0;
  std::size_t feature_dim = 0;
  double view_noise = 0.0;
  std::size_t num_distractors_eval = 15;
  std::size_t num_eval_queries = 256;
  // When set, both views are the identity embedding of the latent into the
  // first latent_dim coordinates (A = B = [I; 0]); with view_noise = 0 the
  // two views coincide exactly.
  bool identity_views = false;
  RngStream rng{42, 0};
};

struct EvalItem {
  std::vector<double> query;     // feature_dim
  std::vector<double> positive;  // feature_dim
  DenseMatrix distractors;       // num_distractors_eval x feature_dim
};

struct PairedDataset {
  DenseMatrix train_x;  // num_pairs x feature_dim
  DenseMatrix train_y;  // num_pairs x feature_dim
  std::vector<EvalItem> eval;
  DenseMatrix map_a;  // feature_dim x latent_dim
  DenseMatrix map_b;  // feature_dim x latent_dim
};

// Throws InvalidParameterError when num_pairs < 2, latent_dim < 1,
// latent_dim > feature_dim, or view_noise < 0.
PairedDataset make_paired_dataset(const PairedDatasetSpec& spec);

}  // namespace fanlab

