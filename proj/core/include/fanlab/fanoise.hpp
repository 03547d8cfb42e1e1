#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/rng.hpp"

namespace fanlab {

// How the per-direction noise amplitudes follow the singular values s_i:
//   none      - no injection at all, regardless of alpha
//   uniform   - S_i = 1
//   linear    - S_i = s_i / mean(s)            (constant signal-to-noise)
//   sublinear - S_i = sqrt(s_i) / mean(sqrt(s)) (the default compromise)
enum class ScalingMode { none, uniform, linear, sublinear };

enum class NoiseSideTarget { query, key, both };
enum class NoisePosition { input_layer, output_layer };

struct NoiseConfig {
  double alpha = 0.1;
  ScalingMode scaling = ScalingMode::sublinear;
  NoiseSideTarget side = NoiseSideTarget::both;
  NoisePosition position = NoisePosition::output_layer;
  RngStream rng{42, 0};
  double svd_tol = 1e-12;
};

// Enum <-> config-file spellings ("none", "uniform", "linear", "sublinear",
// "query", "key", "both", "input_layer", "output_layer").
// Parsers throw InvalidParameterError on unknown names.
std::string to_string(ScalingMode mode);
std::string to_string(NoiseSideTarget side);
std::string to_string(NoisePosition position);
ScalingMode parse_scaling_mode(const std::string& name);
NoiseSideTarget parse_noise_side(const std::string& name);
NoisePosition parse_noise_position(const std::string& name);

// Diagnostics of one injection.
//   scaling_vector       - the S_i actually used (empty when nothing was added)
//   noise_energy         - ||e_out - e||_F^2
//   per_direction_energy - energy split by right-singular direction; sums to
//                          noise_energy (the directions are orthonormal)
//   rank_used            - r of the batch SVD (0 when nothing was added)
//   zero_rank_warning    - set when alpha > 0 requested injection but the
//                          input had rank 0, so the output equals the input
struct InjectionTrace {
  std::vector<double> scaling_vector;
  double noise_energy = 0.0;
  std::size_t rank_used = 0;
  std::vector<double> per_direction_energy;
  bool zero_rank_warning = false;
};

// Per-direction amplitudes for a positive, descending spectrum s.
// Throws DegenerateSpectrumError (empty s), InvalidInputError (s_i <= 0),
// InvalidParameterError (mode == none has no scaling vector).
std::vector<double> scaling_vector(const std::vector<double>& s,
                                   ScalingMode mode);

struct InjectionResult {
  DenseMatrix e_out;
  InjectionTrace trace;
};

// Feature-adaptive injection on a B x d batch e:
//   1. thin SVD of e (tolerance cfg.svd_tol) -> rank r, right factor V
//   2. draw N_rand as B x r standard Gaussian from cfg.rng
//   3. scale column i by scaling_vector(s)[i]
//   4. perturbation = N_scaled V^T, confined to the row space of e
//   5. e_out = e + (alpha / sqrt(d)) * perturbation
// alpha = 0 or scaling = none returns the input bit-identically (no SVD, no
// RNG consumption, trace reports rank_used = 0 and no warning).
InjectionResult fanoise_inject(const DenseMatrix& e, const NoiseConfig& cfg);

// Baseline: e + alpha * N with N standard Gaussian per entry. Expected
// squared perturbation per row is alpha^2 * d, growing linearly in d.
DenseMatrix naive_inject(const DenseMatrix& e, double alpha, RngStream rng);

// Dimension-normalized baseline: e + (alpha / sqrt(d)) * N, per-row expected
// energy alpha^2 independent of d. Shares the sampling kernel with
// naive_inject, so normalized_inject(e, a) == naive_inject(e, a / sqrt(d))
// bit for bit.
DenseMatrix normalized_inject(const DenseMatrix& e, double alpha,
                              RngStream rng);

}  // namespace fanlab

