#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/rng.hpp"

namespace fanlab {

// Paired query/key embeddings. Rows are a matched pair (q_l, k_l); all other
// rows of k act as in-batch negatives for q_l (and vice versa).
//
// `normalized` is a caller promise, checked (to 1e-10 per row) by every
// operation that requires unit rows. Use make_normalized_batch to build a
// batch from raw features.
struct EmbeddingBatch {
  DenseMatrix q;
  DenseMatrix k;
  bool normalized = false;
};

// Row-normalizes q and k and sets the `normalized` flag.
// Throws DegenerateRowError for near-zero rows, InvalidInputError on shape
// mismatch or empty input.
EmbeddingBatch make_normalized_batch(DenseMatrix q, DenseMatrix k);

// Loss plus everything the gradient formulas touch.
//
//   p(l, j)   = softmax_j(<q_l, k_j> / tau)       rows sum to 1
//   k_bar(l)  = sum_j p(l, j) k_j                 softmax-weighted key mean
//   q_tilde(i)= sum_l p(l, i) q_l                 softmax-weighted query mean
//   grad_q(l) = (k_bar_l - k_l) / tau
//   grad_k(i) = (q_tilde_i - q_i) / tau
//
// Gradients are with respect to the embedding rows as free variables; the
// trainer owns the chain rule through any preceding normalization.
struct LossGradients {
  double loss = 0.0;
  DenseMatrix p;
  DenseMatrix grad_q;
  DenseMatrix grad_k;
  DenseMatrix k_bar;
  DenseMatrix q_tilde;
  double tau = 0.0;
};

// Sum over rows of -log softmax(<q_l, k_.>/tau) at the matched index.
// This is the sum form, not a batch mean; computed with max-subtraction so
// small tau cannot overflow.
// Throws InvalidParameterError (tau <= 0), ContractViolationError (batch not
// normalized or rows off the unit sphere beyond 1e-10).
double infonce_loss(const EmbeddingBatch& batch, double tau);

// Same loss evaluated on raw (not necessarily unit-norm) rows. This is the
// unconstrained function the finite-difference and Monte-Carlo oracles
// differentiate; it performs no normalization checks.
double infonce_loss_raw(const DenseMatrix& q, const DenseMatrix& k, double tau);

// Loss together with the closed-form gradients above.
LossGradients loss_with_gradients(const EmbeddingBatch& batch, double tau);

// Raw-variable variant of loss_with_gradients (no normalization checks).
LossGradients loss_with_gradients_raw(const DenseMatrix& q,
                                      const DenseMatrix& k, double tau);

// Second-order expectation of grad_q when Gaussian noise of per-entry std
// `delta` is added to the keys:
//
//   E[grad_q(l)] ~= -(1/tau) * (k_l - k_bar_l - delta^2 q_l / tau)
//                =  grad_q(l) + (delta^2 / tau^2) q_l
//
// evaluated with the noiseless p and k_bar. delta = 0 reduces to the exact
// gradient.
DenseMatrix expected_noisy_grad_q(const EmbeddingBatch& batch, double tau,
                                  double delta);

enum class NoisySide { key, query };

// Monte-Carlo average of the exact analytic gradients of
// loss(q, k + eps) (side = key) or loss(q + eps, k) (side = query) over
// independent draws eps ~ N(0, delta^2) per entry, added WITHOUT
// re-normalizing. Both gradient targets come out of the same softmax pass.
//
// stderr_* hold the per-entry standard error of the mean. `shards` >= 1
// splits the draws across that many RNG sub-streams; the result is
// bit-deterministic for a fixed (rng, shards) pair and `shards` is recorded
// so outputs can state it.
struct McGradients {
  DenseMatrix grad_q;
  DenseMatrix grad_k;
  DenseMatrix stderr_q;
  DenseMatrix stderr_k;
  std::size_t samples = 0;
  std::size_t shards = 1;
};

McGradients mc_noisy_grad(const EmbeddingBatch& batch, double tau, double delta,
                          NoisySide side, std::size_t samples, RngStream rng,
                          std::size_t shards = 1);

// Per-row projection of k_bar onto q: gamma_l = <k_bar_l, q_l> / <q_l, q_l>,
// with the residual norm ||k_bar_l - gamma_l q_l|| as a diagnostic of how
// well k_bar_l ~ gamma_l q_l holds.
struct GammaProjection {
  std::vector<double> gamma;
  std::vector<double> residual;
};

GammaProjection gamma_projection(const LossGradients& grads,
                                 const EmbeddingBatch& batch);

// alignment  = mean over l of ||q_l - k_l||^2
// uniformity = log mean over ordered pairs (l != j) of exp(-2 ||q_l - q_j||^2)
// Requires a normalized batch with N >= 2 (uniformity needs a pair).
struct AlignmentUniformity {
  double alignment = 0.0;
  double uniformity = 0.0;
};

AlignmentUniformity alignment_uniformity(const EmbeddingBatch& batch);

}  // namespace fanlab

