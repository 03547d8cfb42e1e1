#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "fanlab/dense_matrix.hpp"
#include "fanlab/fanoise.hpp"
#include "fanlab/rng.hpp"
#include "fanlab/synth.hpp"

namespace fanlab {

// Toy contrastive encoder. linear: z = x W1^T. mlp: z = tanh(x W1^T) W2^T.
enum class EncoderKind { linear, mlp };

std::string to_string(EncoderKind kind);
EncoderKind parse_encoder_kind(const std::string& name);

struct EncoderParams {
  EncoderKind kind = EncoderKind::linear;
  DenseMatrix w1;  // linear: embed x feature; mlp: hidden x feature
  DenseMatrix w2;  // mlp only: embed x hidden
};

struct TrainConfig {
  EncoderKind encoder = EncoderKind::linear;
  std::size_t hidden_dim = 32;  // mlp only
  std::size_t embed_dim = 16;
  std::size_t steps = 500;
  std::size_t batch_size = 64;
  double learning_rate = 0.5;
  double tau = 0.02;  // softmax temperature
  NoiseConfig noise;
  std::size_t eval_every = 100;  // 0 disables periodic evaluation
  RngStream rng{42, 0};
};

struct TrainLogRow {
  std::size_t step = 0;
  double loss = 0.0;
  double alignment = 0.0;
  double uniformity = 0.0;
  bool has_eval = false;
  double eval_p_at_1 = 0.0;
};

struct TrainResult {
  EncoderParams params;
  std::vector<TrainLogRow> log;
};

// One training step: draw a batch, optionally inject noise at the configured
// position/side, encode, L2-normalize, take the mean-reduced loss (the sum
// form divided by batch size, so learning rates are batch-size-insensitive),
// and backpropagate with the exact chain rule through the normalization.
// Noise is a constant during backpropagation; injection is redrawn each step
// from stream substream(step), so a run with noise disabled is bit-identical
// to alpha = 0. The logged alignment/uniformity and all evaluations use
// noise-free encodings. Throws DivergenceError (with the step) when the loss
// or any parameter goes non-finite.
TrainResult train(const PairedDataset& data, const TrainConfig& cfg);

// Encodes feature rows and L2-normalizes the result (no noise).
DenseMatrix encode_normalized(const EncoderParams& params,
                              const DenseMatrix& features);

// Mean-reduced, noise-free loss of one (x, y) feature batch under fixed
// parameters — exactly the objective a training step descends when injection
// is off. Exposed so parameter gradients can be finite-difference checked.
double batch_loss(const EncoderParams& params, const DenseMatrix& x,
                  const DenseMatrix& y, double tau);

// Analytic parameter gradients of batch_loss (w2 left empty for linear).
struct ParamGradients {
  DenseMatrix w1;
  DenseMatrix w2;
};

ParamGradients batch_loss_gradients(const EncoderParams& params,
                                    const DenseMatrix& x, const DenseMatrix& y,
                                    double tau);

// Fraction of eval queries whose positive outranks every distractor by
// cosine similarity. Ties count as failures, so a distractor duplicating the
// positive zeroes that query.
double evaluate_p_at_1(const EncoderParams& params,
                       const std::vector<EvalItem>& eval_set);

struct SweepCell {
  double alpha = 0.0;
  ScalingMode scaling = ScalingMode::sublinear;
  std::uint64_t seed = 0;
  bool failed = false;
  std::size_t failed_step = 0;
  double final_p_at_1 = 0.0;
  double final_alignment = 0.0;
  double final_uniformity = 0.0;
};

// Grid of train+evaluate runs over alphas x scalings x seeds (row order
// follows that nesting). Each cell reseeds both the trainer stream and the
// noise stream from its seed. Diverged cells are recorded with `failed` set
// and the sweep continues.
std::vector<SweepCell> sweep(const PairedDataset& data,
                             const TrainConfig& base_cfg,
                             const std::vector<double>& alphas,
                             const std::vector<ScalingMode>& scalings,
                             const std::vector<std::uint64_t>& seeds);

// train_log.csv rows: step,loss,alignment,uniformity,p_at_1 (p_at_1 empty on
// non-eval steps). sweep.csv rows:
// alpha,scaling,seed,final_p_at_1,final_alignment,final_uniformity
// (diverged cells leave the three result fields empty).
void write_train_log_csv(const std::string& path,
                         const std::vector<TrainLogRow>& log);
void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells);

}  // namespace fanlab

