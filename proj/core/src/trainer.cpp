#include "fanlab/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fanlab/errors.hpp"
#include "fanlab/infonce.hpp"
#include "fanlab/matrix_io.hpp"

namespace fanlab {

namespace {

// Sub-stream children of cfg.rng (noise streams hang off cfg.noise.rng).
enum : std::uint64_t {
  kChildInitW1 = 100,
  kChildInitW2 = 101,
  kChildBatch = 200,
};

struct EncodeCache {
  DenseMatrix z;  // batch x embed, pre-normalization (post-noise if injected)
  DenseMatrix h;  // batch x hidden, tanh activations; empty for linear
};

EncodeCache encode_raw(const EncoderParams& params, const DenseMatrix& x) {
  EncodeCache cache;
  if (params.kind == EncoderKind::linear) {
    cache.z = multiply_a_bt(x, params.w1);
    return cache;
  }
  cache.h = multiply_a_bt(x, params.w1);
  for (std::size_t i = 0; i < cache.h.rows(); ++i) {
    for (std::size_t j = 0; j < cache.h.cols(); ++j) {
      cache.h(i, j) = std::tanh(cache.h(i, j));
    }
  }
  cache.z = multiply_a_bt(cache.h, params.w2);
  return cache;
}

struct NormalizedRows {
  DenseMatrix u;
  std::vector<double> norms;
  bool finite = true;
};

// Row-normalizes without the library's degenerate-row error so the training
// loop can classify overflow as divergence instead.
NormalizedRows normalize_rows_checked(const DenseMatrix& z) {
  NormalizedRows out;
  out.u = z;
  out.norms.resize(z.rows());
  for (std::size_t i = 0; i < z.rows(); ++i) {
    double nrm2 = 0.0;
    for (std::size_t j = 0; j < z.cols(); ++j) nrm2 += z(i, j) * z(i, j);
    const double nrm = std::sqrt(nrm2);
    out.norms[i] = nrm;
    if (!std::isfinite(nrm) || nrm < 1e-12) {
      out.finite = false;
      return out;
    }
    const double inv = 1.0 / nrm;
    for (std::size_t j = 0; j < z.cols(); ++j) out.u(i, j) *= inv;
  }
  return out;
}

// d(loss)/dz from d(loss)/du for u = z/||z||:
// g_z = (g_u - <g_u, u> u) / ||z||.
DenseMatrix backprop_normalization(const DenseMatrix& g_u,
                                   const DenseMatrix& u,
                                   const std::vector<double>& norms) {
  DenseMatrix g_z(g_u.rows(), g_u.cols());
  for (std::size_t i = 0; i < g_u.rows(); ++i) {
    double inner = 0.0;
    for (std::size_t j = 0; j < g_u.cols(); ++j) inner += g_u(i, j) * u(i, j);
    const double inv = 1.0 / norms[i];
    for (std::size_t j = 0; j < g_u.cols(); ++j) {
      g_z(i, j) = (g_u(i, j) - inner * u(i, j)) * inv;
    }
  }
  return g_z;
}

struct ParamGrads {
  DenseMatrix w1;
  DenseMatrix w2;
};

// Accumulates this side's contribution to the parameter gradients given
// d(loss)/dz, the encode cache, and the (possibly injected) input features.
void backprop_encoder(const EncoderParams& params, const DenseMatrix& g_z,
                      const EncodeCache& cache, const DenseMatrix& x,
                      ParamGrads& grads) {
  if (params.kind == EncoderKind::linear) {
    add_scaled(grads.w1, 1.0, multiply_at_b(g_z, x));
    return;
  }
  add_scaled(grads.w2, 1.0, multiply_at_b(g_z, cache.h));
  DenseMatrix g_pre = multiply(g_z, params.w2);  // batch x hidden
  for (std::size_t i = 0; i < g_pre.rows(); ++i) {
    for (std::size_t j = 0; j < g_pre.cols(); ++j) {
      const double h = cache.h(i, j);
      g_pre(i, j) *= 1.0 - h * h;
    }
  }
  add_scaled(grads.w1, 1.0, multiply_at_b(g_pre, x));
}

void validate_config(const PairedDataset& data, const TrainConfig& cfg) {
  if (cfg.steps < 1) throw InvalidParameterError("train: steps must be >= 1");
  if (!(cfg.tau > 0.0)) throw InvalidParameterError("train: tau must be > 0");
  if (cfg.batch_size < 2) {
    throw InvalidParameterError("train: batch_size must be >= 2");
  }
  if (data.train_x.rows() < cfg.batch_size) {
    throw InvalidParameterError(
        "train: dataset has " + std::to_string(data.train_x.rows()) +
        " pairs, fewer than batch_size = " + std::to_string(cfg.batch_size));
  }
  if (cfg.embed_dim < 1) {
    throw InvalidParameterError("train: embed_dim must be >= 1");
  }
  if (cfg.encoder == EncoderKind::mlp && cfg.hidden_dim < 1) {
    throw InvalidParameterError("train: mlp needs hidden_dim >= 1");
  }
  if (!(cfg.learning_rate > 0.0) || !std::isfinite(cfg.learning_rate)) {
    throw InvalidParameterError("train: learning_rate must be finite and > 0");
  }
  if (cfg.eval_every > 0 && data.eval.empty()) {
    throw InvalidParameterError(
        "train: eval_every > 0 but the dataset has no eval items");
  }
}

EncoderParams init_params(const TrainConfig& cfg, std::size_t feature_dim) {
  EncoderParams params;
  params.kind = cfg.encoder;
  if (cfg.encoder == EncoderKind::linear) {
    params.w1 = gaussian_matrix(
        cfg.embed_dim, feature_dim,
        1.0 / std::sqrt(static_cast<double>(feature_dim)),
        cfg.rng.substream(kChildInitW1));
  } else {
    params.w1 = gaussian_matrix(
        cfg.hidden_dim, feature_dim,
        1.0 / std::sqrt(static_cast<double>(feature_dim)),
        cfg.rng.substream(kChildInitW1));
    params.w2 = gaussian_matrix(
        cfg.embed_dim, cfg.hidden_dim,
        1.0 / std::sqrt(static_cast<double>(cfg.hidden_dim)),
        cfg.rng.substream(kChildInitW2));
  }
  return params;
}

DenseMatrix gather_rows(const DenseMatrix& source,
                        const std::vector<std::size_t>& indices) {
  DenseMatrix out(indices.size(), source.cols());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto row = source.row(indices[i]);
    for (std::size_t j = 0; j < source.cols(); ++j) out(i, j) = row[j];
  }
  return out;
}

bool side_active(const NoiseConfig& noise, bool query_side) {
  if (noise.alpha == 0.0 || noise.scaling == ScalingMode::none) return false;
  if (noise.side == NoiseSideTarget::both) return true;
  return query_side ? (noise.side == NoiseSideTarget::query)
                    : (noise.side == NoiseSideTarget::key);
}

// Noise-free encode for diagnostics; parameters large enough to overflow the
// row norms are classified as divergence at `step` rather than surfacing as
// a normalization contract violation downstream.
DenseMatrix diagnostic_encode(const EncoderParams& params,
                              const DenseMatrix& features, std::size_t step) {
  NormalizedRows rows = normalize_rows_checked(encode_raw(params, features).z);
  if (!rows.finite) {
    throw DivergenceError(
        "train: diagnostic encoding norm overflowed or vanished", step);
  }
  return std::move(rows.u);
}

}  // namespace

std::string to_string(EncoderKind kind) {
  switch (kind) {
    case EncoderKind::linear: return "linear";
    case EncoderKind::mlp: return "mlp";
  }
  throw InvalidParameterError("unknown encoder kind value");
}

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "linear") return EncoderKind::linear;
  if (name == "mlp") return EncoderKind::mlp;
  throw InvalidParameterError("unknown encoder '" + name +
                              "' (expected linear|mlp)");
}

DenseMatrix encode_normalized(const EncoderParams& params,
                              const DenseMatrix& features) {
  return l2_normalize_rows(encode_raw(params, features).z);
}

double batch_loss(const EncoderParams& params, const DenseMatrix& x,
                  const DenseMatrix& y, double tau) {
  const DenseMatrix uq = encode_normalized(params, x);
  const DenseMatrix uk = encode_normalized(params, y);
  return infonce_loss_raw(uq, uk, tau) / static_cast<double>(x.rows());
}

ParamGradients batch_loss_gradients(const EncoderParams& params,
                                    const DenseMatrix& x, const DenseMatrix& y,
                                    double tau) {
  const EncodeCache cq = encode_raw(params, x);
  const EncodeCache ck = encode_raw(params, y);
  const NormalizedRows uq = normalize_rows_checked(cq.z);
  const NormalizedRows uk = normalize_rows_checked(ck.z);
  if (!uq.finite || !uk.finite) {
    throw NumericalFailureError(
        "batch_loss_gradients: embedding norm overflowed or vanished");
  }
  LossGradients lg = loss_with_gradients_raw(uq.u, uk.u, tau);
  const double inv_b = 1.0 / static_cast<double>(x.rows());
  scale_in_place(lg.grad_q, inv_b);
  scale_in_place(lg.grad_k, inv_b);

  ParamGrads acc;
  acc.w1 = DenseMatrix(params.w1.rows(), params.w1.cols());
  if (params.kind == EncoderKind::mlp) {
    acc.w2 = DenseMatrix(params.w2.rows(), params.w2.cols());
  }
  backprop_encoder(params, backprop_normalization(lg.grad_q, uq.u, uq.norms),
                   cq, x, acc);
  backprop_encoder(params, backprop_normalization(lg.grad_k, uk.u, uk.norms),
                   ck, y, acc);
  ParamGradients out;
  out.w1 = std::move(acc.w1);
  out.w2 = std::move(acc.w2);
  return out;
}

TrainResult train(const PairedDataset& data, const TrainConfig& cfg) {
  validate_config(data, cfg);
  const std::size_t num_pairs = data.train_x.rows();
  const std::size_t feature_dim = data.train_x.cols();
  const std::size_t b = cfg.batch_size;

  TrainResult result;
  result.params = init_params(cfg, feature_dim);
  result.log.reserve(cfg.steps);

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    // Batch indices, drawn iid from a per-step sub-stream.
    std::vector<std::size_t> indices(b);
    {
      RandomGenerator gen(cfg.rng.substream(kChildBatch).substream(step));
      for (std::size_t i = 0; i < b; ++i) {
        indices[i] = std::min(
            num_pairs - 1,
            static_cast<std::size_t>(gen.next_unit() *
                                     static_cast<double>(num_pairs)));
      }
    }
    DenseMatrix xq = gather_rows(data.train_x, indices);
    DenseMatrix xk = gather_rows(data.train_y, indices);

    // Noise streams are derived per (step, side), never consumed
    // sequentially, so disabling injection cannot shift later draws.
    NoiseConfig step_noise = cfg.noise;
    const bool inject_q = side_active(cfg.noise, true);
    const bool inject_k = side_active(cfg.noise, false);
    if (cfg.noise.position == NoisePosition::input_layer) {
      if (inject_q) {
        step_noise.rng = cfg.noise.rng.substream(step).substream(0);
        xq = fanoise_inject(xq, step_noise).e_out;
      }
      if (inject_k) {
        step_noise.rng = cfg.noise.rng.substream(step).substream(1);
        xk = fanoise_inject(xk, step_noise).e_out;
      }
    }

    EncodeCache cq = encode_raw(result.params, xq);
    EncodeCache ck = encode_raw(result.params, xk);
    if (cfg.noise.position == NoisePosition::output_layer) {
      if (inject_q) {
        step_noise.rng = cfg.noise.rng.substream(step).substream(0);
        cq.z = fanoise_inject(cq.z, step_noise).e_out;
      }
      if (inject_k) {
        step_noise.rng = cfg.noise.rng.substream(step).substream(1);
        ck.z = fanoise_inject(ck.z, step_noise).e_out;
      }
    }
    if (!cq.z.all_finite() || !ck.z.all_finite()) {
      throw DivergenceError("train: non-finite encodings", step);
    }

    NormalizedRows uq = normalize_rows_checked(cq.z);
    NormalizedRows uk = normalize_rows_checked(ck.z);
    if (!uq.finite || !uk.finite) {
      throw DivergenceError("train: embedding norm overflowed or vanished",
                            step);
    }

    LossGradients lg = loss_with_gradients_raw(uq.u, uk.u, cfg.tau);
    const double inv_b = 1.0 / static_cast<double>(b);
    const double mean_loss = lg.loss * inv_b;
    if (!std::isfinite(mean_loss)) {
      throw DivergenceError("train: non-finite loss", step);
    }
    scale_in_place(lg.grad_q, inv_b);
    scale_in_place(lg.grad_k, inv_b);

    ParamGrads grads;
    grads.w1 = DenseMatrix(result.params.w1.rows(), result.params.w1.cols());
    if (result.params.kind == EncoderKind::mlp) {
      grads.w2 =
          DenseMatrix(result.params.w2.rows(), result.params.w2.cols());
    }
    backprop_encoder(result.params,
                     backprop_normalization(lg.grad_q, uq.u, uq.norms), cq, xq,
                     grads);
    backprop_encoder(result.params,
                     backprop_normalization(lg.grad_k, uk.u, uk.norms), ck, xk,
                     grads);

    add_scaled(result.params.w1, -cfg.learning_rate, grads.w1);
    if (result.params.kind == EncoderKind::mlp) {
      add_scaled(result.params.w2, -cfg.learning_rate, grads.w2);
    }
    if (!result.params.w1.all_finite() ||
        (result.params.kind == EncoderKind::mlp &&
         !result.params.w2.all_finite())) {
      throw DivergenceError("train: non-finite parameters", step);
    }

    // Diagnostics on noise-free encodings of the same batch.
    TrainLogRow row;
    row.step = step;
    row.loss = mean_loss;
    {
      DenseMatrix bx = gather_rows(data.train_x, indices);
      DenseMatrix by = gather_rows(data.train_y, indices);
      EmbeddingBatch clean;
      clean.q = diagnostic_encode(result.params, bx, step);
      clean.k = diagnostic_encode(result.params, by, step);
      clean.normalized = true;
      const AlignmentUniformity au = alignment_uniformity(clean);
      row.alignment = au.alignment;
      row.uniformity = au.uniformity;
    }
    if (cfg.eval_every > 0 && (step + 1) % cfg.eval_every == 0) {
      row.has_eval = true;
      row.eval_p_at_1 = evaluate_p_at_1(result.params, data.eval);
    }
    result.log.push_back(row);
  }
  return result;
}

double evaluate_p_at_1(const EncoderParams& params,
                       const std::vector<EvalItem>& eval_set) {
  if (eval_set.empty()) {
    throw InvalidInputError("evaluate_p_at_1: empty eval set");
  }
  std::size_t hits = 0;
  for (const EvalItem& item : eval_set) {
    DenseMatrix query(1, item.query.size(),
                      std::vector<double>(item.query));
    DenseMatrix positive(1, item.positive.size(),
                         std::vector<double>(item.positive));
    const DenseMatrix uq = encode_normalized(params, query);
    const DenseMatrix up = encode_normalized(params, positive);
    const double pos_sim = dot(uq.row(0), up.row(0));
    bool beaten = false;
    if (item.distractors.rows() > 0) {
      const DenseMatrix ud = encode_normalized(params, item.distractors);
      for (std::size_t i = 0; i < ud.rows(); ++i) {
        // Ties break toward failure: a distractor matching the positive's
        // similarity defeats the query.
        if (dot(uq.row(0), ud.row(i)) >= pos_sim) {
          beaten = true;
          break;
        }
      }
    }
    if (!beaten) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(eval_set.size());
}

std::vector<SweepCell> sweep(const PairedDataset& data,
                             const TrainConfig& base_cfg,
                             const std::vector<double>& alphas,
                             const std::vector<ScalingMode>& scalings,
                             const std::vector<std::uint64_t>& seeds) {
  if (alphas.empty() || scalings.empty() || seeds.empty()) {
    throw InvalidParameterError("sweep: empty grid");
  }
  if (data.eval.empty()) {
    throw InvalidParameterError("sweep: dataset has no eval items");
  }
  std::vector<SweepCell> cells;
  cells.reserve(alphas.size() * scalings.size() * seeds.size());
  for (double alpha : alphas) {
    for (ScalingMode scaling : scalings) {
      for (std::uint64_t seed : seeds) {
        SweepCell cell;
        cell.alpha = alpha;
        cell.scaling = scaling;
        cell.seed = seed;
        TrainConfig cfg = base_cfg;
        cfg.noise.alpha = alpha;
        cfg.noise.scaling = scaling;
        cfg.rng = RngStream{seed, 0};
        cfg.noise.rng = RngStream{seed, 1};
        try {
          TrainResult run = train(data, cfg);
          cell.final_p_at_1 = evaluate_p_at_1(run.params, data.eval);
          EmbeddingBatch clean;
          clean.q = diagnostic_encode(run.params, data.train_x, cfg.steps);
          clean.k = diagnostic_encode(run.params, data.train_y, cfg.steps);
          clean.normalized = true;
          const AlignmentUniformity au = alignment_uniformity(clean);
          cell.final_alignment = au.alignment;
          cell.final_uniformity = au.uniformity;
        } catch (const DivergenceError& err) {
          cell.failed = true;
          cell.failed_step = err.step();
        }
        cells.push_back(cell);
      }
    }
  }
  return cells;
}

void write_train_log_csv(const std::string& path,
                         const std::vector<TrainLogRow>& log) {
  std::string text = "step,loss,alignment,uniformity,p_at_1\n";
  for (const TrainLogRow& row : log) {
    text += std::to_string(row.step);
    text += ',';
    text += format_double(row.loss);
    text += ',';
    text += format_double(row.alignment);
    text += ',';
    text += format_double(row.uniformity);
    text += ',';
    if (row.has_eval) text += format_double(row.eval_p_at_1);
    text += '\n';
  }
  write_text_file(path, text);
}

void write_sweep_csv(const std::string& path,
                     const std::vector<SweepCell>& cells) {
  std::string text =
      "alpha,scaling,seed,final_p_at_1,final_alignment,final_uniformity\n";
  for (const SweepCell& cell : cells) {
    text += format_double(cell.alpha);
    text += ',';
    text += to_string(cell.scaling);
    text += ',';
    text += std::to_string(cell.seed);
    text += ',';
    if (!cell.failed) {
      text += format_double(cell.final_p_at_1);
      text += ',';
      text += format_double(cell.final_alignment);
      text += ',';
      text += format_double(cell.final_uniformity);
    } else {
      text += ",,";
    }
    text += '\n';
  }
  write_text_file(path, text);
}

}  // namespace fanlab
