#include "fanlab/infonce.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "fanlab/errors.hpp"

namespace fanlab {

namespace {

void require_pairs(const DenseMatrix& q, const DenseMatrix& k) {
  if (q.rows() == 0 || q.cols() == 0) {
    throw InvalidInputError("embedding batch: empty matrices");
  }
  if (q.rows() != k.rows() || q.cols() != k.cols()) {
    throw InvalidInputError(
        "embedding batch: q is " + std::to_string(q.rows()) + "x" +
        std::to_string(q.cols()) + " but k is " + std::to_string(k.rows()) +
        "x" + std::to_string(k.cols()));
  }
}

void require_normalized(const EmbeddingBatch& batch) {
  require_pairs(batch.q, batch.k);
  if (!batch.normalized) {
    throw ContractViolationError(
        "batch is not marked normalized; row-normalize first "
        "(make_normalized_batch)");
  }
  constexpr double kTol = 1e-10;
  for (std::size_t i = 0; i < batch.q.rows(); ++i) {
    const double nq = norm2(batch.q.row(i));
    const double nk = norm2(batch.k.row(i));
    if (std::abs(nq - 1.0) > kTol || std::abs(nk - 1.0) > kTol) {
      throw ContractViolationError("batch marked normalized but row " +
                                   std::to_string(i) +
                                   " is off the unit sphere");
    }
  }
}

void require_tau(double tau) {
  if (!(tau > 0.0)) {
    throw InvalidParameterError("tau must be > 0, got " + std::to_string(tau));
  }
}

// Row-wise softmax of (q k^T)/tau with max-subtraction. Also accumulates the
// loss sum_l [logsumexp_l - logit(l, l)].
struct SoftmaxPass {
  DenseMatrix p;
  double loss = 0.0;
};

SoftmaxPass softmax_pass(const DenseMatrix& q, const DenseMatrix& k,
                         double tau) {
  const std::size_t n = q.rows();
  DenseMatrix logits = multiply_a_bt(q, k);
  scale_in_place(logits, 1.0 / tau);
  SoftmaxPass out;
  out.p = DenseMatrix(n, n);
  for (std::size_t l = 0; l < n; ++l) {
    double m = logits(l, 0);
    for (std::size_t j = 1; j < n; ++j) m = std::max(m, logits(l, j));
    double denom = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = std::exp(logits(l, j) - m);
      out.p(l, j) = e;
      denom += e;
    }
    const double inv = 1.0 / denom;
    for (std::size_t j = 0; j < n; ++j) out.p(l, j) *= inv;
    out.loss += std::log(denom) + m - logits(l, l);
  }
  return out;
}

}  // namespace

EmbeddingBatch make_normalized_batch(DenseMatrix q, DenseMatrix k) {
  require_pairs(q, k);
  EmbeddingBatch batch;
  batch.q = l2_normalize_rows(q);
  batch.k = l2_normalize_rows(k);
  batch.normalized = true;
  return batch;
}

double infonce_loss_raw(const DenseMatrix& q, const DenseMatrix& k,
                        double tau) {
  require_tau(tau);
  require_pairs(q, k);
  return softmax_pass(q, k, tau).loss;
}

double infonce_loss(const EmbeddingBatch& batch, double tau) {
  require_tau(tau);
  require_normalized(batch);
  return softmax_pass(batch.q, batch.k, tau).loss;
}

LossGradients loss_with_gradients_raw(const DenseMatrix& q,
                                      const DenseMatrix& k, double tau) {
  require_tau(tau);
  require_pairs(q, k);
  SoftmaxPass pass = softmax_pass(q, k, tau);
  LossGradients out;
  out.tau = tau;
  out.loss = pass.loss;
  out.k_bar = multiply(pass.p, k);
  out.q_tilde = multiply_at_b(pass.p, q);
  out.grad_q = out.k_bar;
  add_scaled(out.grad_q, -1.0, k);
  scale_in_place(out.grad_q, 1.0 / tau);
  out.grad_k = out.q_tilde;
  add_scaled(out.grad_k, -1.0, q);
  scale_in_place(out.grad_k, 1.0 / tau);
  out.p = std::move(pass.p);
  return out;
}

LossGradients loss_with_gradients(const EmbeddingBatch& batch, double tau) {
  require_tau(tau);
  require_normalized(batch);
  return loss_with_gradients_raw(batch.q, batch.k, tau);
}

DenseMatrix expected_noisy_grad_q(const EmbeddingBatch& batch, double tau,
                                  double delta) {
  if (delta < 0.0) {
    throw InvalidParameterError("delta must be >= 0, got " +
                                std::to_string(delta));
  }
  LossGradients grads = loss_with_gradients(batch, tau);
  DenseMatrix out = std::move(grads.grad_q);
  add_scaled(out, delta * delta / (tau * tau), batch.q);
  return out;
}

McGradients mc_noisy_grad(const EmbeddingBatch& batch, double tau, double delta,
                          NoisySide side, std::size_t samples, RngStream rng,
                          std::size_t shards) {
  require_tau(tau);
  require_normalized(batch);
  if (delta < 0.0) {
    throw InvalidParameterError("delta must be >= 0, got " +
                                std::to_string(delta));
  }
  if (samples < 1) {
    throw InvalidParameterError("samples must be >= 1");
  }
  if (shards < 1 || shards > samples) {
    throw InvalidParameterError("shards must be in [1, samples]");
  }

  const std::size_t n = batch.q.rows();
  const std::size_t d = batch.q.cols();

  if (delta == 0.0) {
    // Every draw is the noiseless gradient; return it exactly.
    LossGradients g = loss_with_gradients_raw(batch.q, batch.k, tau);
    McGradients out;
    out.samples = samples;
    out.shards = shards;
    out.grad_q = std::move(g.grad_q);
    out.grad_k = std::move(g.grad_k);
    out.stderr_q = DenseMatrix(n, d);
    out.stderr_k = DenseMatrix(n, d);
    return out;
  }

  DenseMatrix sum_q(n, d), sum_k(n, d), sumsq_q(n, d), sumsq_k(n, d);

  // Each shard owns a sub-stream and a fixed slice of the sample budget, so
  // the accumulated sums depend only on (rng, shards), not on scheduling.
  for (std::size_t shard = 0; shard < shards; ++shard) {
    const std::size_t begin = shard * samples / shards;
    const std::size_t end = (shard + 1) * samples / shards;
    RandomGenerator gen(rng.substream(shard));
    DenseMatrix perturbed = (side == NoisySide::key) ? batch.k : batch.q;
    for (std::size_t t = begin; t < end; ++t) {
      const DenseMatrix& base =
          (side == NoisySide::key) ? batch.k : batch.q;
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          perturbed(i, j) = base(i, j) + delta * gen.next_gaussian();
        }
      }
      LossGradients g =
          (side == NoisySide::key)
              ? loss_with_gradients_raw(batch.q, perturbed, tau)
              : loss_with_gradients_raw(perturbed, batch.k, tau);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
          const double gq = g.grad_q(i, j);
          const double gk = g.grad_k(i, j);
          sum_q(i, j) += gq;
          sum_k(i, j) += gk;
          sumsq_q(i, j) += gq * gq;
          sumsq_k(i, j) += gk * gk;
        }
      }
    }
  }

  const double s = static_cast<double>(samples);
  McGradients out;
  out.samples = samples;
  out.shards = shards;
  out.grad_q = DenseMatrix(n, d);
  out.grad_k = DenseMatrix(n, d);
  out.stderr_q = DenseMatrix(n, d);
  out.stderr_k = DenseMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      const double mq = sum_q(i, j) / s;
      const double mk = sum_k(i, j) / s;
      out.grad_q(i, j) = mq;
      out.grad_k(i, j) = mk;
      if (samples > 1) {
        const double vq =
            std::max(0.0, sumsq_q(i, j) / s - mq * mq) / (s - 1.0);
        const double vk =
            std::max(0.0, sumsq_k(i, j) / s - mk * mk) / (s - 1.0);
        out.stderr_q(i, j) = std::sqrt(vq);
        out.stderr_k(i, j) = std::sqrt(vk);
      }
    }
  }
  return out;
}

GammaProjection gamma_projection(const LossGradients& grads,
                                 const EmbeddingBatch& batch) {
  require_pairs(batch.q, batch.k);
  const std::size_t n = batch.q.rows();
  if (grads.k_bar.rows() != n || grads.k_bar.cols() != batch.q.cols()) {
    throw InvalidInputError("gamma_projection: k_bar shape does not match q");
  }
  GammaProjection out;
  out.gamma.resize(n);
  out.residual.resize(n);
  for (std::size_t l = 0; l < n; ++l) {
    const auto ql = batch.q.row(l);
    const auto kb = grads.k_bar.row(l);
    const double qq = dot(ql, ql);
    if (qq <= 0.0) {
      throw InvalidInputError("gamma_projection: zero q row " +
                              std::to_string(l));
    }
    const double g = dot(kb, ql) / qq;
    out.gamma[l] = g;
    double r2 = 0.0;
    for (std::size_t j = 0; j < ql.size(); ++j) {
      const double r = kb[j] - g * ql[j];
      r2 += r * r;
    }
    out.residual[l] = std::sqrt(r2);
  }
  return out;
}

AlignmentUniformity alignment_uniformity(const EmbeddingBatch& batch) {
  require_normalized(batch);
  const std::size_t n = batch.q.rows();
  if (n < 2) {
    throw InvalidInputError(
        "alignment_uniformity: uniformity needs N >= 2 rows, got " +
        std::to_string(n));
  }
  AlignmentUniformity out;
  double align = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const auto ql = batch.q.row(l);
    const auto kl = batch.k.row(l);
    double d2 = 0.0;
    for (std::size_t j = 0; j < ql.size(); ++j) {
      const double diff = ql[j] - kl[j];
      d2 += diff * diff;
    }
    align += d2;
  }
  out.alignment = align / static_cast<double>(n);

  double mean_pot = 0.0;
  std::size_t pairs = 0;
  for (std::size_t l = 0; l < n; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == l) continue;
      const auto ql = batch.q.row(l);
      const auto qj = batch.q.row(j);
      double d2 = 0.0;
      for (std::size_t c = 0; c < ql.size(); ++c) {
        const double diff = ql[c] - qj[c];
        d2 += diff * diff;
      }
      mean_pot += std::exp(-2.0 * d2);
      ++pairs;
    }
  }
  out.uniformity = std::log(mean_pot / static_cast<double>(pairs));
  return out;
}

}  // namespace fanlab
