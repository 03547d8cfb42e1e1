#include "fanlab/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "fanlab/errors.hpp"
#include "fanlab/infonce.hpp"
#include "fanlab/matrix_io.hpp"

namespace fanlab {
namespace {

double relative_error(double abs_err, double analytic, double numeric,
                      double abs_floor) {
  double denom =
      std::max({std::fabs(analytic), std::fabs(numeric), abs_floor});
  return abs_err / denom;
}

// Records one compared entry. `tol` is the entry's pass threshold; the
// report's worst offender is the entry with the largest abs_err / tol ratio,
// so it stays meaningful even when every entry passes.
void push_row(GradCheckReport& report, double& worst_ratio, const char* target,
              std::size_t row, std::size_t col, double analytic,
              double numeric, double tol, double abs_floor) {
  GradCheckRow r;
  r.target = target;
  r.row = row;
  r.col = col;
  r.analytic = analytic;
  r.numeric = numeric;
  r.abs_err = std::fabs(analytic - numeric);
  r.rel_err = relative_error(r.abs_err, analytic, numeric, abs_floor);
  r.passed = r.abs_err <= tol;
  if (!r.passed) {
    report.passed = false;
    ++report.failures;
  }
  double ratio = tol > 0.0 ? r.abs_err / tol
                           : (r.abs_err > 0.0 ? HUGE_VAL : 0.0);
  if (ratio > worst_ratio) {
    worst_ratio = ratio;
    report.worst = r;
  }
  report.rows.push_back(std::move(r));
}

}  // namespace

GradCheckReport run_fd_gradcheck(const FdCheckConfig& cfg) {
  if (cfg.n == 0 || cfg.d == 0) {
    throw InvalidParameterError("fd gradcheck: n and d must be >= 1");
  }
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw InvalidParameterError("fd gradcheck: tau must be finite and > 0");
  }
  if (!(cfg.fd_step > 0.0) || !std::isfinite(cfg.fd_step)) {
    throw InvalidParameterError(
        "fd gradcheck: fd_step must be finite and > 0");
  }

  EmbeddingBatch batch = make_normalized_batch(
      gaussian_matrix(cfg.n, cfg.d, 1.0, cfg.rng.substream(1)),
      gaussian_matrix(cfg.n, cfg.d, 1.0, cfg.rng.substream(2)));
  LossGradients grads = loss_with_gradients(batch, cfg.tau);
  double sign = cfg.negate_analytic ? -1.0 : 1.0;

  GradCheckReport report;
  report.rows.reserve(2 * cfg.n * cfg.d);
  double worst_ratio = -1.0;
  double h = cfg.fd_step;

  // The loss is differentiated in the embedding entries as free variables
  // (no re-normalization), matching what the closed forms describe.
  DenseMatrix q = batch.q;
  DenseMatrix k = batch.k;
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.d; ++j) {
      double saved = q(i, j);
      q(i, j) = saved + h;
      double up = infonce_loss_raw(q, k, cfg.tau);
      q(i, j) = saved - h;
      double down = infonce_loss_raw(q, k, cfg.tau);
      q(i, j) = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = sign * grads.grad_q(i, j);
      double tol = std::max(
          cfg.rel_tol * std::max(std::fabs(analytic), std::fabs(numeric)),
          cfg.abs_floor);
      push_row(report, worst_ratio, "grad_q_fd", i, j, analytic, numeric, tol,
               cfg.abs_floor);
    }
  }
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.d; ++j) {
      double saved = k(i, j);
      k(i, j) = saved + h;
      double up = infonce_loss_raw(q, k, cfg.tau);
      k(i, j) = saved - h;
      double down = infonce_loss_raw(q, k, cfg.tau);
      k(i, j) = saved;
      double numeric = (up - down) / (2.0 * h);
      double analytic = sign * grads.grad_k(i, j);
      double tol = std::max(
          cfg.rel_tol * std::max(std::fabs(analytic), std::fabs(numeric)),
          cfg.abs_floor);
      push_row(report, worst_ratio, "grad_k_fd", i, j, analytic, numeric, tol,
               cfg.abs_floor);
    }
  }
  return report;
}

GradCheckReport run_mc_gradcheck(const McCheckConfig& cfg) {
  if (cfg.n == 0 || cfg.d == 0) {
    throw InvalidParameterError("mc gradcheck: n and d must be >= 1");
  }
  if (!(cfg.tau > 0.0) || !std::isfinite(cfg.tau)) {
    throw InvalidParameterError("mc gradcheck: tau must be finite and > 0");
  }
  if (!(cfg.delta >= 0.0) || !std::isfinite(cfg.delta)) {
    throw InvalidParameterError(
        "mc gradcheck: delta must be finite and >= 0");
  }

  EmbeddingBatch batch = make_normalized_batch(
      gaussian_matrix(cfg.n, cfg.d, 1.0, cfg.rng.substream(1)),
      gaussian_matrix(cfg.n, cfg.d, 1.0, cfg.rng.substream(2)));
  LossGradients noiseless = loss_with_gradients(batch, cfg.tau);
  DenseMatrix closed_q = expected_noisy_grad_q(batch, cfg.tau, cfg.delta);
  McGradients mc = mc_noisy_grad(batch, cfg.tau, cfg.delta, NoisySide::key,
                                 cfg.samples, cfg.rng.substream(3),
                                 cfg.shards);
  double sign = cfg.negate_analytic ? -1.0 : 1.0;
  // The delta^3 floor absorbs the genuinely third-order terms the closed
  // forms drop; 3x the MC standard error absorbs sampling noise.
  double bias_floor = 10.0 * cfg.delta * cfg.delta * cfg.delta;
  // Entries are reported at MC-scale precision; the usual FD floor would be
  // meaninglessly tight here.
  double abs_floor = 1e-12;

  GradCheckReport report;
  report.rows.reserve(2 * cfg.n * cfg.d);
  double worst_ratio = -1.0;

  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.d; ++j) {
      double analytic = sign * closed_q(i, j);
      double numeric = mc.grad_q(i, j);
      double tol = std::max(3.0 * mc.stderr_q(i, j), bias_floor);
      push_row(report, worst_ratio, "grad_q_mc", i, j, analytic, numeric, tol,
               abs_floor);
    }
  }
  // The matching key-side expectation has no delta^2 correction: the noisy
  // key gradient should agree with the noiseless one to this order.
  for (std::size_t i = 0; i < cfg.n; ++i) {
    for (std::size_t j = 0; j < cfg.d; ++j) {
      double analytic = sign * noiseless.grad_k(i, j);
      double numeric = mc.grad_k(i, j);
      double tol = std::max(3.0 * mc.stderr_k(i, j), bias_floor);
      push_row(report, worst_ratio, "grad_k_mc", i, j, analytic, numeric, tol,
               abs_floor);
    }
  }
  return report;
}

void write_gradcheck_csv(const std::string& path,
                         const std::vector<GradCheckRow>& rows) {
  std::string out = "target,row,col,analytic,numeric,abs_err,rel_err\n";
  for (const GradCheckRow& r : rows) {
    out += r.target;
    out += ',';
    out += std::to_string(r.row);
    out += ',';
    out += std::to_string(r.col);
    out += ',';
    out += format_double(r.analytic);
    out += ',';
    out += format_double(r.numeric);
    out += ',';
    out += format_double(r.abs_err);
    out += ',';
    out += format_double(r.rel_err);
    out += '\n';
  }
  write_text_file(path, out);
}

}  // namespace fanlab
