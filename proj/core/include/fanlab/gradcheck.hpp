#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "fanlab/rng.hpp"

namespace fanlab {

// One compared gradient entry. `analytic` is the closed form, `numeric` the
// oracle (central finite difference or Monte-Carlo mean); rel_err divides
// abs_err by max(|analytic|, |numeric|, abs_floor).
struct GradCheckRow {
  std::string target;
  std::size_t row = 0;
  std::size_t col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double abs_err = 0.0;
  double rel_err = 0.0;
  bool passed = true;
};

struct GradCheckReport {
  std::vector<GradCheckRow> rows;
  bool passed = true;
  std::size_t failures = 0;
  GradCheckRow worst;  // largest abs_err-to-tolerance ratio
};

// Analytic gradients vs central finite differences of the loss, every entry
// of grad_q and grad_k, on a random normalized batch. An entry passes when
// abs_err <= max(rel_tol * max(|analytic|, |numeric|), abs_floor).
// negate_analytic flips the sign of every analytic value first — a
// negative-control hook that must make the suite fail.
struct FdCheckConfig {
  std::size_t n = 8;
  std::size_t d = 16;
  double tau = 1.0;
  double fd_step = 1e-5;
  double rel_tol = 1e-6;
  double abs_floor = 1e-9;
  bool negate_analytic = false;
  RngStream rng{42, 0};
};

GradCheckReport run_fd_gradcheck(const FdCheckConfig& cfg);

// Monte-Carlo noisy gradients under key-side noise vs their closed forms:
//   grad_q_mc vs the second-order expectation (delta^2 correction included)
//   grad_k_mc vs the noiseless gradient (no correction term appears)
// An entry passes when abs_err <= max(3 * MC-stderr, 10 * delta^3).
struct McCheckConfig {
  std::size_t n = 16;
  std::size_t d = 32;
  double tau = 1.0;
  double delta = 0.05;
  std::size_t samples = 100000;
  std::size_t shards = 1;
  bool negate_analytic = false;
  RngStream rng{42, 0};
};

GradCheckReport run_mc_gradcheck(const McCheckConfig& cfg);

// CSV with header `target,row,col,analytic,numeric,abs_err,rel_err`.
void write_gradcheck_csv(const std::string& path,
                         const std::vector<GradCheckRow>& rows);

}  // namespace fanlab
