#pragma once

#include <cstddef>
#include <vector>

#include "fanlab/dense_matrix.hpp"

namespace fanlab {

// Thin SVD factors of an m x n matrix: x ~= u * diag(s) * v^T with
//   u: m x r, orthonormal columns,
//   s: r singular values, strictly descending-or-equal, all > tol * s[0],
//   v: n x r, orthonormal columns.
// r == 0 (empty factors) if and only if x is the zero matrix.
//
// Deterministic sign convention: the largest-magnitude entry of every column
// of v is positive (first occurrence wins ties); u columns are flipped in
// tandem so the product is unchanged.
struct SvdFactors {
  DenseMatrix u;
  std::vector<double> s;
  DenseMatrix v;
  double truncation_tol = 0.0;

  std::size_t rank() const noexcept { return s.size(); }
};

// Computes the thin SVD via Householder bidiagonalization followed by
// implicit-shift QR iteration on the bidiagonal (Golub-Kahan-Reinsch).
// Singular values with s[i] <= truncation_tol * s[0] are dropped.
//
// Errors: InvalidInputError for empty or non-finite input,
// InvalidParameterError for truncation_tol outside [0, 1),
// NumericalFailureError (naming the matrix shape) if the QR iteration
// exceeds its per-value iteration cap.
SvdFactors thin_svd(const DenseMatrix& x, double truncation_tol = 1e-12);

// All min(m, n) singular values in descending order (no truncation, no
// vectors). Much faster than thin_svd for spectrum-only consumers.
std::vector<double> singular_values(const DenseMatrix& x);

namespace detail {

// Internal driver. want_u / want_v control factor accumulation; a factor that
// was not requested comes back as an empty matrix.
struct SvdControls {
  bool want_u = true;
  bool want_v = true;
  double truncation_tol = 1e-12;
};

SvdFactors svd_decompose(const DenseMatrix& x, const SvdControls& controls);

// Testing/debugging knob: cap on QR steps per singular value (default 75).
// Exceeding the cap raises NumericalFailureError.
std::size_t svd_iteration_cap() noexcept;
void set_svd_iteration_cap(std::size_t cap) noexcept;

}  // namespace detail

}  // namespace fanlab
