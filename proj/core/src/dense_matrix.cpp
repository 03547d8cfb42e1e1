#include "fanlab/dense_matrix.hpp"

#include <cmath>
#include <string>

#include "fanlab/errors.hpp"

namespace fanlab {

namespace {

void require_nonempty(const DenseMatrix& a, const char* what) {
  if (a.empty()) {
    throw InvalidInputError(std::string(what) + ": empty matrix");
  }
}

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInputError(std::string(what) + ": shape mismatch (" +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()) + ")");
  }
}

}  // namespace

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols,
                         std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw InvalidInputError("DenseMatrix: data size " +
                            std::to_string(data_.size()) +
                            " does not match shape " + std::to_string(rows_) +
                            "x" + std::to_string(cols_));
  }
}

DenseMatrix DenseMatrix::from_rows(
    std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  DenseMatrix out(m, n);
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != n) {
      throw InvalidInputError("DenseMatrix::from_rows: ragged rows");
    }
    std::size_t j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

bool DenseMatrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

DenseMatrix transpose(const DenseMatrix& a) {
  require_nonempty(a, "transpose");
  DenseMatrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) {
      out(j, i) = a(i, j);
    }
  }
  return out;
}

DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b) {
  require_nonempty(a, "multiply");
  require_nonempty(b, "multiply");
  if (a.cols() != b.rows()) {
    throw InvalidInputError("multiply: inner dimensions disagree (" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + ")");
  }
  DenseMatrix out(a.rows(), b.cols());
  // i-k-j loop order keeps the inner accesses contiguous for row-major data.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* out_row = out.data() + i * out.cols();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      const double* b_row = b.data() + k * b.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aik * b_row[j];
      }
    }
  }
  return out;
}

DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b) {
  require_nonempty(a, "multiply_at_b");
  require_nonempty(b, "multiply_at_b");
  if (a.rows() != b.rows()) {
    throw InvalidInputError("multiply_at_b: row counts disagree (" +
                            std::to_string(a.rows()) + " vs " +
                            std::to_string(b.rows()) + ")");
  }
  DenseMatrix out(a.cols(), b.cols());
  for (std::size_t k = 0; k < a.rows(); ++k) {
    const double* a_row = a.data() + k * a.cols();
    const double* b_row = b.data() + k * b.cols();
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const double aki = a_row[i];
      if (aki == 0.0) continue;
      double* out_row = out.data() + i * out.cols();
      for (std::size_t j = 0; j < b.cols(); ++j) {
        out_row[j] += aki * b_row[j];
      }
    }
  }
  return out;
}

DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b) {
  require_nonempty(a, "multiply_a_bt");
  require_nonempty(b, "multiply_a_bt");
  if (a.cols() != b.cols()) {
    throw InvalidInputError("multiply_a_bt: column counts disagree (" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.cols()) + ")");
  }
  DenseMatrix out(a.rows(), b.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < b.rows(); ++j) {
      out(i, j) = dot(a.row(i), b.row(j));
    }
  }
  return out;
}

void add_scaled(DenseMatrix& a, double scale, const DenseMatrix& b) {
  require_nonempty(a, "add_scaled");
  require_same_shape(a, b, "add_scaled");
  double* o = a.data();
  const double* p = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) o[i] += scale * p[i];
}

void scale_in_place(DenseMatrix& a, double scale) {
  double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) p[i] *= scale;
}

double frobenius_norm(const DenseMatrix& a) {
  double sum = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) sum += p[i] * p[i];
  return std::sqrt(sum);
}

double max_abs(const DenseMatrix& a) {
  double best = 0.0;
  const double* p = a.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    best = std::max(best, std::abs(p[i]));
  }
  return best;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  require_same_shape(a, b, "max_abs_diff");
  double best = 0.0;
  const double* p = a.data();
  const double* q = b.data();
  for (std::size_t i = 0; i < a.size(); ++i) {
    best = std::max(best, std::abs(p[i] - q[i]));
  }
  return best;
}

double max_orthonormality_defect(const DenseMatrix& a) {
  if (a.cols() == 0) return 0.0;  // rank-0 factor is vacuously orthonormal
  require_nonempty(a, "max_orthonormality_defect");
  double best = 0.0;
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      double sum = 0.0;
      for (std::size_t k = 0; k < a.rows(); ++k) sum += a(k, i) * a(k, j);
      const double target = (i == j) ? 1.0 : 0.0;
      best = std::max(best, std::abs(sum - target));
    }
  }
  return best;
}

DenseMatrix l2_normalize_rows(const DenseMatrix& x) {
  require_nonempty(x, "l2_normalize_rows");
  if (!x.all_finite()) {
    throw InvalidInputError("l2_normalize_rows: non-finite entries");
  }
  DenseMatrix out = x;
  for (std::size_t i = 0; i < out.rows(); ++i) {
    const double n = norm2(out.row(i));
    if (n < 1e-12) {
      throw DegenerateRowError(
          "l2_normalize_rows: row " + std::to_string(i) +
              " has norm " + std::to_string(n) + " (< 1e-12)",
          i);
    }
    const double inv = 1.0 / n;
    for (double& v : out.row(i)) v *= inv;
  }
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += a[i] * b[i];
  return sum;
}

double norm2(std::span<const double> a) {
  double sum = 0.0;
  for (double v : a) sum += v * v;
  return std::sqrt(sum);
}

}  // namespace fanlab
