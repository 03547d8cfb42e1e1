#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace fanlab {

// Dense row-major matrix of doubles. All public operations in the library
// require finite entries; validation happens at the operation boundaries.
//
// Zero-dimensional shapes (0xN / Nx0) are representable so that rank-0 SVD
// factors of the zero matrix have a home, but arithmetic and I/O operations
// reject empty matrices.
class DenseMatrix {
 public:
  DenseMatrix() = default;

  // Zero-initialized rows x cols matrix.
  DenseMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  // Takes ownership of row-major data; data.size() must equal rows*cols.
  DenseMatrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  // Construction from row literals, e.g. DenseMatrix::from_rows({{1,0},{0,1}}).
  static DenseMatrix from_rows(
      std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) {
    return data_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return data_[i * cols_ + j];
  }

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }

  std::span<double> row(std::size_t i) { return {data() + i * cols_, cols_}; }
  std::span<const double> row(std::size_t i) const {
    return {data() + i * cols_, cols_};
  }

  bool all_finite() const noexcept;

  bool operator==(const DenseMatrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// --- arithmetic helpers -----------------------------------------------------
// All of these validate shapes and reject empty operands.

DenseMatrix transpose(const DenseMatrix& a);
DenseMatrix multiply(const DenseMatrix& a, const DenseMatrix& b);     // A*B
DenseMatrix multiply_at_b(const DenseMatrix& a, const DenseMatrix& b);  // A^T*B
DenseMatrix multiply_a_bt(const DenseMatrix& a, const DenseMatrix& b);  // A*B^T

// a += scale*b in place (shapes must match).
void add_scaled(DenseMatrix& a, double scale, const DenseMatrix& b);

// Scales every entry in place.
void scale_in_place(DenseMatrix& a, double scale);

double frobenius_norm(const DenseMatrix& a);
double max_abs(const DenseMatrix& a);
double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b);

// Largest max-norm deviation of a^T*a (or given product) from identity;
// convenience for orthonormality checks on matrices with orthonormal columns.
double max_orthonormality_defect(const DenseMatrix& a);

// Returns a copy with every row scaled to unit Euclidean norm. Rows with norm
// below 1e-12 raise DegenerateRowError carrying the row index.
DenseMatrix l2_normalize_rows(const DenseMatrix& x);

// --- small vector helpers ----------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);

}  // namespace fanlab
