// Golub-Kahan-Reinsch SVD: Householder bidiagonalization with fused
// left/right reflector application, then implicit-shift QR on the bidiagonal.
// Rotations produced by the QR phase are logged and replayed onto the factor
// matrices in row panels, which keeps the factor updates cache-resident
// instead of streaming the full factors once per rotation.

#include "fanlab/svd.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>

#include "fanlab/errors.hpp"

namespace fanlab {
namespace detail {

namespace {

std::size_t g_svd_iteration_cap = 75;

constexpr double kEps = std::numeric_limits<double>::epsilon() / 2.0;  // 2^-53
constexpr double kTiny = 0x1.0p-966;

struct Rotation {
  double cs;
  double sn;
  std::int32_t a;
  std::int32_t b;
};

// Applies rotations in order: (col_a, col_b) <- (cs*a + sn*b, -sn*a + cs*b).
// M is col-major with leading dimension `rows`. Row blocking keeps the two
// active columns hot while the rotation list streams.
void apply_rotations(std::vector<double>& m, std::size_t rows,
                     const std::vector<Rotation>& rots) {
  constexpr std::size_t kRowBlock = 512;
  for (std::size_t r0 = 0; r0 < rows; r0 += kRowBlock) {
    const std::size_t r1 = std::min(rows, r0 + kRowBlock);
    for (const Rotation& r : rots) {
      double* ca = m.data() + static_cast<std::size_t>(r.a) * rows;
      double* cb = m.data() + static_cast<std::size_t>(r.b) * rows;
      for (std::size_t i = r0; i < r1; ++i) {
        const double t = r.cs * ca[i] + r.sn * cb[i];
        cb[i] = -r.sn * ca[i] + r.cs * cb[i];
        ca[i] = t;
      }
    }
  }
}

class RotationLog {
 public:
  RotationLog(std::vector<double>* target, std::size_t rows)
      : target_(target), rows_(rows) {}

  void push(double cs, double sn, std::size_t a, std::size_t b) {
    if (target_ == nullptr) return;
    rots_.push_back({cs, sn, static_cast<std::int32_t>(a),
                     static_cast<std::int32_t>(b)});
    if (rots_.size() >= kFlushThreshold) flush();
  }

  void flush() {
    if (target_ == nullptr || rots_.empty()) return;
    apply_rotations(*target_, rows_, rots_);
    rots_.clear();
  }

 private:
  static constexpr std::size_t kFlushThreshold = 1u << 21;
  std::vector<double>* target_;
  std::size_t rows_;
  std::vector<Rotation> rots_;
};

// Householder reflector H = I - tau*v*v^T with v[0] == 1 bringing x to
// (beta, 0, ..., 0). On return x[1:] holds v[1:]; returns {beta, tau}.
struct Reflector {
  double beta;
  double tau;
};

Reflector make_reflector(double* x, std::size_t len, std::size_t stride) {
  const double alpha = x[0];
  double xnorm2 = 0.0;
  for (std::size_t i = 1; i < len; ++i) {
    const double v = x[i * stride];
    xnorm2 += v * v;
  }
  if (xnorm2 == 0.0) {
    return {alpha, 0.0};
  }
  double beta = std::sqrt(alpha * alpha + xnorm2);
  if (alpha > 0.0) beta = -beta;
  const double tau = (beta - alpha) / beta;
  const double inv = 1.0 / (alpha - beta);
  for (std::size_t i = 1; i < len; ++i) x[i * stride] *= inv;
  return {beta, tau};
}

// Bidiagonalization state for an m x n (m >= n) col-major matrix.
struct BidiagResult {
  std::vector<double> a;        // reflector vectors packed in-place, lda = m
  std::vector<double> d;        // n diagonal entries
  std::vector<double> e;        // n entries; e[0..n-2] superdiagonal, e[n-1]=0
  std::vector<double> tau_col;  // n
  std::vector<double> tau_row;  // n (tau_row[j] pairs with e[j])
};

// A = product(Hc_j) * B * product(Hr_j)^T. Column reflector j lives in
// column j below the diagonal; row reflector j lives in row j right of the
// superdiagonal. The trailing update fuses both rank-1 corrections into one
// pass over the trailing block.
BidiagResult bidiagonalize(std::vector<double> a, std::size_t m, std::size_t n) {
  BidiagResult r;
  r.a = std::move(a);
  r.d.assign(n, 0.0);
  r.e.assign(n, 0.0);
  r.tau_col.assign(n, 0.0);
  r.tau_row.assign(n, 0.0);
  std::vector<double> z(n, 0.0);   // u^T * A over trailing columns
  std::vector<double> y(m, 0.0);   // A1 * w over trailing rows
  double* A = r.a.data();

  for (std::size_t j = 0; j < n; ++j) {
    double* colj = A + j * m;
    const Reflector rc = make_reflector(colj + j, m - j, 1);
    r.d[j] = rc.beta;
    r.tau_col[j] = rc.tau;
    if (j + 1 >= n) break;

    const std::size_t nc = n - j - 1;  // trailing columns
    // z_c = u^T A[:, c] over rows j..m-1 (u = [1, colj[j+1..]]).
    for (std::size_t c = 0; c < nc; ++c) {
      const double* col = A + (j + 1 + c) * m;
      double sum = col[j];
      for (std::size_t i = j + 1; i < m; ++i) sum += colj[i] * col[i];
      z[c] = sum;
    }
    // Apply the column reflector to row j only (the trailing block below row
    // j is folded into the fused update instead of being touched twice).
    for (std::size_t c = 0; c < nc; ++c) {
      A[j + (j + 1 + c) * m] -= rc.tau * z[c];
    }
    const Reflector rr = make_reflector(A + j + (j + 1) * m, nc, m);
    r.e[j] = rr.beta;
    r.tau_row[j] = rr.tau;

    // y0_i = sum_c A_old[i, c] * w_c over the trailing block, corrected for
    // the not-yet-applied column reflector: y = y0 - tau_c * (z.w) * u.
    const double* w_base = A + j;  // w_c at A[j, j+1+c]; w_0 == 1 implicit
    for (std::size_t i = j + 1; i < m; ++i) y[i] = 0.0;
    double zw = z[0];  // w_0 == 1
    for (std::size_t c = 0; c < nc; ++c) {
      const double wc = (c == 0) ? 1.0 : w_base[(j + 1 + c) * m];
      if (c > 0) zw += z[c] * wc;
      const double* col = A + (j + 1 + c) * m;
      for (std::size_t i = j + 1; i < m; ++i) y[i] += wc * col[i];
    }
    for (std::size_t i = j + 1; i < m; ++i) {
      y[i] -= rc.tau * zw * colj[i];
    }
    // Fused rank-2 trailing update:
    // A[i,c] -= tau_c*u_i*z_c + tau_r*y_i*w_c  for i > j, c > j.
    for (std::size_t c = 0; c < nc; ++c) {
      const double wc = (c == 0) ? 1.0 : w_base[(j + 1 + c) * m];
      const double f1 = rc.tau * z[c];
      const double f2 = rr.tau * wc;
      double* col = A + (j + 1 + c) * m;
      for (std::size_t i = j + 1; i < m; ++i) {
        col[i] -= f1 * colj[i] + f2 * y[i];
      }
    }
  }
  return r;
}

// Backward accumulation of the column-reflector product into an m x n
// identity block (col-major).
std::vector<double> accumulate_u(const BidiagResult& b, std::size_t m,
                                 std::size_t n) {
  std::vector<double> u(m * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) u[j * m + j] = 1.0;
  for (std::size_t j = n; j-- > 0;) {
    const double tau = b.tau_col[j];
    if (tau == 0.0) continue;
    const double* v = b.a.data() + j * m;  // v_i for i > j; v_j == 1
    for (std::size_t c = j; c < n; ++c) {
      double* col = u.data() + c * m;
      double sum = col[j];
      for (std::size_t i = j + 1; i < m; ++i) sum += v[i] * col[i];
      const double f = tau * sum;
      col[j] -= f;
      for (std::size_t i = j + 1; i < m; ++i) col[i] -= f * v[i];
    }
  }
  return u;
}

// Backward accumulation of the row-reflector product into an n x n identity.
std::vector<double> accumulate_v(const BidiagResult& b, std::size_t m,
                                 std::size_t n) {
  std::vector<double> v(n * n, 0.0);
  for (std::size_t j = 0; j < n; ++j) v[j * n + j] = 1.0;
  if (n < 2) return v;
  for (std::size_t j = n - 1; j-- > 0;) {
    const double tau = b.tau_row[j];
    if (tau == 0.0) continue;
    // w_c at A[j, j+1+c] for c >= 1, w_0 == 1 at column j+1.
    const double* w_base = b.a.data() + j;
    for (std::size_t c = j + 1; c < n; ++c) {
      double* col = v.data() + c * n;
      double sum = col[j + 1];
      for (std::size_t i = j + 2; i < n; ++i) {
        sum += w_base[i * m] * col[i];
      }
      const double f = tau * sum;
      col[j + 1] -= f;
      for (std::size_t i = j + 2; i < n; ++i) col[i] -= f * w_base[i * m];
    }
  }
  return v;
}

// Implicit-shift QR on the bidiagonal (d, e), logging rotations into the
// factor targets. Follows the classic four-case deflation scheme.
void qr_iterate(std::vector<double>& d, std::vector<double>& e, std::size_t n,
                std::vector<double>* u, std::size_t u_rows,
                std::vector<double>* v, std::size_t v_rows, std::size_t m_orig,
                std::size_t n_orig) {
  RotationLog log_u(u, u_rows);
  RotationLog log_v(v, v_rows);
  std::size_t p = n;
  std::size_t iter = 0;

  while (p > 0) {
    std::ptrdiff_t k;
    int kase;
    for (k = static_cast<std::ptrdiff_t>(p) - 2; k >= -1; --k) {
      if (k == -1) break;
      if (std::abs(e[k]) <= kTiny + kEps * (std::abs(d[k]) + std::abs(d[k + 1]))) {
        e[k] = 0.0;
        break;
      }
    }
    if (k == static_cast<std::ptrdiff_t>(p) - 2) {
      kase = 4;
    } else {
      std::ptrdiff_t ks;
      for (ks = static_cast<std::ptrdiff_t>(p) - 1; ks >= k; --ks) {
        if (ks == k) break;
        const double t =
            (ks != static_cast<std::ptrdiff_t>(p) - 1 ? std::abs(e[ks]) : 0.0) +
            (ks != k + 1 ? std::abs(e[ks - 1]) : 0.0);
        if (std::abs(d[ks]) <= kTiny + kEps * t) {
          d[ks] = 0.0;
          break;
        }
      }
      if (ks == k) {
        kase = 3;
      } else if (ks == static_cast<std::ptrdiff_t>(p) - 1) {
        kase = 1;
      } else {
        kase = 2;
        k = ks;
      }
    }
    ++k;

    switch (kase) {
      case 1: {  // d[p-1] == 0: rotate e[p-2] away into V columns.
        double f = e[p - 2];
        e[p - 2] = 0.0;
        for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(p) - 2; j >= k; --j) {
          const double t = std::hypot(d[j], f);
          const double cs = d[j] / t;
          const double sn = f / t;
          d[j] = t;
          if (j != k) {
            f = -sn * e[j - 1];
            e[j - 1] = cs * e[j - 1];
          }
          log_v.push(cs, sn, static_cast<std::size_t>(j), p - 1);
        }
        break;
      }
      case 2: {  // d[k-1] == 0: rotate e[k-1] away into U columns.
        double f = e[k - 1];
        e[k - 1] = 0.0;
        for (std::size_t j = static_cast<std::size_t>(k); j < p; ++j) {
          const double t = std::hypot(d[j], f);
          const double cs = d[j] / t;
          const double sn = f / t;
          d[j] = t;
          f = -sn * e[j];
          e[j] = cs * e[j];
          log_u.push(cs, sn, j, static_cast<std::size_t>(k) - 1);
        }
        break;
      }
      case 3: {  // One implicit-shift QR step on rows [k, p-1].
        const double scale = std::max(
            {std::abs(d[p - 1]), std::abs(d[p - 2]), std::abs(e[p - 2]),
             std::abs(d[k]), std::abs(e[k])});
        const double sp = d[p - 1] / scale;
        const double spm1 = d[p - 2] / scale;
        const double epm1 = e[p - 2] / scale;
        const double sk = d[k] / scale;
        const double ek = e[k] / scale;
        const double b = ((spm1 + sp) * (spm1 - sp) + epm1 * epm1) / 2.0;
        const double c = (sp * epm1) * (sp * epm1);
        double shift = 0.0;
        if (b != 0.0 || c != 0.0) {
          shift = std::sqrt(b * b + c);
          if (b < 0.0) shift = -shift;
          shift = c / (b + shift);
        }
        double f = (sk + sp) * (sk - sp) + shift;
        double g = sk * ek;
        for (std::size_t j = static_cast<std::size_t>(k); j < p - 1; ++j) {
          double t = std::hypot(f, g);
          double cs = f / t;
          double sn = g / t;
          if (j != static_cast<std::size_t>(k)) e[j - 1] = t;
          f = cs * d[j] + sn * e[j];
          e[j] = cs * e[j] - sn * d[j];
          g = sn * d[j + 1];
          d[j + 1] = cs * d[j + 1];
          log_v.push(cs, sn, j, j + 1);
          t = std::hypot(f, g);
          cs = f / t;
          sn = g / t;
          d[j] = t;
          f = cs * e[j] + sn * d[j + 1];
          d[j + 1] = -sn * e[j] + cs * d[j + 1];
          g = sn * e[j + 1];
          e[j + 1] = cs * e[j + 1];
          log_u.push(cs, sn, j, j + 1);
        }
        e[p - 2] = f;
        ++iter;
        if (iter > g_svd_iteration_cap) {
          throw NumericalFailureError(
              "SVD QR iteration failed to converge for " +
              std::to_string(m_orig) + "x" + std::to_string(n_orig) +
              " matrix (cap " + std::to_string(g_svd_iteration_cap) +
              " steps per singular value)");
        }
        break;
      }
      case 4: {  // d[p-1] converged.
        if (d[p - 1] < 0.0) {
          // s*v == (-s)*(-v): flipping the V column alone keeps u*s*v^T
          // exact. With a == b the logged "rotation" (cs=-1, sn=0) reduces
          // to negating that single column.
          d[p - 1] = -d[p - 1];
          log_v.push(-1.0, 0.0, p - 1, p - 1);
        }
        iter = 0;
        --p;
        break;
      }
    }
  }
  log_u.flush();
  log_v.flush();
}

}  // namespace

std::size_t svd_iteration_cap() noexcept { return g_svd_iteration_cap; }
void set_svd_iteration_cap(std::size_t cap) noexcept {
  g_svd_iteration_cap = cap == 0 ? 1 : cap;
}

SvdFactors svd_decompose(const DenseMatrix& x, const SvdControls& controls) {
  if (x.rows() == 0 || x.cols() == 0) {
    throw InvalidInputError("thin_svd: empty matrix");
  }
  if (!x.all_finite()) {
    throw InvalidInputError("thin_svd: non-finite entries");
  }
  if (!(controls.truncation_tol >= 0.0) || controls.truncation_tol >= 1.0) {
    throw InvalidParameterError("thin_svd: truncation_tol must be in [0, 1)");
  }

  const bool transposed = x.rows() < x.cols();
  const std::size_t m = transposed ? x.cols() : x.rows();
  const std::size_t n = transposed ? x.rows() : x.cols();

  // Col-major working copy of x (or x^T); conditional scaling keeps the QR
  // thresholds well-placed for extreme magnitudes.
  std::vector<double> a(m * n);
  if (transposed) {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        a[i * m + j] = x(i, j);  // a is (cols x rows) col-major
      }
    }
  } else {
    for (std::size_t i = 0; i < x.rows(); ++i) {
      for (std::size_t j = 0; j < x.cols(); ++j) {
        a[j * m + i] = x(i, j);
      }
    }
  }

  double norm_scale = 1.0;
  {
    double amax = 0.0;
    for (double vv : a) amax = std::max(amax, std::abs(vv));
    if (amax == 0.0) {
      // Zero matrix: rank 0, empty factors.
      SvdFactors out;
      out.u = DenseMatrix(x.rows(), 0);
      out.v = DenseMatrix(x.cols(), 0);
      out.truncation_tol = controls.truncation_tol;
      return out;
    }
    if (amax > 0x1.0p+500 || amax < 0x1.0p-500) {
      norm_scale = amax;
      const double inv = 1.0 / amax;
      for (double& vv : a) vv *= inv;
    }
  }

  BidiagResult bd = bidiagonalize(std::move(a), m, n);

  const bool want_left = transposed ? controls.want_v : controls.want_u;
  const bool want_right = transposed ? controls.want_u : controls.want_v;

  std::vector<double> u_cm, v_cm;
  if (want_left) u_cm = accumulate_u(bd, m, n);
  if (want_right) v_cm = accumulate_v(bd, m, n);

  qr_iterate(bd.d, bd.e, n, want_left ? &u_cm : nullptr, m,
             want_right ? &v_cm : nullptr, n, x.rows(), x.cols());

  // Stable descending order.
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    return bd.d[i] > bd.d[j];
  });

  const double smax = bd.d[order[0]];
  std::size_t r = 0;
  while (r < n && bd.d[order[r]] > controls.truncation_tol * smax) ++r;

  SvdFactors out;
  out.truncation_tol = controls.truncation_tol;
  out.s.resize(r);
  for (std::size_t i = 0; i < r; ++i) out.s[i] = bd.d[order[i]] * norm_scale;

  // Internal left factor -> rows m; right factor -> rows n. After the
  // transpose swap, `u` pairs with x.rows() and `v` with x.cols().
  DenseMatrix left(want_left ? m : 0, want_left ? r : 0);
  DenseMatrix right(want_right ? n : 0, want_right ? r : 0);
  if (want_left) {
    for (std::size_t c = 0; c < r; ++c) {
      const double* col = u_cm.data() + order[c] * m;
      for (std::size_t i = 0; i < m; ++i) left(i, c) = col[i];
    }
  }
  if (want_right) {
    for (std::size_t c = 0; c < r; ++c) {
      const double* col = v_cm.data() + order[c] * n;
      for (std::size_t i = 0; i < n; ++i) right(i, c) = col[i];
    }
  }

  if (transposed) {
    out.u = std::move(right);
    out.v = std::move(left);
  } else {
    out.u = std::move(left);
    out.v = std::move(right);
  }

  // Deterministic sign convention on v (and u in tandem).
  if (out.v.rows() > 0) {
    for (std::size_t c = 0; c < r; ++c) {
      std::size_t arg = 0;
      double best = -1.0;
      for (std::size_t i = 0; i < out.v.rows(); ++i) {
        const double av = std::abs(out.v(i, c));
        if (av > best) {
          best = av;
          arg = i;
        }
      }
      if (out.v(arg, c) < 0.0) {
        for (std::size_t i = 0; i < out.v.rows(); ++i) out.v(i, c) = -out.v(i, c);
        if (out.u.rows() > 0) {
          for (std::size_t i = 0; i < out.u.rows(); ++i) out.u(i, c) = -out.u(i, c);
        }
      }
    }
  }
  return out;
}

}  // namespace detail

SvdFactors thin_svd(const DenseMatrix& x, double truncation_tol) {
  detail::SvdControls controls;
  controls.truncation_tol = truncation_tol;
  return detail::svd_decompose(x, controls);
}

std::vector<double> singular_values(const DenseMatrix& x) {
  detail::SvdControls controls;
  controls.want_u = false;
  controls.want_v = false;
  controls.truncation_tol = 0.0;
  SvdFactors f = detail::svd_decompose(x, controls);
  // Re-append truncated zeros so callers always see min(m, n) values.
  std::vector<double> s = std::move(f.s);
  s.resize(std::min(x.rows(), x.cols()), 0.0);
  return s;
}

}  // namespace fanlab
