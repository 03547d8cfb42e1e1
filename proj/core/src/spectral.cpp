#include "fanlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

#include "fanlab/errors.hpp"
#include "fanlab/matrix_io.hpp"
#include "fanlab/svd.hpp"

namespace fanlab {

namespace {

void require_same_shape(const DenseMatrix& a, const DenseMatrix& b,
                        const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw InvalidInputError(std::string(what) + ": shape mismatch " +
                            std::to_string(a.rows()) + "x" +
                            std::to_string(a.cols()) + " vs " +
                            std::to_string(b.rows()) + "x" +
                            std::to_string(b.cols()));
  }
}

void require_shape_params(std::size_t m, std::size_t n, double alpha) {
  if (m < 1 || n < 1) {
    throw InvalidParameterError("m and n must be >= 1");
  }
  if (alpha < 0.0) {
    throw InvalidParameterError("alpha must be >= 0");
  }
}

// Marks indices belonging to clusters of near-equal singular values, where
// individual vector overlaps are gauge-dependent.
std::vector<bool> degenerate_flags(const std::vector<double>& s,
                                   std::size_t count) {
  std::vector<bool> flags(count, false);
  if (s.empty()) return flags;
  const double gap_tol = 1e-8 * s[0];
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    if (s[i] - s[i + 1] < gap_tol) {
      if (i < count) flags[i] = true;
      if (i + 1 < count) flags[i + 1] = true;
    }
  }
  return flags;
}

}  // namespace

std::pair<double, double> mp_edges(std::size_t m, std::size_t n,
                                   double alpha) {
  require_shape_params(m, n, alpha);
  const double root =
      std::sqrt(static_cast<double>(m) / static_cast<double>(n));
  return {alpha * std::abs(1.0 - root), alpha * (1.0 + root)};
}

double tau_star(std::size_t m, std::size_t n, double alpha) {
  require_shape_params(m, n, alpha);
  return alpha * std::sqrt(static_cast<double>(m) / static_cast<double>(n));
}

WeylCheck weyl_check(const DenseMatrix& f, const DenseMatrix& noise) {
  require_same_shape(f, noise, "weyl_check");
  DenseMatrix noisy = f;
  add_scaled(noisy, 1.0, noise);
  const std::vector<double> s_f = singular_values(f);
  const std::vector<double> s_noise = singular_values(noise);
  const std::vector<double> s_noisy = singular_values(noisy);

  WeylCheck out;
  out.bound = s_noise.empty() ? 0.0 : s_noise[0];
  constexpr double kSlack = 1e-9;
  for (std::size_t i = 0; i < std::min(s_f.size(), s_noisy.size()); ++i) {
    const double gap = std::abs(s_noisy[i] - s_f[i]);
    out.max_gap = std::max(out.max_gap, gap);
    if (gap > out.bound + kSlack) ++out.violations;
  }
  return out;
}

std::vector<double> singular_overlap(const DenseMatrix& f,
                                     const DenseMatrix& f_noisy,
                                     double svd_tol) {
  require_same_shape(f, f_noisy, "singular_overlap");
  detail::SvdControls controls;
  controls.want_u = false;
  controls.want_v = true;
  controls.truncation_tol = svd_tol;
  const SvdFactors a = detail::svd_decompose(f, controls);
  const SvdFactors b = detail::svd_decompose(f_noisy, controls);
  const std::size_t r = std::min(a.rank(), b.rank());
  std::vector<double> overlaps(r);
  for (std::size_t i = 0; i < r; ++i) {
    double ip = 0.0;
    for (std::size_t row = 0; row < a.v.rows(); ++row) {
      ip += a.v(row, i) * b.v(row, i);
    }
    overlaps[i] = std::min(1.0, std::abs(ip));
  }
  return overlaps;
}

double spiked_covariance_check(const DenseMatrix& f, double alpha,
                               std::size_t repetitions, RngStream rng) {
  if (repetitions < 100) {
    throw InvalidParameterError(
        "spiked_covariance_check: repetitions must be >= 100");
  }
  if (alpha < 0.0) {
    throw InvalidParameterError("alpha must be >= 0");
  }
  const std::size_t m = f.rows();
  const std::size_t n = f.cols();
  const double sigma = alpha / std::sqrt(static_cast<double>(n));

  // Accumulate the upper triangle of sum over reps of X~^T X~ (symmetric).
  std::vector<double> acc(n * n, 0.0);
  DenseMatrix x = f;
  for (std::size_t rep = 0; rep < repetitions; ++rep) {
    x = f;
    if (sigma > 0.0) {
      add_scaled(x, 1.0, gaussian_matrix(m, n, sigma, rng.substream(rep)));
    }
    for (std::size_t k = 0; k < m; ++k) {
      const auto row = x.row(k);
      for (std::size_t i = 0; i < n; ++i) {
        const double xi = row[i];
        if (xi == 0.0) continue;
        double* acc_row = acc.data() + i * n;
        for (std::size_t j = i; j < n; ++j) {
          acc_row[j] += xi * row[j];
        }
      }
    }
  }

  // Predicted second moment: f^T f + (m/n) alpha^2 I.
  DenseMatrix target = multiply_at_b(f, f);
  const double diag =
      static_cast<double>(m) / static_cast<double>(n) * alpha * alpha;
  for (std::size_t i = 0; i < n; ++i) target(i, i) += diag;

  const double inv_reps = 1.0 / static_cast<double>(repetitions);
  double max_dev = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double dev = std::abs(acc[i * n + j] * inv_reps - target(i, j));
      max_dev = std::max(max_dev, dev);
    }
  }
  return max_dev;
}

SpectralReport run_spectrum_experiment(const DenseMatrix& f, double alpha,
                                       RngStream rng) {
  if (f.rows() == 0 || f.cols() == 0) {
    throw InvalidInputError("run_spectrum_experiment: empty matrix");
  }
  if (alpha < 0.0) {
    throw InvalidParameterError("alpha must be >= 0");
  }
  const std::size_t m = f.rows();
  const std::size_t n = f.cols();

  SpectralReport report;
  report.m = m;
  report.n = n;
  report.alpha = alpha;
  report.seed = rng.seed;
  std::tie(report.mp_lower, report.mp_upper) = mp_edges(m, n, alpha);
  report.tau_star = tau_star(m, n, alpha);

  const double sigma = alpha / std::sqrt(static_cast<double>(n));
  const DenseMatrix noise = gaussian_matrix(m, n, sigma, rng);
  DenseMatrix noisy = f;
  add_scaled(noisy, 1.0, noise);

  report.sigma_base = singular_values(f);
  report.sigma_noise = singular_values(noise);
  report.sigma_noisy = singular_values(noisy);
  report.overlaps = singular_overlap(f, noisy);
  report.overlap_degenerate =
      degenerate_flags(report.sigma_base, report.overlaps.size());

  const double bound = report.sigma_noise.empty() ? 0.0 : report.sigma_noise[0];
  constexpr double kSlack = 1e-9;
  report.weyl_bound = bound;
  for (std::size_t i = 0;
       i < std::min(report.sigma_base.size(), report.sigma_noisy.size());
       ++i) {
    const double gap = std::abs(report.sigma_noisy[i] - report.sigma_base[i]);
    report.weyl_max_gap = std::max(report.weyl_max_gap, gap);
    if (gap > bound + kSlack) ++report.weyl_violations;
  }
  return report;
}

std::size_t collapse_index(const SpectralReport& report, double threshold) {
  for (std::size_t i = 0; i < report.overlaps.size(); ++i) {
    if (i < report.overlap_degenerate.size() && report.overlap_degenerate[i]) {
      continue;
    }
    if (report.overlaps[i] < threshold) return i;
  }
  return report.overlaps.size();
}

void write_spectrum_csv(const std::string& path,
                        const SpectralReport& report) {
  std::string text = "index,sigma_base,sigma_noise,sigma_noisy,overlap_abs\n";
  const std::size_t rows =
      std::max({report.sigma_base.size(), report.sigma_noise.size(),
                report.sigma_noisy.size(), report.overlaps.size()});
  for (std::size_t i = 0; i < rows; ++i) {
    text += std::to_string(i);
    text += ',';
    if (i < report.sigma_base.size()) {
      text += format_double(report.sigma_base[i]);
    }
    text += ',';
    if (i < report.sigma_noise.size()) {
      text += format_double(report.sigma_noise[i]);
    }
    text += ',';
    if (i < report.sigma_noisy.size()) {
      text += format_double(report.sigma_noisy[i]);
    }
    text += ',';
    if (i < report.overlaps.size()) {
      text += format_double(report.overlaps[i]);
    }
    text += '\n';
  }
  write_text_file(path, text);
}

void write_spectrum_meta(const std::string& path,
                         const SpectralReport& report) {
  write_key_value_file(
      path,
      {
          {"m", std::to_string(report.m)},
          {"n", std::to_string(report.n)},
          {"alpha", format_double(report.alpha)},
          {"mp_lower", format_double(report.mp_lower)},
          {"mp_upper", format_double(report.mp_upper)},
          {"tau_star", format_double(report.tau_star)},
          {"weyl_violations", std::to_string(report.weyl_violations)},
          {"seed", std::to_string(report.seed)},
      },
      "spectrum experiment metadata");
}

}  // namespace fanlab
