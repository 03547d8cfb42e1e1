#include "fanlab/synth.hpp"

#include <cmath>
#include <string>

#include "fanlab/errors.hpp"

namespace fanlab {

namespace {

// Sub-stream children for the dataset generator, so adding a consumer never
// shifts the draws of an existing one.
enum : std::uint64_t {
  kChildLatents = 1,
  kChildMapA = 2,
  kChildMapB = 3,
  kChildNoiseX = 4,
  kChildNoiseY = 5,
  kChildEvalLatents = 6,
  kChildEvalNoiseQ = 7,
  kChildEvalNoiseP = 8,
  kChildDistractorLatents = 9,
  kChildDistractorNoise = 10,
};

std::size_t effective_rank(const SpectrumSpec& spec) {
  const std::size_t cap = std::min(spec.m, spec.n);
  if (spec.decay == SpectrumDecay::explicit_values) {
    if (spec.rank != 0 && spec.rank != spec.values.size()) {
      throw InvalidParameterError(
          "spectrum spec: rank does not match explicit value count");
    }
    if (spec.values.empty()) {
      throw InvalidInputError("spectrum spec: no explicit values given");
    }
    if (spec.values.size() > cap) {
      throw InvalidParameterError(
          "spectrum spec: " + std::to_string(spec.values.size()) +
          " values exceed min(m, n) = " + std::to_string(cap));
    }
    return spec.values.size();
  }
  const std::size_t r = spec.rank == 0 ? cap : spec.rank;
  if (r < 1 || r > cap) {
    throw InvalidParameterError("spectrum spec: rank " + std::to_string(r) +
                                " outside [1, min(m, n) = " +
                                std::to_string(cap) + "]");
  }
  return r;
}

// Unit-norm Gaussian rows.
DenseMatrix unit_latents(std::size_t count, std::size_t dim, RngStream rng) {
  return l2_normalize_rows(gaussian_matrix(count, dim, 1.0, rng));
}

// rows x latent features: latents * map^T (+ optional Gaussian view noise).
DenseMatrix apply_view(const DenseMatrix& latents, const DenseMatrix& map,
                       double view_noise, RngStream noise_rng) {
  DenseMatrix out = multiply_a_bt(latents, map);
  if (view_noise > 0.0) {
    add_scaled(out, 1.0,
               gaussian_matrix(out.rows(), out.cols(), view_noise, noise_rng));
  }
  return out;
}

}  // namespace

std::vector<double> requested_spectrum(const SpectrumSpec& spec) {
  if (spec.m < 1 || spec.n < 1) {
    throw InvalidParameterError("spectrum spec: m and n must be >= 1");
  }
  const std::size_t r = effective_rank(spec);
  std::vector<double> s(r);
  switch (spec.decay) {
    case SpectrumDecay::power_law: {
      if (spec.exponent < 0.0) {
        throw InvalidParameterError(
            "spectrum spec: power-law exponent must be >= 0");
      }
      for (std::size_t i = 0; i < r; ++i) {
        s[i] = std::pow(static_cast<double>(i + 1), -spec.exponent);
      }
      break;
    }
    case SpectrumDecay::log_linear: {
      if (!(spec.sigma_min > 0.0) || !(spec.sigma_max >= spec.sigma_min)) {
        throw InvalidParameterError(
            "spectrum spec: need sigma_max >= sigma_min > 0");
      }
      if (r == 1) {
        s[0] = spec.sigma_max;
        break;
      }
      const double log_hi = std::log(spec.sigma_max);
      const double log_lo = std::log(spec.sigma_min);
      for (std::size_t i = 0; i < r; ++i) {
        const double t =
            static_cast<double>(i) / static_cast<double>(r - 1);
        s[i] = std::exp(log_hi + t * (log_lo - log_hi));
      }
      break;
    }
    case SpectrumDecay::explicit_values: {
      s = spec.values;
      break;
    }
  }
  for (std::size_t i = 0; i < r; ++i) {
    if (!(s[i] > 0.0)) {
      throw InvalidInputError("spectrum spec: sigma[" + std::to_string(i) +
                              "] is not positive");
    }
    if (i > 0 && s[i] > s[i - 1]) {
      throw InvalidInputError("spectrum spec: values not descending at index " +
                              std::to_string(i));
    }
  }
  return s;
}

DenseMatrix haar_orthonormal(std::size_t rows, std::size_t cols,
                             RngStream rng) {
  if (cols < 1 || rows < cols) {
    throw InvalidParameterError("haar_orthonormal: need rows >= cols >= 1");
  }
  DenseMatrix g = gaussian_matrix(rows, cols, 1.0, rng);
  // Modified Gram-Schmidt on columns, with one re-orthogonalization pass.
  // The pivot norm is positive by construction, which is exactly the
  // positive-diagonal-of-R convention.
  for (std::size_t j = 0; j < cols; ++j) {
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t i = 0; i < j; ++i) {
        double proj = 0.0;
        for (std::size_t rr = 0; rr < rows; ++rr) proj += g(rr, i) * g(rr, j);
        for (std::size_t rr = 0; rr < rows; ++rr) g(rr, j) -= proj * g(rr, i);
      }
    }
    double norm = 0.0;
    for (std::size_t rr = 0; rr < rows; ++rr) norm += g(rr, j) * g(rr, j);
    norm = std::sqrt(norm);
    if (norm < 1e-200) {
      throw NumericalFailureError(
          "haar_orthonormal: degenerate Gaussian column (norm ~ 0)");
    }
    const double inv = 1.0 / norm;
    for (std::size_t rr = 0; rr < rows; ++rr) g(rr, j) *= inv;
  }
  return g;
}

DenseMatrix make_spectrum_matrix(const SpectrumSpec& spec) {
  const std::vector<double> s = requested_spectrum(spec);
  const std::size_t r = s.size();
  DenseMatrix u = haar_orthonormal(spec.m, r, spec.rng.substream(1));
  DenseMatrix v = haar_orthonormal(spec.n, r, spec.rng.substream(2));
  for (std::size_t i = 0; i < spec.m; ++i) {
    for (std::size_t j = 0; j < r; ++j) u(i, j) *= s[j];
  }
  return multiply_a_bt(u, v);
}

PairedDataset make_paired_dataset(const PairedDatasetSpec& spec) {
  if (spec.num_pairs < 2) {
    throw InvalidParameterError("paired dataset: num_pairs must be >= 2");
  }
  if (spec.latent_dim < 1 || spec.latent_dim > spec.feature_dim) {
    throw InvalidParameterError(
        "paired dataset: need 1 <= latent_dim <= feature_dim");
  }
  if (spec.view_noise < 0.0) {
    throw InvalidParameterError("paired dataset: view_noise must be >= 0");
  }

  PairedDataset data;
  if (spec.identity_views) {
    data.map_a = DenseMatrix(spec.feature_dim, spec.latent_dim);
    for (std::size_t i = 0; i < spec.latent_dim; ++i) data.map_a(i, i) = 1.0;
    data.map_b = data.map_a;
  } else {
    const double sigma =
        1.0 / std::sqrt(static_cast<double>(spec.latent_dim));
    data.map_a = gaussian_matrix(spec.feature_dim, spec.latent_dim, sigma,
                                 spec.rng.substream(kChildMapA));
    data.map_b = gaussian_matrix(spec.feature_dim, spec.latent_dim, sigma,
                                 spec.rng.substream(kChildMapB));
  }

  DenseMatrix latents = unit_latents(spec.num_pairs, spec.latent_dim,
                                     spec.rng.substream(kChildLatents));
  data.train_x = apply_view(latents, data.map_a, spec.view_noise,
                            spec.rng.substream(kChildNoiseX));
  data.train_y = apply_view(latents, data.map_b, spec.view_noise,
                            spec.rng.substream(kChildNoiseY));

  if (spec.num_eval_queries > 0) {
    DenseMatrix eval_latents =
        unit_latents(spec.num_eval_queries, spec.latent_dim,
                     spec.rng.substream(kChildEvalLatents));
    DenseMatrix queries =
        apply_view(eval_latents, data.map_a, spec.view_noise,
                   spec.rng.substream(kChildEvalNoiseQ));
    DenseMatrix positives =
        apply_view(eval_latents, data.map_b, spec.view_noise,
                   spec.rng.substream(kChildEvalNoiseP));
    data.eval.resize(spec.num_eval_queries);
    for (std::size_t i = 0; i < spec.num_eval_queries; ++i) {
      EvalItem& item = data.eval[i];
      item.query.assign(queries.row(i).begin(), queries.row(i).end());
      item.positive.assign(positives.row(i).begin(), positives.row(i).end());
      if (spec.num_distractors_eval > 0) {
        DenseMatrix dlat = unit_latents(
            spec.num_distractors_eval, spec.latent_dim,
            spec.rng.substream(kChildDistractorLatents).substream(i));
        item.distractors = apply_view(
            dlat, data.map_b, spec.view_noise,
            spec.rng.substream(kChildDistractorNoise).substream(i));
      }
    }
  }
  return data;
}

}  // namespace fanlab
