#include "fanlab/fanoise.hpp"

#include <cmath>

#include "fanlab/errors.hpp"
#include "fanlab/svd.hpp"

namespace fanlab {

std::string to_string(ScalingMode mode) {
  switch (mode) {
    case ScalingMode::none: return "none";
    case ScalingMode::uniform: return "uniform";
    case ScalingMode::linear: return "linear";
    case ScalingMode::sublinear: return "sublinear";
  }
  throw InvalidParameterError("unknown scaling mode value");
}

std::string to_string(NoiseSideTarget side) {
  switch (side) {
    case NoiseSideTarget::query: return "query";
    case NoiseSideTarget::key: return "key";
    case NoiseSideTarget::both: return "both";
  }
  throw InvalidParameterError("unknown noise side value");
}

std::string to_string(NoisePosition position) {
  switch (position) {
    case NoisePosition::input_layer: return "input_layer";
    case NoisePosition::output_layer: return "output_layer";
  }
  throw InvalidParameterError("unknown noise position value");
}

ScalingMode parse_scaling_mode(const std::string& name) {
  if (name == "none") return ScalingMode::none;
  if (name == "uniform") return ScalingMode::uniform;
  if (name == "linear") return ScalingMode::linear;
  if (name == "sublinear") return ScalingMode::sublinear;
  throw InvalidParameterError("unknown scaling mode '" + name +
                              "' (expected none|uniform|linear|sublinear)");
}

NoiseSideTarget parse_noise_side(const std::string& name) {
  if (name == "query") return NoiseSideTarget::query;
  if (name == "key") return NoiseSideTarget::key;
  if (name == "both") return NoiseSideTarget::both;
  throw InvalidParameterError("unknown noise side '" + name +
                              "' (expected query|key|both)");
}

NoisePosition parse_noise_position(const std::string& name) {
  if (name == "input_layer") return NoisePosition::input_layer;
  if (name == "output_layer") return NoisePosition::output_layer;
  throw InvalidParameterError("unknown noise position '" + name +
                              "' (expected input_layer|output_layer)");
}

std::vector<double> scaling_vector(const std::vector<double>& s,
                                   ScalingMode mode) {
  if (s.empty()) {
    throw DegenerateSpectrumError("scaling_vector: empty spectrum");
  }
  if (mode == ScalingMode::none) {
    throw InvalidParameterError(
        "scaling_vector: mode 'none' performs no injection and has no "
        "scaling vector");
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (!(s[i] > 0.0)) {
      throw InvalidInputError("scaling_vector: s[" + std::to_string(i) +
                              "] = " + std::to_string(s[i]) +
                              " is not positive");
    }
  }
  const double r = static_cast<double>(s.size());
  std::vector<double> out(s.size());
  switch (mode) {
    case ScalingMode::uniform: {
      for (double& v : out) v = 1.0;
      break;
    }
    case ScalingMode::linear: {
      double mean = 0.0;
      for (double v : s) mean += v;
      mean /= r;
      for (std::size_t i = 0; i < s.size(); ++i) out[i] = s[i] / mean;
      break;
    }
    case ScalingMode::sublinear: {
      double mean = 0.0;
      for (double v : s) mean += std::sqrt(v);
      mean /= r;
      for (std::size_t i = 0; i < s.size(); ++i) {
        out[i] = std::sqrt(s[i]) / mean;
      }
      break;
    }
    case ScalingMode::none: break;  // rejected above
  }
  return out;
}

InjectionResult fanoise_inject(const DenseMatrix& e, const NoiseConfig& cfg) {
  if (e.rows() == 0 || e.cols() == 0) {
    throw InvalidInputError("fanoise_inject: empty batch");
  }
  if (!e.all_finite()) {
    throw InvalidInputError("fanoise_inject: non-finite entries");
  }
  if (cfg.alpha < 0.0) {
    throw InvalidParameterError("fanoise_inject: alpha must be >= 0");
  }

  InjectionResult result;
  if (cfg.alpha == 0.0 || cfg.scaling == ScalingMode::none) {
    result.e_out = e;
    return result;
  }

  SvdFactors svd = thin_svd(e, cfg.svd_tol);
  const std::size_t r = svd.rank();
  if (r == 0) {
    result.e_out = e;
    result.trace.zero_rank_warning = true;
    return result;
  }

  const std::size_t b = e.rows();
  const std::size_t d = e.cols();
  result.trace.rank_used = r;
  result.trace.scaling_vector = scaling_vector(svd.s, cfg.scaling);

  DenseMatrix n_scaled = gaussian_matrix(b, r, 1.0, cfg.rng);
  const double amp = cfg.alpha / std::sqrt(static_cast<double>(d));
  result.trace.per_direction_energy.assign(r, 0.0);
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < r; ++j) {
      const double v = n_scaled(i, j) * result.trace.scaling_vector[j] * amp;
      n_scaled(i, j) = v;
      result.trace.per_direction_energy[j] += v * v;
    }
  }
  // perturbation = N_scaled V^T lands in span of V's columns (the row space
  // of e); per_direction_energy sums to noise_energy up to V's orthonormality
  // defect because V^T has orthonormal rows.
  DenseMatrix perturbation = multiply_a_bt(n_scaled, svd.v);
  const double fro = frobenius_norm(perturbation);
  result.trace.noise_energy = fro * fro;
  result.e_out = e;
  add_scaled(result.e_out, 1.0, perturbation);
  return result;
}

namespace {

// Shared kernel behind both baselines: e + sigma * N, N ~ standard Gaussian.
DenseMatrix add_isotropic_noise(const DenseMatrix& e, double sigma,
                                RngStream rng) {
  if (e.rows() == 0 || e.cols() == 0) {
    throw InvalidInputError("noise injection: empty batch");
  }
  if (sigma < 0.0) {
    throw InvalidParameterError("noise injection: alpha must be >= 0");
  }
  if (sigma == 0.0) return e;
  DenseMatrix out = e;
  add_scaled(out, 1.0, gaussian_matrix(e.rows(), e.cols(), sigma, rng));
  return out;
}

}  // namespace

DenseMatrix naive_inject(const DenseMatrix& e, double alpha, RngStream rng) {
  return add_isotropic_noise(e, alpha, rng);
}

DenseMatrix normalized_inject(const DenseMatrix& e, double alpha,
                              RngStream rng) {
  if (e.cols() == 0) {
    throw InvalidInputError("noise injection: empty batch");
  }
  return add_isotropic_noise(
      e, alpha / std::sqrt(static_cast<double>(e.cols())), rng);
}

}  // namespace fanlab
