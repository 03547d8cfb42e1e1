#include <cstdio>
#include <filesystem>
#include <string>
#include <system_error>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "keyed_config.hpp"
#include "svg_plot.hpp"

#include "fanlab/dense_matrix.hpp"
#include "fanlab/errors.hpp"
#include "fanlab/fanoise.hpp"
#include "fanlab/gradcheck.hpp"
#include "fanlab/matrix_io.hpp"
#include "fanlab/rng.hpp"
#include "fanlab/spectral.hpp"
#include "fanlab/svd.hpp"
#include "fanlab/synth.hpp"
#include "fanlab/trainer.hpp"

namespace fs = std::filesystem;

namespace fanlab::cli {
namespace {

// Exit codes: 0 success, 2 parse/config error, 3 numerical failure,
// 4 verification failure, 5 training divergence, 1 anything else.
constexpr int kExitParse = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitVerification = 4;
constexpr int kExitDivergence = 5;

struct CommonFlags {
  std::string config_file;
  std::string out_dir = ".";
};

void add_common_flags(CLI::App* cmd, CommonFlags& c) {
  cmd->add_option("--config", c.config_file,
                  "key=value config file (one per line, '#' comments); "
                  "flags override file values");
  cmd->add_option("--out-dir", c.out_dir,
                  "directory for all outputs (created if missing)")
      ->capture_default_str();
}

fs::path prepare_out_dir(const std::string& dir) {
  fs::path p = dir.empty() ? fs::path(".") : fs::path(dir);
  std::error_code ec;
  fs::create_directories(p, ec);
  if (ec) {
    throw Error("cannot create output directory '" + p.string() +
                "': " + ec.message());
  }
  return p;
}

std::string join_doubles(const std::vector<double>& v) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ',';
    out += format_double(v[i]);
  }
  return out;
}

SpectrumDecay parse_decay(const std::string& name) {
  if (name == "power_law") return SpectrumDecay::power_law;
  if (name == "log_linear") return SpectrumDecay::log_linear;
  if (name == "explicit") return SpectrumDecay::explicit_values;
  throw InvalidParameterError("unknown spectrum decay '" + name +
                              "' (expected power_law, log_linear, explicit)");
}

// ---------------------------------------------------------------- inject --

struct InjectCmd {
  CLI::App* app = nullptr;
  CommonFlags common;
  KeyedConfig cfg;
  std::size_t svd_cap = 0;
  CLI::Option* svd_cap_opt = nullptr;
};

void setup_inject(CLI::App& root, InjectCmd& c) {
  c.app = root.add_subcommand(
      "inject", "feature-adaptive noise injection on a matrix CSV");
  add_common_flags(c.app, c.common);
  c.cfg.declare(c.app, "input", "", "input matrix CSV (required)");
  c.cfg.declare(c.app, "output", "injected.csv",
                "output matrix filename, relative to --out-dir");
  c.cfg.declare(c.app, "alpha", "0.1", "noise strength (>= 0)");
  c.cfg.declare(c.app, "scaling", "sublinear",
                "scaling mode: none|uniform|linear|sublinear");
  c.cfg.declare(c.app, "seed", "42", "RNG seed");
  c.cfg.declare(c.app, "svd_tol", "1e-12",
                "relative singular-value truncation tolerance");
  c.cfg.declare(c.app, "repetitions", "0",
                "extra draws for the mean/stderr noise-energy trace fields");
  // Debug-only fault injection for the numerical-failure exit path.
  c.svd_cap_opt =
      c.app->add_option("--svd-max-iterations", c.svd_cap, "")->group("");
}

int run_inject(InjectCmd& c) {
  if (c.svd_cap_opt->count() > 0) detail::set_svd_iteration_cap(c.svd_cap);
  const fs::path out_dir = prepare_out_dir(c.common.out_dir);
  c.cfg.resolve(c.common.config_file);
  c.cfg.write_snapshot(out_dir / "inject.resolved.cfg", "inject");

  const std::string input = c.cfg.str("input");
  if (input.empty()) {
    throw InvalidParameterError(
        "inject: 'input' is required (path to a matrix CSV)");
  }
  const DenseMatrix e = read_matrix_csv(input);

  NoiseConfig noise;
  noise.alpha = c.cfg.num("alpha");
  noise.scaling = parse_scaling_mode(c.cfg.str("scaling"));
  noise.svd_tol = c.cfg.num("svd_tol");
  noise.rng = RngStream{c.cfg.uint("seed"), 0};

  const InjectionResult result = fanoise_inject(e, noise);
  const fs::path out_matrix = out_dir / c.cfg.str("output");
  write_matrix_csv(out_matrix, result.e_out);

  double scale_sq = 0.0;
  for (double s : result.trace.scaling_vector) scale_sq += s * s;
  const double expected_energy =
      noise.alpha * noise.alpha / static_cast<double>(e.cols()) *
      static_cast<double>(e.rows()) * scale_sq;

  std::vector<std::pair<std::string, std::string>> kv;
  kv.emplace_back("rows", std::to_string(e.rows()));
  kv.emplace_back("cols", std::to_string(e.cols()));
  kv.emplace_back("alpha", format_double(noise.alpha));
  kv.emplace_back("scaling", to_string(noise.scaling));
  kv.emplace_back("seed", std::to_string(noise.rng.seed));
  kv.emplace_back("svd_tol", format_double(noise.svd_tol));
  kv.emplace_back("rank_used", std::to_string(result.trace.rank_used));
  kv.emplace_back("zero_rank_warning",
                  result.trace.zero_rank_warning ? "true" : "false");
  kv.emplace_back("noise_energy", format_double(result.trace.noise_energy));
  kv.emplace_back("expected_energy", format_double(expected_energy));
  kv.emplace_back("scaling_vector",
                  join_doubles(result.trace.scaling_vector));
  kv.emplace_back("per_direction_energy",
                  join_doubles(result.trace.per_direction_energy));

  const std::size_t reps = c.cfg.size("repetitions");
  kv.emplace_back("repetitions", std::to_string(reps));
  if (reps > 0) {
    double sum = 0.0;
    double sumsq = 0.0;
    for (std::size_t rep = 0; rep < reps; ++rep) {
      NoiseConfig rep_cfg = noise;
      rep_cfg.rng = noise.rng.substream(rep + 1);
      const double energy = fanoise_inject(e, rep_cfg).trace.noise_energy;
      sum += energy;
      sumsq += energy * energy;
    }
    const double mean = sum / static_cast<double>(reps);
    double stderr_mean = 0.0;
    if (reps > 1) {
      const double var =
          std::max(0.0, sumsq / static_cast<double>(reps) - mean * mean) *
          (static_cast<double>(reps) / static_cast<double>(reps - 1));
      stderr_mean = std::sqrt(var / static_cast<double>(reps));
    }
    kv.emplace_back("mean_noise_energy", format_double(mean));
    kv.emplace_back("stderr_noise_energy", format_double(stderr_mean));
  }
  write_key_value_file(out_dir / "inject.trace", kv,
                       "fanoise injection trace");

  std::printf("inject: %zux%zu matrix, rank %zu, noise energy %s "
              "(expected %s) -> %s\n",
              e.rows(), e.cols(), result.trace.rank_used,
              format_double(result.trace.noise_energy).c_str(),
              format_double(expected_energy).c_str(),
              out_matrix.string().c_str());
  if (result.trace.zero_rank_warning) {
    std::fprintf(stderr,
                 "inject: warning: input has rank 0 at svd_tol=%s; "
                 "output equals input\n",
                 format_double(noise.svd_tol).c_str());
  }
  return 0;
}

// -------------------------------------------------------------- spectrum --

struct SpectrumCmd {
  CLI::App* app = nullptr;
  CommonFlags common;
  KeyedConfig cfg;
  std::size_t svd_cap = 0;
  CLI::Option* svd_cap_opt = nullptr;
};

void setup_spectrum(CLI::App& root, SpectrumCmd& c) {
  c.app = root.add_subcommand(
      "spectrum",
      "singular spectra and overlaps of a base matrix under Gaussian noise");
  add_common_flags(c.app, c.common);
  c.cfg.declare(c.app, "input", "",
                "base matrix CSV; empty builds a synthetic base");
  c.cfg.declare(c.app, "pure_noise", "false",
                "use an all-zero base so only the noise spectrum remains",
                /*is_flag=*/true);
  c.cfg.declare(c.app, "m", "1000", "synthetic base rows");
  c.cfg.declare(c.app, "n", "1536", "synthetic base columns");
  c.cfg.declare(c.app, "decay", "power_law",
                "synthetic spectrum shape: power_law|log_linear|explicit");
  c.cfg.declare(c.app, "exponent", "1", "power_law decay exponent");
  c.cfg.declare(c.app, "sigma_max", "1", "log_linear top singular value");
  c.cfg.declare(c.app, "sigma_min", "0.1",
                "log_linear bottom singular value");
  c.cfg.declare(c.app, "rank", "0",
                "synthetic rank; 0 means full min(m, n)");
  c.cfg.declare(c.app, "values", "",
                "comma-separated spectrum for decay=explicit");
  c.cfg.declare(c.app, "alpha", "1", "noise strength (per-entry std alpha/sqrt(n))");
  c.cfg.declare(c.app, "seed", "42", "RNG seed");
  c.cfg.declare(c.app, "plot", "true", "also write spectrum.svg",
                /*is_flag=*/true);
  c.svd_cap_opt =
      c.app->add_option("--svd-max-iterations", c.svd_cap, "")->group("");
}

int run_spectrum(SpectrumCmd& c) {
  if (c.svd_cap_opt->count() > 0) detail::set_svd_iteration_cap(c.svd_cap);
  const fs::path out_dir = prepare_out_dir(c.common.out_dir);
  c.cfg.resolve(c.common.config_file);
  c.cfg.write_snapshot(out_dir / "spectrum.resolved.cfg", "spectrum");

  const std::string input = c.cfg.str("input");
  const bool pure_noise = c.cfg.flag("pure_noise");
  if (pure_noise && !input.empty()) {
    throw InvalidParameterError(
        "spectrum: 'input' and 'pure_noise' are mutually exclusive");
  }
  const RngStream root{c.cfg.uint("seed"), 0};

  DenseMatrix f;
  if (!input.empty()) {
    f = read_matrix_csv(input);
  } else {
    const std::size_t m = c.cfg.size("m");
    const std::size_t n = c.cfg.size("n");
    if (m == 0 || n == 0) {
      throw InvalidParameterError("spectrum: m and n must be >= 1");
    }
    if (pure_noise) {
      f = DenseMatrix(m, n);  // all zeros: the noise spectrum alone
    } else {
      SpectrumSpec spec;
      spec.m = m;
      spec.n = n;
      spec.decay = parse_decay(c.cfg.str("decay"));
      spec.exponent = c.cfg.num("exponent");
      spec.sigma_max = c.cfg.num("sigma_max");
      spec.sigma_min = c.cfg.num("sigma_min");
      spec.rank = c.cfg.size("rank");
      spec.values = c.cfg.num_list("values");
      spec.rng = root.substream(1);
      f = make_spectrum_matrix(spec);
    }
  }

  const SpectralReport report =
      run_spectrum_experiment(f, c.cfg.num("alpha"), root.substream(2));
  write_spectrum_csv((out_dir / "spectrum.csv").string(), report);
  write_spectrum_meta((out_dir / "spectrum.meta").string(), report);
  if (c.cfg.flag("plot")) {
    write_spectrum_svg((out_dir / "spectrum.svg").string(), report);
  }

  std::printf("spectrum: %zux%zu alpha=%s mp=[%s, %s] tau*=%s "
              "weyl_violations=%zu\n",
              report.m, report.n, format_double(report.alpha).c_str(),
              format_double(report.mp_lower).c_str(),
              format_double(report.mp_upper).c_str(),
              format_double(report.tau_star).c_str(),
              report.weyl_violations);
  if (!report.overlaps.empty()) {
    std::printf("spectrum: overlap collapse (<0.5) at index %zu of %zu\n",
                collapse_index(report), report.overlaps.size());
  }
  return 0;
}

// ------------------------------------------------------------- gradcheck --

struct GradcheckCmd {
  CLI::App* app = nullptr;
  CommonFlags common;
  KeyedConfig cfg;
  bool negate = false;
};

void setup_gradcheck(CLI::App& root, GradcheckCmd& c) {
  c.app = root.add_subcommand(
      "gradcheck",
      "verify analytic loss gradients against finite differences and "
      "Monte-Carlo noise expectations");
  add_common_flags(c.app, c.common);
  c.cfg.declare(c.app, "mode", "both", "which suites to run: fd|mc|both");
  c.cfg.declare(c.app, "n", "16", "batch rows");
  c.cfg.declare(c.app, "d", "32", "embedding dimension");
  c.cfg.declare(c.app, "tau", "1", "softmax temperature");
  c.cfg.declare(c.app, "fd_step", "1e-5", "central-difference step");
  c.cfg.declare(c.app, "delta", "0.05", "per-entry noise std for the MC suite");
  c.cfg.declare(c.app, "samples", "100000", "MC draws");
  c.cfg.declare(c.app, "shards", "1", "MC RNG shards");
  c.cfg.declare(c.app, "seed", "42", "RNG seed");
  // Debug-only negative control: flips the analytic sign so the suite fails.
  c.app->add_flag("--negate-analytic", c.negate, "")->group("");
}

int run_gradcheck(GradcheckCmd& c) {
  const fs::path out_dir = prepare_out_dir(c.common.out_dir);
  c.cfg.resolve(c.common.config_file);
  c.cfg.write_snapshot(out_dir / "gradcheck.resolved.cfg", "gradcheck");

  const std::string mode = c.cfg.str("mode");
  if (mode != "fd" && mode != "mc" && mode != "both") {
    throw InvalidParameterError("gradcheck: mode must be fd, mc, or both");
  }
  const std::uint64_t seed = c.cfg.uint("seed");

  std::vector<GradCheckRow> rows;
  bool passed = true;
  auto absorb = [&](const GradCheckReport& report, const char* suite) {
    rows.insert(rows.end(), report.rows.begin(), report.rows.end());
    if (!report.passed) {
      passed = false;
      const GradCheckRow& w = report.worst;
      std::fprintf(stderr,
                   "gradcheck: %s suite failed %zu of %zu comparisons; "
                   "worst %s[%zu,%zu] analytic=%s numeric=%s abs_err=%s\n",
                   suite, report.failures, report.rows.size(),
                   w.target.c_str(), w.row, w.col,
                   format_double(w.analytic).c_str(),
                   format_double(w.numeric).c_str(),
                   format_double(w.abs_err).c_str());
    }
  };

  if (mode == "fd" || mode == "both") {
    FdCheckConfig fd;
    fd.n = c.cfg.size("n");
    fd.d = c.cfg.size("d");
    fd.tau = c.cfg.num("tau");
    fd.fd_step = c.cfg.num("fd_step");
    fd.negate_analytic = c.negate;
    fd.rng = RngStream{seed, 0};
    absorb(run_fd_gradcheck(fd), "fd");
  }
  if (mode == "mc" || mode == "both") {
    McCheckConfig mc;
    mc.n = c.cfg.size("n");
    mc.d = c.cfg.size("d");
    mc.tau = c.cfg.num("tau");
    mc.delta = c.cfg.num("delta");
    mc.samples = c.cfg.size("samples");
    mc.shards = c.cfg.size("shards");
    mc.negate_analytic = c.negate;
    mc.rng = RngStream{seed, 1};
    absorb(run_mc_gradcheck(mc), "mc");
  }

  write_gradcheck_csv((out_dir / "gradcheck.csv").string(), rows);
  std::printf("gradcheck: %zu comparisons, %s\n", rows.size(),
              passed ? "all within tolerance" : "TOLERANCE BREACH");
  return passed ? 0 : kExitVerification;
}

// ----------------------------------------------------------- train/sweep --

struct TrainCmd {
  CLI::App* app = nullptr;
  CommonFlags common;
  KeyedConfig cfg;
};

// Keys shared by train and sweep; `sweep` replaces the single alpha/scaling/
// seed with grid lists.
void declare_trainer_keys(KeyedConfig& cfg, CLI::App* cmd, bool sweep_grid) {
  cfg.declare(cmd, "encoder", "linear", "encoder kind: linear|mlp");
  cfg.declare(cmd, "hidden_dim", "32", "mlp hidden width");
  cfg.declare(cmd, "embed_dim", "16", "embedding dimension");
  cfg.declare(cmd, "steps", "500", "optimization steps");
  cfg.declare(cmd, "batch_size", "64", "rows per step");
  cfg.declare(cmd, "learning_rate", "0.5", "SGD learning rate");
  cfg.declare(cmd, "tau", "0.02", "softmax temperature");
  cfg.declare(cmd, "eval_every", "100",
              "evaluate P@1 every this many steps (0 disables)");
  if (sweep_grid) {
    cfg.declare(cmd, "alphas", "0,0.1,10", "noise strengths (comma list)");
    cfg.declare(cmd, "scalings", "sublinear",
                "scaling modes (comma list of none|uniform|linear|sublinear)");
    cfg.declare(cmd, "seeds", "1,2,3", "seeds (comma list)");
  } else {
    cfg.declare(cmd, "alpha", "0.1", "noise strength");
    cfg.declare(cmd, "scaling", "sublinear",
                "scaling mode: none|uniform|linear|sublinear");
    cfg.declare(cmd, "seed", "42", "RNG seed (training and noise streams)");
  }
  cfg.declare(cmd, "side", "both", "noisy side: query|key|both");
  cfg.declare(cmd, "position", "output_layer",
              "injection point: input_layer|output_layer");
  cfg.declare(cmd, "svd_tol", "1e-12", "injection SVD truncation tolerance");
  cfg.declare(cmd, "num_pairs", "256", "training pairs in the dataset");
  cfg.declare(cmd, "latent_dim", "16", "latent dimension of the pair model");
  cfg.declare(cmd, "feature_dim", "64", "feature dimension of both views");
  cfg.declare(cmd, "view_noise", "0", "per-view Gaussian feature noise std");
  cfg.declare(cmd, "num_distractors", "15", "distractors per eval query");
  cfg.declare(cmd, "num_eval_queries", "256", "evaluation queries");
  cfg.declare(cmd, "identity_views", "false",
              "make both views the identity embedding of the latent",
              /*is_flag=*/true);
  cfg.declare(cmd, "data_seed", "7", "dataset RNG seed");
}

PairedDataset dataset_from(const KeyedConfig& cfg) {
  PairedDatasetSpec spec;
  spec.num_pairs = cfg.size("num_pairs");
  spec.latent_dim = cfg.size("latent_dim");
  spec.feature_dim = cfg.size("feature_dim");
  spec.view_noise = cfg.num("view_noise");
  spec.num_distractors_eval = cfg.size("num_distractors");
  spec.num_eval_queries = cfg.size("num_eval_queries");
  spec.identity_views = cfg.flag("identity_views");
  spec.rng = RngStream{cfg.uint("data_seed"), 0};
  return make_paired_dataset(spec);
}

TrainConfig trainer_config_from(const KeyedConfig& cfg) {
  TrainConfig tc;
  tc.encoder = parse_encoder_kind(cfg.str("encoder"));
  tc.hidden_dim = cfg.size("hidden_dim");
  tc.embed_dim = cfg.size("embed_dim");
  tc.steps = cfg.size("steps");
  tc.batch_size = cfg.size("batch_size");
  tc.learning_rate = cfg.num("learning_rate");
  tc.tau = cfg.num("tau");
  tc.eval_every = cfg.size("eval_every");
  tc.noise.side = parse_noise_side(cfg.str("side"));
  tc.noise.position = parse_noise_position(cfg.str("position"));
  tc.noise.svd_tol = cfg.num("svd_tol");
  return tc;
}

void setup_train(CLI::App& root, TrainCmd& c) {
  c.app = root.add_subcommand(
      "train", "contrastive training run on a synthetic paired dataset");
  add_common_flags(c.app, c.common);
  declare_trainer_keys(c.cfg, c.app, /*sweep_grid=*/false);
}

int run_train(TrainCmd& c) {
  const fs::path out_dir = prepare_out_dir(c.common.out_dir);
  c.cfg.resolve(c.common.config_file);
  c.cfg.write_snapshot(out_dir / "train.resolved.cfg", "train");

  const PairedDataset data = dataset_from(c.cfg);
  TrainConfig cfg = trainer_config_from(c.cfg);
  cfg.noise.alpha = c.cfg.num("alpha");
  cfg.noise.scaling = parse_scaling_mode(c.cfg.str("scaling"));
  const std::uint64_t seed = c.cfg.uint("seed");
  cfg.rng = RngStream{seed, 0};
  cfg.noise.rng = RngStream{seed, 1};

  const TrainResult result = train(data, cfg);
  write_train_log_csv((out_dir / "train_log.csv").string(), result.log);

  const double p1 = evaluate_p_at_1(result.params, data.eval);
  double final_loss = result.log.empty() ? 0.0 : result.log.back().loss;
  std::printf("train: %zu steps, final loss %s, final P@1 %s\n", cfg.steps,
              format_double(final_loss).c_str(), format_double(p1).c_str());
  return 0;
}

struct SweepCmd {
  CLI::App* app = nullptr;
  CommonFlags common;
  KeyedConfig cfg;
};

void setup_sweep(CLI::App& root, SweepCmd& c) {
  c.app = root.add_subcommand(
      "sweep", "grid of training runs over alpha x scaling x seed");
  add_common_flags(c.app, c.common);
  declare_trainer_keys(c.cfg, c.app, /*sweep_grid=*/true);
}

int run_sweep(SweepCmd& c) {
  const fs::path out_dir = prepare_out_dir(c.common.out_dir);
  c.cfg.resolve(c.common.config_file);
  c.cfg.write_snapshot(out_dir / "sweep.resolved.cfg", "sweep");

  const PairedDataset data = dataset_from(c.cfg);
  const TrainConfig base = trainer_config_from(c.cfg);
  const std::vector<double> alphas = c.cfg.num_list("alphas");
  std::vector<ScalingMode> scalings;
  for (const std::string& name : c.cfg.str_list("scalings")) {
    scalings.push_back(parse_scaling_mode(name));
  }
  const std::vector<std::uint64_t> seeds = c.cfg.uint_list("seeds");

  const std::vector<SweepCell> cells =
      sweep(data, base, alphas, scalings, seeds);
  write_sweep_csv((out_dir / "sweep.csv").string(), cells);

  for (const SweepCell& cell : cells) {
    if (cell.failed) {
      std::printf("sweep: alpha=%s scaling=%s seed=%llu DIVERGED at step %zu\n",
                  format_double(cell.alpha).c_str(),
                  to_string(cell.scaling).c_str(),
                  static_cast<unsigned long long>(cell.seed),
                  cell.failed_step);
    } else {
      std::printf("sweep: alpha=%s scaling=%s seed=%llu P@1=%s\n",
                  format_double(cell.alpha).c_str(),
                  to_string(cell.scaling).c_str(),
                  static_cast<unsigned long long>(cell.seed),
                  format_double(cell.final_p_at_1).c_str());
    }
  }
  return 0;
}

int dispatch(InjectCmd& inject, SpectrumCmd& spectrum, GradcheckCmd& gradcheck,
             TrainCmd& train_cmd, SweepCmd& sweep_cmd) {
  if (inject.app->parsed()) return run_inject(inject);
  if (spectrum.app->parsed()) return run_spectrum(spectrum);
  if (gradcheck.app->parsed()) return run_gradcheck(gradcheck);
  if (train_cmd.app->parsed()) return run_train(train_cmd);
  if (sweep_cmd.app->parsed()) return run_sweep(sweep_cmd);
  return 1;  // unreachable: require_subcommand(1)
}

}  // namespace
}  // namespace fanlab::cli

int main(int argc, char** argv) {
  using namespace fanlab;
  using namespace fanlab::cli;

  CLI::App app{
      "fanlab: deterministic experiments on feature-adaptive noise "
      "injection, contrastive gradients, and noisy spectra"};
  app.require_subcommand(1);

  InjectCmd inject;
  SpectrumCmd spectrum;
  GradcheckCmd gradcheck;
  TrainCmd train_cmd;
  SweepCmd sweep_cmd;
  setup_inject(app, inject);
  setup_spectrum(app, spectrum);
  setup_gradcheck(app, gradcheck);
  setup_train(app, train_cmd);
  setup_sweep(app, sweep_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);  // prints help or the error message
    return code == 0 ? 0 : kExitParse;
  }

  try {
    return dispatch(inject, spectrum, gradcheck, train_cmd, sweep_cmd);
  } catch (const ParseError& e) {
    std::fprintf(stderr, "fanlab: parse error: %s\n", e.what());
    return kExitParse;
  } catch (const InvalidParameterError& e) {
    std::fprintf(stderr, "fanlab: invalid parameter: %s\n", e.what());
    return kExitParse;
  } catch (const InvalidInputError& e) {
    std::fprintf(stderr, "fanlab: invalid input: %s\n", e.what());
    return kExitParse;
  } catch (const DegenerateRowError& e) {
    std::fprintf(stderr, "fanlab: degenerate input row %zu: %s\n", e.row(),
                 e.what());
    return kExitParse;
  } catch (const DegenerateSpectrumError& e) {
    std::fprintf(stderr, "fanlab: degenerate spectrum: %s\n", e.what());
    return kExitNumerical;
  } catch (const NumericalFailureError& e) {
    std::fprintf(stderr, "fanlab: numerical failure: %s\n", e.what());
    return kExitNumerical;
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "fanlab: training diverged at step %zu: %s\n",
                 e.step(), e.what());
    return kExitDivergence;
  } catch (const Error& e) {
    std::fprintf(stderr, "fanlab: error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "fanlab: unexpected error: %s\n", e.what());
    return 1;
  }
}
