#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>

#include "doctest.h"
#include "fanlab/dense_matrix.hpp"
#include "fanlab/matrix_io.hpp"
#include "fanlab/rng.hpp"

using namespace fanlab;
namespace fs = std::filesystem;

namespace {

std::string binary_path() {
  const char* bin = std::getenv("FANLAB_BIN");
  REQUIRE_MESSAGE(bin != nullptr,
                  "FANLAB_BIN must point at the fanlab executable");
  return bin;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "fanlab_cli_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Runs `fanlab <args>` with stdout/stderr captured inside `dir`.
int run_cli(const std::string& args, const fs::path& dir) {
  const std::string cmd = binary_path() + " " + args + " >" +
                          (dir / "stdout.txt").string() + " 2>" +
                          (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

int run_in(const std::string& args, const fs::path& dir) {
  return run_cli(args + " --out-dir " + dir.string(), dir);
}

bool same_bytes(const fs::path& a, const fs::path& b) {
  return read_text_file(a) == read_text_file(b);
}

fs::path write_input_matrix(const fs::path& dir) {
  const fs::path path = dir / "input.csv";
  write_matrix_csv(path, gaussian_matrix(8, 5, 1.0, RngStream{3, 0}));
  return path;
}

}  // namespace

TEST_CASE("cli help and parse failures") {
  const fs::path dir = fresh_dir("parse");
  CHECK(run_cli("--help", dir) == 0);
  CHECK(run_cli("inject --help", dir) == 0);
  CHECK(run_cli("", dir) == 2);              // a subcommand is required
  CHECK(run_cli("inject --no-such-flag", dir) == 2);
  CHECK(run_cli("frobnicate", dir) == 2);
}

TEST_CASE("inject is byte-deterministic and honors alpha 0") {
  const fs::path base = fresh_dir("inject");
  const fs::path input = write_input_matrix(base);

  const fs::path a = fresh_dir("inject/a");
  const fs::path b = fresh_dir("inject/b");
  const std::string args =
      "inject --input " + input.string() + " --alpha 0.4 --seed 9";
  CHECK(run_in(args, a) == 0);
  CHECK(run_in(args, b) == 0);
  for (const char* name : {"injected.csv", "inject.trace",
                           "inject.resolved.cfg"}) {
    INFO("file ", name);
    CHECK(same_bytes(a / name, b / name));
  }
  // Different seed: different noise bytes.
  const fs::path c = fresh_dir("inject/c");
  CHECK(run_in("inject --input " + input.string() + " --alpha 0.4 --seed 10",
               c) == 0);
  CHECK_FALSE(same_bytes(a / "injected.csv", c / "injected.csv"));

  // alpha 0 writes back exactly the input bytes.
  const fs::path z = fresh_dir("inject/zero");
  CHECK(run_in("inject --input " + input.string() + " --alpha 0", z) == 0);
  CHECK(same_bytes(input, z / "injected.csv"));

  // Repetition study lands in the trace.
  const fs::path r = fresh_dir("inject/reps");
  CHECK(run_in("inject --input " + input.string() + " --repetitions 3", r) ==
        0);
  const std::string trace = read_text_file(r / "inject.trace");
  CHECK(trace.find("mean_noise_energy=") != std::string::npos);
  CHECK(trace.find("stderr_noise_energy=") != std::string::npos);
}

TEST_CASE("inject failure modes map to documented exit codes") {
  const fs::path dir = fresh_dir("inject_fail");
  const fs::path input = write_input_matrix(dir);

  CHECK(run_in("inject --input " + dir.string() + "/missing.csv", dir) == 2);

  write_text_file(dir / "bad.csv", "1,2\n3,nope\n");
  CHECK(run_in("inject --input " + (dir / "bad.csv").string(), dir) == 2);

  write_text_file(dir / "bad.cfg", "no_such_key=1\n");
  CHECK(run_in("inject --input " + input.string() + " --config " +
                   (dir / "bad.cfg").string(),
               dir) == 2);

  write_text_file(dir / "bad_value.cfg", "alpha=fast\n");
  CHECK(run_in("inject --input " + input.string() + " --config " +
                   (dir / "bad_value.cfg").string(),
               dir) == 2);

  // Starving the SVD iteration loop surfaces as a numerical failure.
  CHECK(run_in("inject --input " + input.string() +
                   " --svd-max-iterations 1",
               dir) == 3);
}

TEST_CASE("spectrum runs are byte-deterministic") {
  const fs::path a = fresh_dir("spectrum/a");
  const fs::path b = fresh_dir("spectrum/b");
  const std::string args =
      "spectrum --m 24 --n 30 --decay log_linear --sigma-max 3 "
      "--sigma-min 0.1 --alpha 0.5 --seed 3";
  CHECK(run_in(args, a) == 0);
  CHECK(run_in(args, b) == 0);
  for (const char* name : {"spectrum.csv", "spectrum.meta", "spectrum.svg",
                           "spectrum.resolved.cfg"}) {
    INFO("file ", name);
    CHECK(same_bytes(a / name, b / name));
  }
  const std::string meta = read_text_file(a / "spectrum.meta");
  CHECK(meta.find("alpha=0.5") != std::string::npos);
  CHECK(meta.find("weyl_violations=0") != std::string::npos);

  // Mutually exclusive input sources are rejected.
  const fs::path bad = fresh_dir("spectrum/bad");
  const fs::path input = write_input_matrix(bad);
  CHECK(run_in("spectrum --input " + input.string() + " --pure-noise", bad) ==
        2);
}

TEST_CASE("gradcheck exit codes reflect verification results") {
  const fs::path a = fresh_dir("gradcheck/a");
  const fs::path b = fresh_dir("gradcheck/b");
  const std::string args = "gradcheck --mode fd --n 4 --d 8 --seed 5";
  CHECK(run_in(args, a) == 0);
  CHECK(run_in(args, b) == 0);
  CHECK(same_bytes(a / "gradcheck.csv", b / "gradcheck.csv"));

  const fs::path flipped = fresh_dir("gradcheck/flipped");
  CHECK(run_in(args + " --negate-analytic", flipped) == 4);

  const fs::path mc = fresh_dir("gradcheck/mc");
  CHECK(run_in("gradcheck --mode mc --n 4 --d 8 --samples 2000 --delta 0",
               mc) == 0);
}

TEST_CASE("train and sweep are byte-deterministic and re-runnable") {
  const std::string train_args =
      "train --steps 25 --batch-size 8 --num-pairs 32 --feature-dim 16 "
      "--latent-dim 4 --eval-every 5 --seed 3 --learning-rate 0.7";

  const fs::path a = fresh_dir("train/a");
  const fs::path b = fresh_dir("train/b");
  CHECK(run_in(train_args, a) == 0);
  CHECK(run_in(train_args, b) == 0);
  CHECK(same_bytes(a / "train_log.csv", b / "train_log.csv"));
  CHECK(same_bytes(a / "train.resolved.cfg", b / "train.resolved.cfg"));

  // The resolved snapshot alone reproduces the run.
  const fs::path c = fresh_dir("train/c");
  CHECK(run_in("train --config " + (a / "train.resolved.cfg").string(), c) ==
        0);
  CHECK(same_bytes(a / "train_log.csv", c / "train_log.csv"));
  CHECK(same_bytes(a / "train.resolved.cfg", c / "train.resolved.cfg"));

  const fs::path diverged = fresh_dir("train/diverged");
  CHECK(run_in("train --steps 5 --learning-rate 1e200", diverged) == 5);

  const std::string sweep_args =
      "sweep --steps 12 --batch-size 8 --num-pairs 32 --feature-dim 16 "
      "--latent-dim 4 --eval-every 0 --alphas 0,0.5 --seeds 1,2";
  const fs::path sa = fresh_dir("sweep/a");
  const fs::path sb = fresh_dir("sweep/b");
  CHECK(run_in(sweep_args, sa) == 0);
  CHECK(run_in(sweep_args, sb) == 0);
  CHECK(same_bytes(sa / "sweep.csv", sb / "sweep.csv"));
  const std::string sweep_csv = read_text_file(sa / "sweep.csv");
  CHECK(sweep_csv.rfind("alpha,scaling,seed,", 0) == 0);
}
