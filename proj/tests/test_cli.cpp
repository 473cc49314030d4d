#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <string>

#include "cli_helpers.hpp"
#include "doctest.h"

using cli::CommandResult;
using cli::TempDir;

namespace {

int count_lines(const std::string& s) {
  return static_cast<int>(std::count(s.begin(), s.end(), '\n'));
}

}  // namespace

TEST_CASE("help lists the canonical hyperparameter defaults") {
  TempDir dir("ahcr_cli_help");
  auto result = cli::run("train --help", dir.path);
  CHECK(result.exit_code == 0);
  for (const char* needle :
       {"0.02", "0.8", "0.001", "[32]", "[400]", "--widths", "--seed"})
    CHECK(result.output.find(needle) != std::string::npos);
}

TEST_CASE("synth-data writes the four CSV files with the right counts") {
  TempDir dir("ahcr_cli_synth");
  auto result =
      cli::run("synth-data --per-class 5 --seed 3 --out " + dir.str("data"),
               dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(count_lines(cli::read_file(dir.str("data") + "/train_images.csv")) ==
        4 * 28);
  CHECK(count_lines(cli::read_file(dir.str("data") + "/train_labels.csv")) ==
        4 * 28);
  CHECK(count_lines(cli::read_file(dir.str("data") + "/test_images.csv")) ==
        1 * 28);
  CHECK(count_lines(cli::read_file(dir.str("data") + "/test_labels.csv")) ==
        1 * 28);
}

TEST_CASE("train with zero epochs saves an initialized model and empty history") {
  TempDir dir("ahcr_cli_zero");
  auto result = cli::run(
      "train --synth --per-class 2 --widths 2,3,4 --epochs 0 --seed 5 --out " +
          dir.str("run"),
      dir.path);
  REQUIRE(result.exit_code == 0);
  CHECK(cli::fs::exists(dir.str("run") + "/model.ahcr"));
  CHECK(cli::read_file(dir.str("run") + "/history.csv") ==
        "epoch,train_loss,train_acc,test_acc\n");
}

TEST_CASE("mini pipeline: train, extract, svm, eval, cluster, predict") {
  TempDir dir("ahcr_cli_pipe");
  const std::string data = dir.str("data");
  REQUIRE(cli::run("synth-data --per-class 10 --seed 11 --out " + data,
                   dir.path)
              .exit_code == 0);

  const std::string run = dir.str("run");
  auto train = cli::run(
      "train --widths 4,8,16 --epochs 4 --seed 11"
      " --train_images " + data + "/train_images.csv" +
      " --train_labels " + data + "/train_labels.csv" +
      " --test_images " + data + "/test_images.csv" +
      " --test_labels " + data + "/test_labels.csv" +
      " --out " + run,
      dir.path);
  REQUIRE(train.exit_code == 0);
  const std::string model = run + "/model.ahcr";

  auto extract = cli::run("extract-features --model " + model + " --images " +
                              data + "/train_images.csv --labels " + data +
                              "/train_labels.csv --out " + run,
                          dir.path);
  REQUIRE(extract.exit_code == 0);
  const std::string features = cli::read_file(run + "/features.csv");
  CHECK(count_lines(features) == 8 * 28);
  const auto first_line_cols =
      std::count(features.begin(),
                 features.begin() + static_cast<long>(features.find('\n')),
                 ',') + 1;
  CHECK(first_line_cols == 1025);  // 1024 features + label

  REQUIRE(cli::run("svm-train --model " + model + " --features " + run +
                       "/features.csv --svm_epochs 8 --seed 11",
                   dir.path)
              .exit_code == 0);

  auto eval = cli::run("eval --model " + model + " --images " + data +
                           "/test_images.csv --labels " + data +
                           "/test_labels.csv --head both --by-cluster --out " +
                           run + "/eval",
                       dir.path);
  REQUIRE(eval.exit_code == 0);
  for (const char* name :
       {"/eval/report_softmax.txt", "/eval/confusion_softmax.csv",
        "/eval/summary_softmax.csv", "/eval/report_svm.txt",
        "/eval/summary_svm.csv", "/eval/comparison.txt",
        "/eval/report_softmax_clusters.txt"})
    CHECK(cli::fs::exists(run + name));

  auto cluster = cli::run("cluster --model " + model + " --images " + data +
                              "/train_images.csv --labels " + data +
                              "/train_labels.csv --seed 11 --save --out " + run,
                          dir.path);
  REQUIRE(cluster.exit_code == 0);
  const std::string clusters = cli::read_file(run + "/clusters.csv");
  CHECK(count_lines(clusters) == 29);
  CHECK(clusters.rfind("class_id,class_name,cluster_id", 0) == 0);
  CHECK(cluster.output.find("ari_vs_reference") != std::string::npos);

  auto predict = cli::run("predict --model " + model + " --image " + data +
                              "/test_images.csv",
                          dir.path);
  REQUIRE(predict.exit_code == 0);
  CHECK(count_lines(predict.output) == 1 + 2 * 28);
  CHECK(predict.output.rfind("row,class_id,class_name,cluster_id", 0) == 0);
}

TEST_CASE("identical seeds produce byte-identical artifacts") {
  TempDir dir("ahcr_cli_det");
  const std::string args =
      "train --synth --per-class 4 --widths 3,4,6 --epochs 2 --seed 99 --out ";
  REQUIRE(cli::run(args + dir.str("a"), dir.path).exit_code == 0);
  REQUIRE(cli::run(args + dir.str("b"), dir.path).exit_code == 0);
  for (const char* name :
       {"model.ahcr", "history.csv", "report_softmax.txt",
        "confusion_softmax.csv", "summary_softmax.csv"})
    CHECK(cli::same_bytes(dir.path / "a" / name, dir.path / "b" / name));
}

TEST_CASE("config file applies and flags override it") {
  TempDir dir("ahcr_cli_cfg");
  cli::write_file(dir.str("run.cfg"),
                  "# tiny run\n"
                  "widths = 2,3,4\n"
                  "max_epochs = 1\n"
                  "synth = true\n"
                  "synth_per_class = 2\n"
                  "seed = 7\n");
  auto from_file = cli::run(
      "train --config " + dir.str("run.cfg") + " --out " + dir.str("r1"),
      dir.path);
  REQUIRE(from_file.exit_code == 0);
  CHECK(count_lines(cli::read_file(dir.str("r1") + "/history.csv")) == 2);

  auto overridden = cli::run("train --config " + dir.str("run.cfg") +
                                 " --epochs 3 --out " + dir.str("r2"),
                             dir.path);
  REQUIRE(overridden.exit_code == 0);
  CHECK(count_lines(cli::read_file(dir.str("r2") + "/history.csv")) == 4);
}

TEST_CASE("exit code 1 for usage errors") {
  TempDir dir("ahcr_cli_usage");
  cli::write_file(dir.str("bad.cfg"), "not_a_key = 3\n");
  auto bad_key = cli::run(
      "train --config " + dir.str("bad.cfg") + " --out " + dir.str("x"),
      dir.path);
  CHECK(bad_key.exit_code == 1);
  CHECK(bad_key.output.find("not_a_key") != std::string::npos);

  auto bad_flag = cli::run("train --no-such-flag", dir.path);
  CHECK(bad_flag.exit_code == 1);

  auto missing_data = cli::run("train --out " + dir.str("y"), dir.path);
  CHECK(missing_data.exit_code == 1);
}

TEST_CASE("exit code 2 for data errors") {
  TempDir dir("ahcr_cli_data");
  auto missing = cli::run(
      "train --train_images nope.csv --train_labels nope2.csv --out " +
          dir.str("x"),
      dir.path);
  CHECK(missing.exit_code == 2);

  cli::write_file(dir.str("bad.csv"), "1,2,3\n");  // not a perfect square
  cli::write_file(dir.str("lbl.csv"), "1\n");
  auto bad_csv = cli::run("train --train_images " + dir.str("bad.csv") +
                              " --train_labels " + dir.str("lbl.csv") +
                              " --out " + dir.str("y"),
                          dir.path);
  CHECK(bad_csv.exit_code == 2);

  // corrupt container: flip a payload byte
  REQUIRE(cli::run("train --synth --per-class 2 --widths 2,3,4 --epochs 0"
                   " --seed 1 --out " +
                       dir.str("run"),
                   dir.path)
              .exit_code == 0);
  auto bytes = cli::read_file(dir.str("run") + "/model.ahcr");
  bytes[bytes.size() - 10] = static_cast<char>(bytes[bytes.size() - 10] ^ 0x7F);
  cli::write_file(dir.str("run") + "/model.ahcr", bytes);
  cli::write_file(dir.str("img.csv"), "0,0,0,0\n");
  auto corrupt = cli::run(
      "predict --model " + dir.str("run") + "/model.ahcr --image " +
          dir.str("img.csv"),
      dir.path);
  CHECK(corrupt.exit_code == 2);
}

TEST_CASE("eval with --head svm requires the svm section") {
  TempDir dir("ahcr_cli_nosvm");
  const std::string data = dir.str("data");
  REQUIRE(cli::run("synth-data --per-class 2 --seed 3 --out " + data, dir.path)
              .exit_code == 0);
  REQUIRE(cli::run("train --synth --per-class 2 --widths 2,3,4 --epochs 0"
                   " --seed 3 --out " +
                       dir.str("run"),
                   dir.path)
              .exit_code == 0);
  auto result = cli::run("eval --model " + dir.str("run") +
                             "/model.ahcr --images " + data +
                             "/test_images.csv --labels " + data +
                             "/test_labels.csv --head svm --out " +
                             dir.str("eval"),
                         dir.path);
  CHECK(result.exit_code == 2);
  CHECK(result.output.find("svm") != std::string::npos);
}

TEST_CASE("exit code 3 for numeric divergence") {
  TempDir dir("ahcr_cli_diverge");
  auto result = cli::run(
      "train --synth --per-class 3 --widths 2,3,4 --epochs 5 --seed 2"
      " --lr 1e18 --out " +
          dir.str("x"),
      dir.path);
  CHECK(result.exit_code == 3);
}
