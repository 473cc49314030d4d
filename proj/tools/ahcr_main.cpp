// Command-line front end: training, evaluation, prediction, feature
// extraction, SVM training, stroke clustering and synthetic data.
//
// Exit codes: 0 success, 1 usage error, 2 data/format error,
// 3 numeric divergence.

#include <Eigen/Core>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ahcr/catalog.hpp"
#include "ahcr/config.hpp"
#include "ahcr/container.hpp"
#include "ahcr/dataset.hpp"
#include "ahcr/evaluation.hpp"
#include "ahcr/kmeans.hpp"
#include "ahcr/optimizer.hpp"
#include "ahcr/pipeline.hpp"
#include "ahcr/svm.hpp"

namespace fs = std::filesystem;

namespace {

void write_text(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ahcr::FormatError("cannot write " + path);
  out << content;
  if (!out) throw ahcr::FormatError("write failure on " + path);
}

std::string in_out_dir(const ahcr::RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.out_dir);
  return (fs::path(cfg.out_dir) / name).string();
}

ahcr::DatasetSplit load_split(const ahcr::RunConfig& cfg) {
  if (cfg.synth) return ahcr::synth_dataset(cfg.seed, cfg.synth_per_class);
  if (cfg.train_images.empty() || cfg.train_labels.empty())
    throw ahcr::InputError(
        "train_images and train_labels are required (or pass --synth)");
  ahcr::DatasetSplit split;
  split.train = ahcr::load_csv(cfg.train_images, cfg.train_labels, cfg.invert);
  if (!cfg.test_images.empty() || !cfg.test_labels.empty()) {
    if (cfg.test_images.empty() || cfg.test_labels.empty())
      throw ahcr::InputError("test_images and test_labels must come together");
    split.test = ahcr::load_csv(cfg.test_images, cfg.test_labels, cfg.invert);
  }
  return split;
}

std::vector<ahcr::GlyphSample> load_eval_samples(const ahcr::RunConfig& cfg,
                                                 const std::string& images,
                                                 const std::string& labels) {
  return ahcr::load_csv(images, labels, cfg.invert);
}

ahcr::ModelConfig model_config(const ahcr::RunConfig& cfg) {
  ahcr::ModelConfig mc;
  mc.widths = {cfg.widths[0], cfg.widths[1], cfg.widths[2]};
  mc.dropout_rate = cfg.dropout_rate;
  mc.seed = cfg.seed;
  return mc;
}

ahcr::SgdConfig sgd_config(const ahcr::RunConfig& cfg) {
  ahcr::SgdConfig sgd;
  sgd.learning_rate = cfg.learning_rate;
  sgd.momentum = cfg.momentum;
  sgd.weight_decay = cfg.weight_decay;
  sgd.batch_size = cfg.batch_size;
  sgd.max_epochs = cfg.max_epochs;
  sgd.seed = cfg.seed;
  return sgd;
}

ahcr::SvmTrainConfig svm_config(const ahcr::RunConfig& cfg) {
  ahcr::SvmTrainConfig svm;
  svm.reg_lambda = cfg.svm_lambda;
  svm.learning_rate = cfg.svm_learning_rate;
  svm.epochs = cfg.svm_epochs;
  svm.batch_size = cfg.svm_batch_size;
  svm.dropout_rate = cfg.svm_dropout_rate;
  svm.seed = cfg.seed;
  return svm;
}

void apply_threads(const ahcr::RunConfig& cfg) {
  if (cfg.threads > 0) Eigen::setNbThreads(cfg.threads);
}

template <typename F>
int dispatch_precision(const ahcr::RunConfig& cfg, F&& f) {
  if (cfg.precision == "float64") return f(double{});
  return f(float{});
}

void write_report_files(const ahcr::RunConfig& cfg,
                        const ahcr::EvalReport& report, bool by_cluster) {
  const std::string& head = report.head;
  write_text(in_out_dir(cfg, "report_" + head + ".txt"),
             ahcr::per_class_table(report));
  write_text(in_out_dir(cfg, "confusion_" + head + ".csv"),
             ahcr::confusion_csv(report));
  write_text(in_out_dir(cfg, "summary_" + head + ".csv"),
             ahcr::summary_line(report));
  if (by_cluster)
    write_text(in_out_dir(cfg, "report_" + head + "_clusters.txt"),
               ahcr::by_cluster_table(report));
  std::fputs(ahcr::summary_line(report).c_str(), stdout);
}

void log_top_confusions(const ahcr::EvalReport& report) {
  const auto pairs = ahcr::confusion_pairs(report, 5);
  if (pairs.empty()) return;
  const auto& groups = ahcr::reference_partition();
  std::puts("top confusion pairs (true -> predicted, count, same master stroke):");
  for (const auto& [t, p, count] : pairs) {
    const bool same_group = groups[static_cast<std::size_t>(t - 1)] ==
                            groups[static_cast<std::size_t>(p - 1)];
    std::printf("  %s -> %s, %ld, %s\n", ahcr::class_name(t).c_str(),
                ahcr::class_name(p).c_str(), count,
                same_group ? "yes" : "no");
  }
}

// ---------------------------------------------------------------------------

int cmd_train(const ahcr::RunConfig& cfg) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto data = load_split(cfg);
    ahcr::Model<T> model(model_config(cfg));
    const auto history = ahcr::train(
        model, data.train, data.test, sgd_config(cfg),
        [](const ahcr::EpochRecord& r) {
          std::printf("epoch %d: loss=%.6f train=%.4f%% test=%.4f%%\n",
                      r.epoch, r.train_loss, r.train_acc, r.test_acc);
          std::fflush(stdout);
        });

    auto container = ahcr::model_to_container(model);
    ahcr::save_container(container, in_out_dir(cfg, "model.ahcr"));
    write_text(in_out_dir(cfg, "history.csv"), history.to_csv());
    if (!data.test.empty()) {
      const auto predictions = ahcr::predict_classes(model, data.test);
      std::vector<int> truths;
      for (const auto& s : data.test) truths.push_back(s.label);
      const auto report =
          ahcr::evaluate_predictions(predictions, truths, "softmax");
      write_report_files(cfg, report, false);
    }
    return 0;
  });
}

int cmd_synth_data(const ahcr::RunConfig& cfg) {
  const auto data = ahcr::synth_dataset(cfg.seed, cfg.synth_per_class);
  ahcr::save_csv(in_out_dir(cfg, "train_images.csv"),
                 in_out_dir(cfg, "train_labels.csv"), data.train);
  ahcr::save_csv(in_out_dir(cfg, "test_images.csv"),
                 in_out_dir(cfg, "test_labels.csv"), data.test);
  std::printf("wrote %zu train and %zu test samples to %s\n",
              data.train.size(), data.test.size(), cfg.out_dir.c_str());
  return 0;
}

int cmd_extract_features(const ahcr::RunConfig& cfg,
                         const std::string& model_path,
                         const std::string& images, const std::string& labels,
                         const std::string& out_name) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto container = ahcr::load_container(model_path);
    auto model = ahcr::model_from_container<T>(container);
    const auto samples = load_eval_samples(cfg, images, labels);
    auto [features, sample_labels] = ahcr::extract_features(model, samples);
    const std::string path = in_out_dir(cfg, out_name);
    ahcr::save_features_csv(path, features.template cast<float>(),
                            sample_labels);
    std::printf("wrote %lld feature rows of width %lld to %s\n",
                static_cast<long long>(features.dim(0)),
                static_cast<long long>(features.dim(1)), path.c_str());
    return 0;
  });
}

int cmd_svm_train(const ahcr::RunConfig& cfg, const std::string& model_path,
                  const std::string& features_path) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto [features_f, labels] = ahcr::load_features_csv(features_path);
    const auto features = features_f.template cast<T>();
    const auto svm = ahcr::svm_train(features, labels, svm_config(cfg));
    auto container = ahcr::load_container(model_path);
    ahcr::svm_to_container(svm, container);
    ahcr::save_container(container, model_path);
    std::printf("svm head (%lld classes x %lld features) written to %s\n",
                static_cast<long long>(svm.classes()),
                static_cast<long long>(svm.dim()), model_path.c_str());
    return 0;
  });
}

int cmd_eval(const ahcr::RunConfig& cfg, const std::string& model_path,
             const std::string& images, const std::string& labels,
             const std::string& head, bool by_cluster) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto container = ahcr::load_container(model_path);
    auto model = ahcr::model_from_container<T>(container);
    const auto samples = load_eval_samples(cfg, images, labels);
    std::vector<int> truths;
    for (const auto& s : samples) truths.push_back(s.label);

    std::vector<ahcr::EvalReport> reports;
    if (head == "softmax" || head == "both") {
      const auto predictions = ahcr::predict_classes(model, samples);
      reports.push_back(
          ahcr::evaluate_predictions(predictions, truths, "softmax"));
    }
    if (head == "svm" || head == "both") {
      const auto svm = ahcr::svm_from_container<T>(container);
      auto [features, feature_labels] = ahcr::extract_features(model, samples);
      const auto predictions = ahcr::svm_predict(svm, features);
      reports.push_back(ahcr::evaluate_predictions(predictions, truths, "svm"));
    }
    for (const auto& report : reports) write_report_files(cfg, report, by_cluster);
    if (reports.size() > 1)
      write_text(in_out_dir(cfg, "comparison.txt"),
                 ahcr::comparison_table(reports));
    log_top_confusions(reports.front());
    return 0;
  });
}

int cmd_cluster(const ahcr::RunConfig& cfg, const std::string& model_path,
                const std::string& images, const std::string& labels,
                bool save_assignment) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto container = ahcr::load_container(model_path);
    auto model = ahcr::model_from_container<T>(container);
    const auto samples = load_eval_samples(cfg, images, labels);
    auto [features, sample_labels] = ahcr::extract_features(model, samples);

    const auto centroids_t = ahcr::class_centroids(features, sample_labels);
    ahcr::MatrixX<double> centroids = centroids_t.template cast<double>();
    const auto clusters =
        ahcr::kmeans(centroids, ahcr::kNumStrokeGroups, cfg.seed);

    std::string csv = "class_id,class_name,cluster_id\n";
    for (int c = 0; c < ahcr::kNumClasses; ++c)
      csv += std::to_string(c + 1) + "," + ahcr::class_name(c + 1) + "," +
             std::to_string(clusters.cluster_of[static_cast<std::size_t>(c)]) +
             "\n";
    write_text(in_out_dir(cfg, "clusters.csv"), csv);

    const auto& reference = ahcr::reference_partition();
    const double ari = ahcr::compare_partition(
        clusters.cluster_of,
        std::vector<int>(reference.begin(), reference.end()));
    char summary[160];
    std::snprintf(summary, sizeof summary,
                  "{\"inertia\": %.6f, \"ari_vs_reference\": %.6f}\n",
                  clusters.inertia, ari);
    write_text(in_out_dir(cfg, "clusters_summary.json"), summary);
    std::fputs(summary, stdout);

    if (save_assignment) {
      ahcr::cluster_to_container(clusters.cluster_of, container);
      ahcr::save_container(container, model_path);
      std::printf("cluster assignment stored in %s\n", model_path.c_str());
    }
    return 0;
  });
}

int cmd_predict(const ahcr::RunConfig& cfg, const std::string& model_path,
                const std::string& image_csv) {
  apply_threads(cfg);
  return dispatch_precision(cfg, [&](auto tag) {
    using T = decltype(tag);
    auto container = ahcr::load_container(model_path);
    auto model = ahcr::model_from_container<T>(container);
    const auto images = ahcr::load_images_csv(image_csv, cfg.invert);

    std::vector<ahcr::GlyphSample> samples;
    samples.reserve(images.size());
    for (const auto& img : images) samples.push_back({img, 1});
    const auto predictions = ahcr::predict_classes(model, samples);

    const auto stored = ahcr::cluster_from_container(container);
    const auto& reference = ahcr::reference_partition();
    std::puts("row,class_id,class_name,cluster_id");
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      const int label = predictions[i];
      const int cluster =
          stored ? (*stored)[static_cast<std::size_t>(label - 1)]
                 : reference[static_cast<std::size_t>(label - 1)];
      std::printf("%zu,%d,%s,%d\n", i, label, ahcr::class_name(label).c_str(),
                  cluster);
    }
    return 0;
  });
}

void add_config_options(CLI::App* cmd, ahcr::RunConfig& cfg,
                        std::string& config_path, std::string& preset,
                        std::string& widths_str) {
  cmd->add_option("--config", config_path,
                  "flat key = value config file (# comments)");
  cmd->add_option("--preset", preset,
                  "size preset: desk (widths 16,32,64, 15 epochs) or full");
  cmd->add_option("--learning_rate,--lr", cfg.learning_rate, "SGD learning rate")
      ->capture_default_str();
  cmd->add_option("--momentum", cfg.momentum, "SGD momentum")
      ->capture_default_str();
  cmd->add_option("--weight_decay", cfg.weight_decay, "L2 weight decay")
      ->capture_default_str();
  cmd->add_option("--batch_size", cfg.batch_size, "mini-batch size")
      ->capture_default_str();
  cmd->add_option("--max_epochs,--epochs", cfg.max_epochs,
                  "training epochs (iteration budget)")
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "master random seed")
      ->capture_default_str();
  cmd->add_option("--widths", widths_str, "conv channel widths c1,c2,c3")
      ->capture_default_str();
  cmd->add_option("--dropout_rate", cfg.dropout_rate,
                  "dropout on the 1024-unit feature layer")
      ->capture_default_str();
  cmd->add_option("--precision", cfg.precision, "float32 or float64")
      ->capture_default_str()
      ->check(CLI::IsMember({"float32", "float64", "float", "double"}));
  cmd->add_option("--svm_lambda", cfg.svm_lambda, "SVM L2 regularization")
      ->capture_default_str();
  cmd->add_option("--svm_learning_rate", cfg.svm_learning_rate,
                  "SVM subgradient step size")
      ->capture_default_str();
  cmd->add_option("--svm_epochs", cfg.svm_epochs, "SVM training epochs")
      ->capture_default_str();
  cmd->add_option("--svm_batch_size", cfg.svm_batch_size, "SVM mini-batch size")
      ->capture_default_str();
  cmd->add_option("--svm_dropout_rate", cfg.svm_dropout_rate,
                  "dropout applied to SVM training presentations")
      ->capture_default_str();
  cmd->add_option("--train_images", cfg.train_images, "training images CSV");
  cmd->add_option("--train_labels", cfg.train_labels, "training labels CSV");
  cmd->add_option("--test_images", cfg.test_images, "test images CSV");
  cmd->add_option("--test_labels", cfg.test_labels, "test labels CSV");
  cmd->add_flag("--invert", cfg.invert, "flip ink polarity at ingestion");
  cmd->add_flag("--synth", cfg.synth, "use the synthetic glyph generator");
  cmd->add_option("--synth_per_class,--per-class", cfg.synth_per_class,
                  "synthetic samples per class")
      ->capture_default_str();
  cmd->add_option("--out_dir,--out", cfg.out_dir, "output directory")
      ->capture_default_str();
  cmd->add_option("--threads", cfg.threads,
                  "math thread count (0 = hardware default)")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  ahcr::RunConfig cfg;
  int exit_code = 0;
  try {
    // config file first, then preset, then explicit flags override below
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--config" && i + 1 < argc)
        cfg.apply_file(argv[i + 1]);
      else if (arg.rfind("--config=", 0) == 0)
        cfg.apply_file(arg.substr(9));
    }
    for (int i = 1; i < argc; ++i) {
      const std::string arg = argv[i];
      if (arg == "--preset" && i + 1 < argc)
        ahcr::apply_preset(cfg, argv[i + 1]);
      else if (arg.rfind("--preset=", 0) == 0)
        ahcr::apply_preset(cfg, arg.substr(9));
    }

    CLI::App app{
        "ahcr — handwritten Arabic character recognition (CNN + SVM head + "
        "master-stroke clustering)"};
    app.require_subcommand(1);
    std::string config_path, preset;
    std::string widths_str = cfg.widths_string();

    std::string model_path, images, labels, head = "softmax";
    std::string image_csv, features_path, features_out = "features.csv";
    bool by_cluster = false, save_assignment = false;

    auto* train = app.add_subcommand("train", "train the CNN and report both curves");
    add_config_options(train, cfg, config_path, preset, widths_str);

    auto* eval = app.add_subcommand("eval", "evaluate a saved model on a dataset");
    add_config_options(eval, cfg, config_path, preset, widths_str);
    eval->add_option("--model", model_path, "model container")->required();
    eval->add_option("--images", images, "images CSV")->required();
    eval->add_option("--labels", labels, "labels CSV")->required();
    eval->add_option("--head", head, "softmax, svm, or both")
        ->check(CLI::IsMember({"softmax", "svm", "both"}))
        ->capture_default_str();
    eval->add_flag("--by-cluster", by_cluster,
                   "also aggregate rates into the 13 master-stroke groups");

    auto* predict = app.add_subcommand("predict", "classify images from a CSV");
    add_config_options(predict, cfg, config_path, preset, widths_str);
    predict->add_option("--model", model_path, "model container")->required();
    predict->add_option("--image", image_csv, "image CSV (one row per image)")
        ->required();

    auto* extract = app.add_subcommand("extract-features",
                                       "write penultimate features to CSV");
    add_config_options(extract, cfg, config_path, preset, widths_str);
    extract->add_option("--model", model_path, "model container")->required();
    extract->add_option("--images", images, "images CSV")->required();
    extract->add_option("--labels", labels, "labels CSV")->required();
    extract->add_option("--features-out", features_out,
                        "output file name (inside out_dir)")
        ->capture_default_str();

    auto* svm_train_cmd = app.add_subcommand(
        "svm-train", "train the SVM head on extracted features");
    add_config_options(svm_train_cmd, cfg, config_path, preset, widths_str);
    svm_train_cmd->add_option("--model", model_path, "model container (rewritten)")
        ->required();
    svm_train_cmd->add_option("--features", features_path, "features CSV")
        ->required();

    auto* cluster = app.add_subcommand(
        "cluster", "k-means master-stroke clustering of class centroids");
    add_config_options(cluster, cfg, config_path, preset, widths_str);
    cluster->add_option("--model", model_path, "model container")->required();
    cluster->add_option("--images", images, "images CSV")->required();
    cluster->add_option("--labels", labels, "labels CSV")->required();
    cluster->add_flag("--save", save_assignment,
                      "store the assignment in the container");

    auto* synth = app.add_subcommand("synth-data",
                                     "write a synthetic glyph dataset as CSV");
    add_config_options(synth, cfg, config_path, preset, widths_str);

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e) == 0 ? 0 : 1;
    }

    // string-typed overrides
    for (auto* sub :
         {train, eval, predict, extract, svm_train_cmd, cluster, synth}) {
      if (sub->parsed() && sub->count("--widths") > 0)
        cfg.set("widths", widths_str);
    }
    if (cfg.precision == "float") cfg.precision = "float32";
    if (cfg.precision == "double") cfg.precision = "float64";

    if (train->parsed()) exit_code = cmd_train(cfg);
    else if (eval->parsed())
      exit_code = cmd_eval(cfg, model_path, images, labels, head, by_cluster);
    else if (predict->parsed())
      exit_code = cmd_predict(cfg, model_path, image_csv);
    else if (extract->parsed())
      exit_code = cmd_extract_features(cfg, model_path, images, labels,
                                       features_out);
    else if (svm_train_cmd->parsed())
      exit_code = cmd_svm_train(cfg, model_path, features_path);
    else if (cluster->parsed())
      exit_code = cmd_cluster(cfg, model_path, images, labels, save_assignment);
    else if (synth->parsed())
      exit_code = cmd_synth_data(cfg);
  } catch (const ahcr::DivergedError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  } catch (const ahcr::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ahcr::ShapeError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ahcr::InputError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return exit_code;
}
