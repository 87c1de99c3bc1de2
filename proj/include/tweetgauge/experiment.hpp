#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "tweetgauge/bow.hpp"
#include "tweetgauge/classic.hpp"
#include "tweetgauge/corpus.hpp"
#include "tweetgauge/metrics.hpp"
#include "tweetgauge/neural/bilstm.hpp"
#include "tweetgauge/neural/softmax.hpp"
#include "tweetgauge/neural/training.hpp"

namespace tweetgauge {

enum class Representation { bow, static_vectors, contextual };
enum class ModelKind { decision_tree, random_forest, logistic_regression, softmax, bilstm };

std::string_view to_string(Representation representation);
std::string_view to_string(ModelKind model);
Representation parse_representation(std::string_view text);
ModelKind parse_model_kind(std::string_view text);

/// Every field is settable by a `key = value` line of the same name.
struct ExperimentConfig {
  std::filesystem::path train_csv = "train.csv";
  std::filesystem::path test_csv = "test.csv";
  Representation representation = Representation::bow;
  ModelKind model = ModelKind::logistic_regression;
  std::filesystem::path vectors;
  std::filesystem::path contextual_cls;
  std::filesystem::path contextual_tokens;
  std::filesystem::path stopwords;  // empty selects the built-in list
  std::filesystem::path out = "out";
  std::uint64_t seed = 13;
  double heldout_fraction = 0.2;
  std::size_t min_frequency = 2;

  // Neural training; learning rate and epochs default per model.
  std::optional<std::size_t> max_epochs;
  std::optional<double> learning_rate;
  std::size_t batch_size = 32;
  std::size_t patience = 10;
  double validation_fraction = 0.01;
  std::size_t hidden_size = 128;
  std::size_t max_sequence_length = 32;

  // Classic models.
  std::size_t n_trees = 100;
  std::size_t features_per_split = 0;  // 0 = ceil(sqrt(|V|))
  std::optional<std::size_t> max_depth;
  std::size_t min_samples_split = 2;
  std::optional<double> l2_lambda;  // default 1 / n_train
  std::size_t workers = 0;

  double threshold = 0.5;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Keys accepted by set_config_value, in serialization order.
std::span<const std::string_view> config_keys();
/// Throws ConfigError on an unknown key or unparsable value.
void set_config_value(ExperimentConfig& config, std::string_view key, std::string_view value);
/// Lines are `key = value`; blank lines and `#` comments are ignored.
ExperimentConfig parse_config(std::istream& in, std::string_view source);
ExperimentConfig load_config(const std::filesystem::path& path);
std::string serialize_config(const ExperimentConfig& config);

/// Trees, forests and logistic regression need bag-of-words features; the
/// softmax head needs a dense tweet vector; the Bi-LSTM needs per-token
/// vectors. Throws ConfigError otherwise, or when a required file is unset.
void validate_experiment(const ExperimentConfig& config);

/// Resolves a relative path that does not exist against TWEETGAUGE_DATA_DIR.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

using ModelVariant =
    std::variant<DecisionTreeModel, RandomForestModel, LogisticRegressionModel, SoftmaxClassifier, BiLstmClassifier>;

/// Everything needed to rebuild features and score new tweets.
struct Checkpoint {
  ModelKind model_kind = ModelKind::logistic_regression;
  Representation representation = Representation::bow;
  std::uint64_t seed = 0;
  double heldout_fraction = 0.2;
  std::size_t max_sequence_length = 32;
  std::filesystem::path stopwords;
  std::filesystem::path vectors;
  std::filesystem::path contextual_cls;
  std::filesystem::path contextual_tokens;
  std::optional<Vocabulary> vocabulary;
  ModelVariant model;

  void save(std::ostream& out) const;
  static Checkpoint load(std::istream& in);
  void save(const std::filesystem::path& path) const;
  static Checkpoint load(const std::filesystem::path& path);

  std::string name() const;
};

/// Paths that replace the ones recorded in a checkpoint when non-empty.
struct ResourceOverrides {
  std::filesystem::path vectors;
  std::filesystem::path contextual_cls;
  std::filesystem::path contextual_tokens;
  std::filesystem::path stopwords;
};

/// Per-tweet positive-class scores in input order. Tree and forest scores
/// are clamped to [1e-6, 1 - 1e-6].
std::vector<double> score_tweets(const Checkpoint& checkpoint, std::span<const Tweet> tweets,
                                 const ResourceOverrides& overrides = {});

enum class SplitChoice { train, heldout, all };
SplitChoice parse_split(std::string_view text);
std::string_view to_string(SplitChoice split);

/// Rows of `tweets` in the requested part of the stratified held-out
/// partition used at training time.
std::vector<Tweet> select_split(std::span<const Tweet> tweets, SplitChoice split, std::uint64_t seed,
                                double heldout_fraction);

struct TrainOutcome {
  Checkpoint checkpoint;
  MetricsReport train_metrics;
  MetricsReport heldout_metrics;
  std::optional<TrainReport> report;
  std::vector<double> logistic_loss_curve;
};

/// Trains on the training part of the held-out split of `train_csv` and
/// writes model.ckpt, metrics.csv, config.txt and (neural models)
/// train_report.csv into config.out.
TrainOutcome run_train(const ExperimentConfig& config);

/// Scores the requested split and writes one metrics CSV row to `out`.
MetricsReport run_evaluate(const Checkpoint& checkpoint, const std::filesystem::path& dataset_csv,
                           SplitChoice split, double threshold, const ResourceOverrides& overrides,
                           std::ostream& out);

/// `id,text,<name>_score,<name>_label[,...][,target]`
void run_predict(std::span<const Checkpoint> checkpoints, const std::filesystem::path& dataset_csv,
                 double threshold, const ResourceOverrides& overrides, std::ostream& out);

/// `id,target` with 0/1 predictions in input order.
void run_export_submission(const Checkpoint& checkpoint, const std::filesystem::path& test_csv, double threshold,
                           const ResourceOverrides& overrides, std::ostream& out);

/// Whether the CSV header has a `target` column.
bool dataset_has_labels(const std::filesystem::path& path);

}  // namespace tweetgauge
