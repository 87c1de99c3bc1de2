#include "tweetgauge/experiment.hpp"

#include <array>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "serial.hpp"
#include "tweetgauge/embeddings.hpp"
#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

namespace fs = std::filesystem;

namespace {

constexpr std::array<std::string_view, 3> kRepresentationNames{"bow", "static_vectors", "contextual"};
constexpr std::array<std::string_view, 5> kModelNames{"decision_tree", "random_forest", "logistic_regression",
                                                      "softmax", "bilstm"};

constexpr std::array<std::string_view, 26> kConfigKeys{
    "train_csv",      "test_csv",       "representation",      "model",
    "vectors",        "contextual_cls", "contextual_tokens",   "stopwords",
    "out",            "seed",           "heldout_fraction",    "min_frequency",
    "max_epochs",     "learning_rate",  "batch_size",          "patience",
    "validation_fraction", "hidden_size", "max_sequence_length", "n_trees",
    "features_per_split", "max_depth",  "min_samples_split",   "l2_lambda",
    "workers",        "threshold"};

std::uint64_t config_uint(std::string_view key, std::string_view value) {
  std::uint64_t parsed = 0;
  if (!parse_uint(value, parsed)) {
    throw ConfigError("config key `" + std::string(key) + "` expects a non-negative integer, got `" +
                      std::string(value) + "`");
  }
  return parsed;
}

double config_double(std::string_view key, std::string_view value) {
  double parsed = 0;
  if (!parse_double(value, parsed) || !std::isfinite(parsed)) {
    throw ConfigError("config key `" + std::string(key) + "` expects a number, got `" + std::string(value) + "`");
  }
  return parsed;
}

std::string path_text(const fs::path& path) { return path.empty() ? std::string("-") : path.string(); }

fs::path path_from_text(std::string_view text) { return text == "-" ? fs::path() : fs::path(std::string(text)); }

fs::path pick(const fs::path& override_path, const fs::path& recorded) {
  return override_path.empty() ? recorded : resolve_data_path(override_path);
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << contents;
  if (!out) throw DataError("failed writing " + path.string());
}

// Feature matrices for one dataset; only the member matching the
// checkpoint's representation/model pairing is filled.
struct Features {
  std::vector<BowVector> bow;
  Eigen::MatrixXd dense;
  std::vector<Eigen::MatrixXf> sequences;
};

Features subset(const Features& all, std::span<const std::size_t> rows) {
  Features part;
  if (!all.bow.empty()) {
    for (auto r : rows) part.bow.push_back(all.bow[r]);
  }
  if (all.dense.size() > 0) {
    part.dense.resize(all.dense.rows(), static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
      part.dense.col(static_cast<Eigen::Index>(i)) = all.dense.col(static_cast<Eigen::Index>(rows[i]));
    }
  }
  if (!all.sequences.empty()) {
    for (auto r : rows) part.sequences.push_back(all.sequences[r]);
  }
  return part;
}

struct ResourcePaths {
  fs::path vectors;
  fs::path contextual_cls;
  fs::path contextual_tokens;
};

WordEmbeddingTable load_vectors_for(const fs::path& path, std::span<const TokenizedTweet> tweets) {
  std::unordered_set<std::string> keep;
  for (const auto& tweet : tweets) keep.insert(tweet.tokens.begin(), tweet.tokens.end());
  return load_word_vectors(path, &keep);
}

Features encode(Representation representation, ModelKind model, const std::optional<Vocabulary>& vocabulary,
                std::size_t max_length, std::span<const TokenizedTweet> tweets, const ResourcePaths& paths) {
  Features features;
  const auto n = static_cast<Eigen::Index>(tweets.size());
  switch (representation) {
    case Representation::bow:
      if (!vocabulary) throw DataError("checkpoint: bag-of-words model without a vocabulary");
      features.bow.reserve(tweets.size());
      for (const auto& tweet : tweets) features.bow.push_back(vectorize(tweet.tokens, *vocabulary));
      break;
    case Representation::static_vectors: {
      const WordEmbeddingTable table = load_vectors_for(paths.vectors, tweets);
      const auto dim = static_cast<Eigen::Index>(table.dimension());
      if (model == ModelKind::bilstm) {
        for (const auto& tweet : tweets) {
          Eigen::MatrixXf sequence = token_sequence(tweet.tokens, table, max_length);
          if (sequence.cols() == 0) sequence = Eigen::MatrixXf::Zero(dim, 1);
          features.sequences.push_back(std::move(sequence));
        }
      } else {
        features.dense.resize(dim, n);
        for (Eigen::Index i = 0; i < n; ++i) {
          features.dense.col(i) = mean_pool(tweets[static_cast<std::size_t>(i)].tokens, table).vector;
        }
      }
      break;
    }
    case Representation::contextual: {
      std::optional<fs::path> tokens_path;
      if (model == ModelKind::bilstm) tokens_path = paths.contextual_tokens;
      const ContextualEmbeddingStore store = load_contextual_store(paths.contextual_cls, tokens_path);
      const auto dim = static_cast<Eigen::Index>(store.dimension());
      if (model == ModelKind::bilstm) {
        for (const auto& tweet : tweets) {
          Eigen::MatrixXf sequence = store.tokens(tweet.id);
          if (sequence.cols() == 0) sequence = Eigen::MatrixXf::Zero(dim, 1);
          features.sequences.push_back(std::move(sequence));
        }
      } else {
        features.dense.resize(dim, n);
        for (Eigen::Index i = 0; i < n; ++i) features.dense.col(i) = store.cls(tweets[static_cast<std::size_t>(i)].id);
      }
      break;
    }
  }
  return features;
}

void check_dimension(Eigen::Index expected, Eigen::Index found) {
  if (expected != found) {
    throw DataError("representation has dimension " + std::to_string(found) + " but the checkpoint expects " +
                    std::to_string(expected));
  }
}

std::vector<double> score_features(const ModelVariant& model, const Features& features) {
  std::vector<double> scores;
  std::visit(
      [&](const auto& m) {
        using M = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<M, DecisionTreeModel> || std::is_same_v<M, RandomForestModel> ||
                      std::is_same_v<M, LogisticRegressionModel>) {
          for (const auto& x : features.bow) {
            if (x.size() != m.n_features()) check_dimension(static_cast<Eigen::Index>(m.n_features()), x.size());
            double s = m.predict_score(x);
            if constexpr (!std::is_same_v<M, LogisticRegressionModel>) s = clamp_probability(s);
            scores.push_back(s);
          }
        } else if constexpr (std::is_same_v<M, SoftmaxClassifier>) {
          if (features.dense.cols() > 0) check_dimension(m.input_dim(), features.dense.rows());
          for (Eigen::Index i = 0; i < features.dense.cols(); ++i) scores.push_back(m.score(features.dense.col(i)));
        } else {
          for (const auto& sequence : features.sequences) {
            check_dimension(m.input_dim(), sequence.rows());
            scores.push_back(m.score(sequence));
          }
        }
      },
      model);
  return scores;
}

std::vector<int> labels_at(std::span<const int> labels, std::span<const std::size_t> rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (auto r : rows) out.push_back(labels[r]);
  return out;
}

std::vector<int> tweet_labels(std::span<const Tweet> tweets) {
  std::vector<int> labels;
  labels.reserve(tweets.size());
  for (const auto& tweet : tweets) {
    if (!tweet.label) throw DataError("tweet " + tweet.id + " has no label");
    labels.push_back(*tweet.label);
  }
  return labels;
}

StopWords stop_words_from(const fs::path& path) {
  return path.empty() ? StopWords::english() : StopWords::from_file(path);
}

ResourcePaths resources_of(const Checkpoint& checkpoint, const ResourceOverrides& overrides) {
  return {pick(overrides.vectors, checkpoint.vectors), pick(overrides.contextual_cls, checkpoint.contextual_cls),
          pick(overrides.contextual_tokens, checkpoint.contextual_tokens)};
}

fs::path absolute_or_empty(const fs::path& path) { return path.empty() ? path : fs::absolute(path); }

}  // namespace

std::string_view to_string(Representation representation) {
  return kRepresentationNames[static_cast<std::size_t>(representation)];
}

std::string_view to_string(ModelKind model) { return kModelNames[static_cast<std::size_t>(model)]; }

Representation parse_representation(std::string_view text) {
  for (std::size_t i = 0; i < kRepresentationNames.size(); ++i) {
    if (text == kRepresentationNames[i]) return static_cast<Representation>(i);
  }
  throw ConfigError("unknown representation `" + std::string(text) + "` (expected bow, static_vectors or contextual)");
}

ModelKind parse_model_kind(std::string_view text) {
  for (std::size_t i = 0; i < kModelNames.size(); ++i) {
    if (text == kModelNames[i]) return static_cast<ModelKind>(i);
  }
  throw ConfigError("unknown model `" + std::string(text) +
                    "` (expected decision_tree, random_forest, logistic_regression, softmax or bilstm)");
}

std::span<const std::string_view> config_keys() { return kConfigKeys; }

void set_config_value(ExperimentConfig& c, std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  const bool unset = value.empty();
  auto path = [&] { return fs::path(std::string(value)); };
  if (key == "train_csv") c.train_csv = path();
  else if (key == "test_csv") c.test_csv = path();
  else if (key == "representation") c.representation = parse_representation(value);
  else if (key == "model") c.model = parse_model_kind(value);
  else if (key == "vectors") c.vectors = path();
  else if (key == "contextual_cls") c.contextual_cls = path();
  else if (key == "contextual_tokens") c.contextual_tokens = path();
  else if (key == "stopwords") c.stopwords = path();
  else if (key == "out") c.out = path();
  else if (key == "seed") c.seed = config_uint(key, value);
  else if (key == "heldout_fraction") c.heldout_fraction = config_double(key, value);
  else if (key == "min_frequency") c.min_frequency = config_uint(key, value);
  else if (key == "max_epochs") c.max_epochs = unset ? std::nullopt : std::optional<std::size_t>(config_uint(key, value));
  else if (key == "learning_rate") c.learning_rate = unset ? std::nullopt : std::optional<double>(config_double(key, value));
  else if (key == "batch_size") c.batch_size = config_uint(key, value);
  else if (key == "patience") c.patience = config_uint(key, value);
  else if (key == "validation_fraction") c.validation_fraction = config_double(key, value);
  else if (key == "hidden_size") c.hidden_size = config_uint(key, value);
  else if (key == "max_sequence_length") c.max_sequence_length = config_uint(key, value);
  else if (key == "n_trees") c.n_trees = config_uint(key, value);
  else if (key == "features_per_split") c.features_per_split = config_uint(key, value);
  else if (key == "max_depth") c.max_depth = unset ? std::nullopt : std::optional<std::size_t>(config_uint(key, value));
  else if (key == "min_samples_split") c.min_samples_split = config_uint(key, value);
  else if (key == "l2_lambda") c.l2_lambda = unset ? std::nullopt : std::optional<double>(config_double(key, value));
  else if (key == "workers") c.workers = config_uint(key, value);
  else if (key == "threshold") c.threshold = config_double(key, value);
  else throw ConfigError("unknown config key `" + std::string(key) + "`");
}

ExperimentConfig parse_config(std::istream& in, std::string_view source) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const std::string_view text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_number) + ": expected `key = value`");
    }
    try {
      set_config_value(config, trim(text.substr(0, eq)), text.substr(eq + 1));
    } catch (const ConfigError& e) {
      throw ConfigError(std::string(source) + ":" + std::to_string(line_number) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  return parse_config(in, path.string());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  auto line = [&](std::string_view key, const std::string& value) { out << key << " = " << value << '\n'; };
  line("train_csv", c.train_csv.string());
  line("test_csv", c.test_csv.string());
  line("representation", std::string(to_string(c.representation)));
  line("model", std::string(to_string(c.model)));
  line("vectors", c.vectors.string());
  line("contextual_cls", c.contextual_cls.string());
  line("contextual_tokens", c.contextual_tokens.string());
  line("stopwords", c.stopwords.string());
  line("out", c.out.string());
  line("seed", std::to_string(c.seed));
  line("heldout_fraction", format_double(c.heldout_fraction));
  line("min_frequency", std::to_string(c.min_frequency));
  line("max_epochs", c.max_epochs ? std::to_string(*c.max_epochs) : "");
  line("learning_rate", c.learning_rate ? format_double(*c.learning_rate) : "");
  line("batch_size", std::to_string(c.batch_size));
  line("patience", std::to_string(c.patience));
  line("validation_fraction", format_double(c.validation_fraction));
  line("hidden_size", std::to_string(c.hidden_size));
  line("max_sequence_length", std::to_string(c.max_sequence_length));
  line("n_trees", std::to_string(c.n_trees));
  line("features_per_split", std::to_string(c.features_per_split));
  line("max_depth", c.max_depth ? std::to_string(*c.max_depth) : "");
  line("min_samples_split", std::to_string(c.min_samples_split));
  line("l2_lambda", c.l2_lambda ? format_double(*c.l2_lambda) : "");
  line("workers", std::to_string(c.workers));
  line("threshold", format_double(c.threshold));
  return out.str();
}

void validate_experiment(const ExperimentConfig& c) {
  const bool classic = c.model == ModelKind::decision_tree || c.model == ModelKind::random_forest ||
                       c.model == ModelKind::logistic_regression;
  const std::string pairing =
      std::string(to_string(c.model)) + " cannot use the " + std::string(to_string(c.representation)) +
      " representation";
  if (classic && c.representation != Representation::bow) throw ConfigError(pairing + " (requires bow)");
  if (!classic && c.representation == Representation::bow) {
    throw ConfigError(pairing + (c.model == ModelKind::bilstm ? " (requires per-token static_vectors or contextual)"
                                                              : " (requires static_vectors or contextual)"));
  }
  if (c.representation == Representation::static_vectors && c.vectors.empty()) {
    throw ConfigError("static_vectors representation requires `vectors`");
  }
  if (c.representation == Representation::contextual) {
    if (c.contextual_cls.empty()) throw ConfigError("contextual representation requires `contextual_cls`");
    if (c.model == ModelKind::bilstm && c.contextual_tokens.empty()) {
      throw ConfigError("bilstm on contextual inputs requires `contextual_tokens`");
    }
  }
  if (!(c.heldout_fraction > 0.0 && c.heldout_fraction < 1.0)) {
    throw ConfigError("heldout_fraction must lie in (0, 1)");
  }
  if (!(c.threshold >= 0.0 && c.threshold <= 1.0)) throw ConfigError("threshold must lie in [0, 1]");
  if (c.min_frequency < 1) throw ConfigError("min_frequency must be at least 1");
  if (c.max_epochs && *c.max_epochs < 1) throw ConfigError("max_epochs must be at least 1");
  if (c.learning_rate && !(*c.learning_rate > 0.0)) throw ConfigError("learning_rate must be positive");
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (c.patience < 1) throw ConfigError("patience must be at least 1");
  if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0)) {
    throw ConfigError("validation_fraction must lie in (0, 1)");
  }
  if (c.hidden_size < 1) throw ConfigError("hidden_size must be at least 1");
  if (c.max_sequence_length < 1) throw ConfigError("max_sequence_length must be at least 1");
  if (c.n_trees < 1) throw ConfigError("n_trees must be at least 1");
  if (c.min_samples_split < 2) throw ConfigError("min_samples_split must be at least 2");
  if (c.l2_lambda && !(*c.l2_lambda >= 0.0)) throw ConfigError("l2_lambda must be non-negative");
}

fs::path resolve_data_path(const fs::path& path) {
  if (path.empty() || path.is_absolute() || fs::exists(path)) return path;
  if (const char* root = std::getenv("TWEETGAUGE_DATA_DIR"); root != nullptr && *root != '\0') {
    return fs::path(root) / path;
  }
  return path;
}

std::string Checkpoint::name() const {
  return std::string(to_string(model_kind)) + "_" + std::string(to_string(representation));
}

void Checkpoint::save(std::ostream& out) const {
  out << "tweetgauge_checkpoint v1\n";
  out << "model " << to_string(model_kind) << '\n';
  out << "representation " << to_string(representation) << '\n';
  out << "seed " << seed << '\n';
  out << "heldout_fraction " << format_double(heldout_fraction) << '\n';
  out << "max_sequence_length " << max_sequence_length << '\n';
  out << "stopwords " << path_text(stopwords) << '\n';
  out << "vectors " << path_text(vectors) << '\n';
  out << "contextual_cls " << path_text(contextual_cls) << '\n';
  out << "contextual_tokens " << path_text(contextual_tokens) << '\n';
  if (vocabulary) {
    out << "vocabulary " << vocabulary->size() << ' ' << vocabulary->min_frequency() << '\n';
    vocabulary->save(out);
  } else {
    out << "vocabulary none\n";
  }
  std::visit([&](const auto& m) { m.save(out); }, model);
}

Checkpoint Checkpoint::load(std::istream& in) {
  serial::expect_line(in, "tweetgauge_checkpoint v1");
  Checkpoint c;
  try {
    c.model_kind = parse_model_kind(serial::read_field(in, "model"));
    c.representation = parse_representation(serial::read_field(in, "representation"));
  } catch (const ConfigError& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
  c.seed = serial::read_uint(in, "seed");
  c.heldout_fraction = serial::read_double(in, "heldout_fraction");
  c.max_sequence_length = serial::read_uint(in, "max_sequence_length");
  c.stopwords = path_from_text(serial::read_field(in, "stopwords"));
  c.vectors = path_from_text(serial::read_field(in, "vectors"));
  c.contextual_cls = path_from_text(serial::read_field(in, "contextual_cls"));
  c.contextual_tokens = path_from_text(serial::read_field(in, "contextual_tokens"));
  const std::string vocab_field = serial::read_field(in, "vocabulary");
  if (vocab_field != "none") {
    const auto parts = split(vocab_field, ' ');
    std::uint64_t size = 0;
    std::uint64_t min_frequency = 0;
    if (parts.size() != 2 || !parse_uint(parts[0], size) || !parse_uint(parts[1], min_frequency)) {
      throw DataError("checkpoint: malformed vocabulary header `" + vocab_field + "`");
    }
    std::stringstream block;
    for (std::uint64_t i = 0; i < size; ++i) block << serial::next_line(in, "vocabulary") << '\n';
    c.vocabulary = Vocabulary::load(block, min_frequency);
  }
  switch (c.model_kind) {
    case ModelKind::decision_tree: c.model = DecisionTreeModel::load(in); break;
    case ModelKind::random_forest: c.model = RandomForestModel::load(in); break;
    case ModelKind::logistic_regression: c.model = LogisticRegressionModel::load(in); break;
    case ModelKind::softmax: c.model = SoftmaxClassifier::load(in); break;
    case ModelKind::bilstm: c.model = BiLstmClassifier::load(in); break;
  }
  return c;
}

void Checkpoint::save(const fs::path& path) const {
  std::ostringstream out;
  save(out);
  write_file(path, out.str());
}

Checkpoint Checkpoint::load(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint: " + path.string());
  try {
    return load(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

std::vector<double> score_tweets(const Checkpoint& checkpoint, std::span<const Tweet> tweets,
                                 const ResourceOverrides& overrides) {
  const fs::path stopwords = pick(overrides.stopwords, checkpoint.stopwords);
  const auto tokenized = tokenize(tweets, stop_words_from(stopwords));
  const Features features = encode(checkpoint.representation, checkpoint.model_kind, checkpoint.vocabulary,
                                   checkpoint.max_sequence_length, tokenized, resources_of(checkpoint, overrides));
  return score_features(checkpoint.model, features);
}

SplitChoice parse_split(std::string_view text) {
  if (text == "train") return SplitChoice::train;
  if (text == "heldout") return SplitChoice::heldout;
  if (text == "all") return SplitChoice::all;
  throw ConfigError("unknown split `" + std::string(text) + "` (expected train, heldout or all)");
}

std::string_view to_string(SplitChoice split) {
  switch (split) {
    case SplitChoice::train: return "train";
    case SplitChoice::heldout: return "heldout";
    case SplitChoice::all: return "all";
  }
  return "all";
}

std::vector<Tweet> select_split(std::span<const Tweet> tweets, SplitChoice split, std::uint64_t seed,
                                double heldout_fraction) {
  if (split == SplitChoice::all) return {tweets.begin(), tweets.end()};
  const auto labels = tweet_labels(tweets);
  const SplitIndices parts = stratified_split(labels, heldout_fraction, seed);
  const auto& rows = split == SplitChoice::train ? parts.train : parts.validation;
  std::vector<Tweet> selected;
  selected.reserve(rows.size());
  for (auto r : rows) selected.push_back(tweets[r]);
  return selected;
}

TrainOutcome run_train(const ExperimentConfig& raw_config) {
  validate_experiment(raw_config);
  ExperimentConfig config = raw_config;
  config.train_csv = resolve_data_path(config.train_csv);
  config.vectors = absolute_or_empty(resolve_data_path(config.vectors));
  config.contextual_cls = absolute_or_empty(resolve_data_path(config.contextual_cls));
  config.contextual_tokens = absolute_or_empty(resolve_data_path(config.contextual_tokens));
  config.stopwords = absolute_or_empty(config.stopwords);

  const auto tweets = load_dataset(config.train_csv, true);
  const auto tokenized = tokenize(tweets, stop_words_from(config.stopwords));
  const auto labels = labels_of(tokenized);
  const SplitIndices parts = stratified_split(labels, config.heldout_fraction, config.seed);
  const auto train_labels = labels_at(labels, parts.train);
  const auto heldout_labels = labels_at(labels, parts.validation);

  TrainOutcome outcome;
  Checkpoint& ck = outcome.checkpoint;
  ck.model_kind = config.model;
  ck.representation = config.representation;
  ck.seed = config.seed;
  ck.heldout_fraction = config.heldout_fraction;
  ck.max_sequence_length = config.max_sequence_length;
  ck.stopwords = config.stopwords;
  ck.vectors = config.representation == Representation::static_vectors ? config.vectors : fs::path();
  ck.contextual_cls = config.representation == Representation::contextual ? config.contextual_cls : fs::path();
  ck.contextual_tokens = config.representation == Representation::contextual && config.model == ModelKind::bilstm
                             ? config.contextual_tokens
                             : fs::path();
  if (config.representation == Representation::bow) {
    std::vector<TokenizedTweet> train_part;
    train_part.reserve(parts.train.size());
    for (auto r : parts.train) train_part.push_back(tokenized[r]);
    ck.vocabulary = build_vocabulary(train_part, config.min_frequency);
  }

  const Features all = encode(ck.representation, ck.model_kind, ck.vocabulary, ck.max_sequence_length, tokenized,
                              {ck.vectors, ck.contextual_cls, ck.contextual_tokens});
  const Features train = subset(all, parts.train);

  TrainConfig neural;
  neural.batch_size = config.batch_size;
  neural.patience = config.patience;
  neural.validation_fraction = config.validation_fraction;
  neural.seed = config.seed;
  neural.max_epochs = config.max_epochs.value_or(100);

  switch (config.model) {
    case ModelKind::decision_tree:
      ck.model = train_decision_tree(train.bow, train_labels, TreeParams{config.max_depth, config.min_samples_split});
      break;
    case ModelKind::random_forest: {
      ForestParams params;
      params.n_trees = config.n_trees;
      params.features_per_split = config.features_per_split;
      params.seed = config.seed;
      params.tree = TreeParams{config.max_depth, config.min_samples_split};
      params.workers = config.workers;
      ck.model = train_random_forest(train.bow, train_labels, params);
      break;
    }
    case ModelKind::logistic_regression: {
      LogisticParams params;
      params.learning_rate = config.learning_rate.value_or(0.1);
      params.epochs = config.max_epochs.value_or(300);
      params.l2_lambda = config.l2_lambda;
      params.seed = config.seed;
      ck.model = train_logistic_regression(train.bow, train_labels, params, &outcome.logistic_loss_curve);
      break;
    }
    case ModelKind::softmax: {
      neural.learning_rate = config.learning_rate.value_or(0.05);
      neural.loss = LossKind::categorical_cross_entropy;
      auto trained = train_softmax(train.dense, train_labels, neural);
      ck.model = std::move(trained.model);
      outcome.report = std::move(trained.report);
      break;
    }
    case ModelKind::bilstm: {
      neural.learning_rate = config.learning_rate.value_or(0.01);
      neural.loss = LossKind::binary_cross_entropy;
      BiLstmShape shape{static_cast<Eigen::Index>(config.hidden_size), config.max_sequence_length};
      auto trained = train_bilstm(train.sequences, train_labels, neural, shape);
      ck.model = std::move(trained.model);
      outcome.report = std::move(trained.report);
      break;
    }
  }

  const auto train_scores = score_features(ck.model, train);
  const auto heldout_scores = score_features(ck.model, subset(all, parts.validation));
  outcome.train_metrics = evaluate_scores(train_scores, train_labels, config.threshold);
  outcome.heldout_metrics = evaluate_scores(heldout_scores, heldout_labels, config.threshold);

  std::ostringstream metrics;
  write_metrics_header(metrics);
  write_metrics_row(metrics, to_string(ck.model_kind), to_string(ck.representation), "train", outcome.train_metrics);
  write_metrics_row(metrics, to_string(ck.model_kind), to_string(ck.representation), "heldout",
                    outcome.heldout_metrics);

  std::ostringstream report;
  if (outcome.report) {
    outcome.report->write_csv(report);
  } else if (!outcome.logistic_loss_curve.empty()) {
    report << "epoch,train_loss,val_loss\n";
    for (std::size_t e = 0; e < outcome.logistic_loss_curve.size(); ++e) {
      report << e << ',' << format_double(outcome.logistic_loss_curve[e]) << ",\n";
    }
  }

  std::error_code ec;
  fs::create_directories(config.out, ec);
  if (ec) throw DataError("cannot create output directory " + config.out.string() + ": " + ec.message());
  ck.save(config.out / "model.ckpt");
  write_file(config.out / "metrics.csv", metrics.str());
  write_file(config.out / "config.txt", serialize_config(raw_config));
  if (!report.str().empty()) write_file(config.out / "train_report.csv", report.str());
  return outcome;
}

MetricsReport run_evaluate(const Checkpoint& checkpoint, const fs::path& dataset_csv, SplitChoice split,
                           double threshold, const ResourceOverrides& overrides, std::ostream& out) {
  const auto tweets = load_dataset(resolve_data_path(dataset_csv), true);
  const auto selected = select_split(tweets, split, checkpoint.seed, checkpoint.heldout_fraction);
  const auto scores = score_tweets(checkpoint, selected, overrides);
  const auto labels = tweet_labels(selected);
  const MetricsReport report = evaluate_scores(scores, labels, threshold);
  write_metrics_header(out);
  write_metrics_row(out, to_string(checkpoint.model_kind), to_string(checkpoint.representation), to_string(split),
                    report);
  return report;
}

bool dataset_has_labels(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path.string());
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  for (auto field : split(header, ',')) {
    if (trim(field) == "target") return true;
  }
  return false;
}

void run_predict(std::span<const Checkpoint> checkpoints, const fs::path& dataset_csv, double threshold,
                 const ResourceOverrides& overrides, std::ostream& out) {
  if (checkpoints.empty()) throw ConfigError("predict needs at least one checkpoint");
  const fs::path path = resolve_data_path(dataset_csv);
  const bool labeled = dataset_has_labels(path);
  const auto tweets = load_dataset(path, labeled);

  std::vector<std::string> header{"id", "text"};
  std::vector<std::vector<double>> scores;
  std::unordered_set<std::string> names;
  for (std::size_t k = 0; k < checkpoints.size(); ++k) {
    std::string name = checkpoints[k].name();
    if (!names.insert(name).second) name += "_" + std::to_string(k + 1);
    header.push_back(name + "_score");
    header.push_back(name + "_label");
    scores.push_back(score_tweets(checkpoints[k], tweets, overrides));
  }
  if (labeled) header.push_back("target");
  write_csv_row(out, header);
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    std::vector<std::string> row{tweets[i].id, tweets[i].raw_text};
    for (const auto& s : scores) {
      row.push_back(format_fixed(s[i], 6));
      row.push_back(s[i] >= threshold ? "1" : "0");
    }
    if (labeled) row.push_back(std::to_string(*tweets[i].label));
    write_csv_row(out, row);
  }
}

void run_export_submission(const Checkpoint& checkpoint, const fs::path& test_csv, double threshold,
                           const ResourceOverrides& overrides, std::ostream& out) {
  const auto tweets = load_dataset(resolve_data_path(test_csv), false);
  const auto scores = score_tweets(checkpoint, tweets, overrides);
  out << "id,target\n";
  for (std::size_t i = 0; i < tweets.size(); ++i) {
    out << csv_field(tweets[i].id) << ',' << (scores[i] >= threshold ? 1 : 0) << '\n';
  }
}

}  // namespace tweetgauge
