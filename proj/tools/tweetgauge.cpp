#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tweetgauge/corpus.hpp"
#include "tweetgauge/error.hpp"
#include "tweetgauge/experiment.hpp"

namespace fs = std::filesystem;
using namespace tweetgauge;

namespace {

struct ScoringFlags {
  std::string representation;
  std::string model;
  std::string vectors;
  std::string contextual_cls;
  std::string contextual_tokens;
  std::string stopwords;
  double threshold = 0.5;
  std::string out;

  ResourceOverrides overrides() const { return {vectors, contextual_cls, contextual_tokens, stopwords}; }
};

void add_scoring_flags(CLI::App& cmd, ScoringFlags& flags) {
  cmd.add_option("--representation", flags.representation, "Expected representation; must match the checkpoint");
  cmd.add_option("--model", flags.model, "Expected model; must match the checkpoint");
  cmd.add_option("--vectors", flags.vectors, "Static word vector file (replaces the recorded path)");
  cmd.add_option("--contextual-cls", flags.contextual_cls, "Contextual [CLS] vector file");
  cmd.add_option("--contextual-tokens", flags.contextual_tokens, "Contextual token sequence file");
  cmd.add_option("--stopwords", flags.stopwords, "Stop-word list, one word per line");
  cmd.add_option("--threshold", flags.threshold, "Predict positive when score >= threshold")
      ->check(CLI::Range(0.0, 1.0));
  cmd.add_option("--out", flags.out, "Output CSV file (default: stdout)");
}

Checkpoint load_checked(const fs::path& path, const ScoringFlags& flags) {
  Checkpoint checkpoint = Checkpoint::load(path);
  if (!flags.representation.empty() &&
      parse_representation(flags.representation) != checkpoint.representation) {
    throw ConfigError(path.string() + " was trained on the " + std::string(to_string(checkpoint.representation)) +
                      " representation, not " + flags.representation);
  }
  if (!flags.model.empty() && parse_model_kind(flags.model) != checkpoint.model_kind) {
    throw ConfigError(path.string() + " holds a " + std::string(to_string(checkpoint.model_kind)) +
                      " model, not " + flags.model);
  }
  return checkpoint;
}

template <class Fn>
void with_output(const std::string& out_path, Fn&& fn) {
  if (out_path.empty()) {
    fn(std::cout);
    return;
  }
  std::ostringstream buffer;
  fn(buffer);
  const fs::path path(out_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  out << buffer.str();
}

int run(int argc, char** argv) {
  CLI::App app{"Disaster tweet classification experiments"};
  app.require_subcommand(1);

  // stats
  auto* stats = app.add_subcommand("stats", "Corpus statistics and ranked word frequencies");
  std::string stats_data = "train.csv";
  std::string stats_out = "stats";
  std::string stats_stopwords;
  std::size_t top_k = 50;
  stats->add_option("dataset", stats_data, "Labeled training CSV (relative paths fall back to $TWEETGAUGE_DATA_DIR)");
  stats->add_option("--out", stats_out, "Output directory");
  stats->add_option("--stopwords", stats_stopwords, "Stop-word list, one word per line");
  stats->add_option("--top-k", top_k, "Rows in each top-words table");

  // train
  auto* train = app.add_subcommand("train", "Train one model and write a checkpoint, metrics and loss curves");
  std::string config_path;
  train->add_option("--config", config_path, "Experiment config (`key = value` lines)");
  std::map<std::string, std::string> overrides;
  for (std::string_view key : config_keys()) {
    std::string names = "--" + std::string(key);
    std::string dashed(key);
    std::replace(dashed.begin(), dashed.end(), '_', '-');
    if (dashed != key) names += ",--" + dashed;
    train->add_option_function<std::string>(
        names, [&overrides, k = std::string(key)](const std::string& v) { overrides[k] = v; },
        "Overrides `" + std::string(key) + "` from the config");
  }

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a labeled dataset split");
  std::string eval_checkpoint;
  std::string eval_data = "train.csv";
  std::string split = "heldout";
  ScoringFlags eval_flags;
  evaluate->add_option("checkpoint", eval_checkpoint, "Checkpoint file")->required();
  evaluate->add_option("dataset", eval_data, "Labeled CSV");
  evaluate->add_option("--split", split, "train, heldout or all (the held-out partition recorded in the checkpoint)");
  add_scoring_flags(*evaluate, eval_flags);

  // predict
  auto* predict = app.add_subcommand("predict", "Per-tweet predictions from one or two checkpoints side by side");
  std::vector<std::string> predict_checkpoints;
  std::string predict_data;
  ScoringFlags predict_flags;
  predict->add_option("checkpoints", predict_checkpoints, "One or two checkpoint files")->required()->expected(1, 2);
  predict->add_option("--data", predict_data, "Dataset CSV; a `target` column is echoed when present")->required();
  add_scoring_flags(*predict, predict_flags);

  // export-submission
  auto* submit = app.add_subcommand("export-submission", "Write an `id,target` submission file");
  std::string submit_checkpoint;
  std::string submit_data = "test.csv";
  ScoringFlags submit_flags;
  submit_flags.out = "submission.csv";
  submit->add_option("checkpoint", submit_checkpoint, "Checkpoint file")->required();
  submit->add_option("dataset", submit_data, "Unlabeled test CSV");
  add_scoring_flags(*submit, submit_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (stats->parsed()) {
    const auto tweets = load_dataset(resolve_data_path(stats_data), true);
    const StopWords stop_words = stats_stopwords.empty() ? StopWords::english() : StopWords::from_file(stats_stopwords);
    const auto corpus = tokenize(tweets, stop_words);
    const CorpusStats s = compute_stats(corpus);
    write_stats_report(s, stats_out, top_k);
    std::cout << "total_tweets " << s.total_tweets << "\npositive " << s.total_positive << "\nunique_words "
              << s.unique_words << "\nunique_words_min_freq_2 " << s.unique_words_min_freq_2 << "\nmin_length "
              << s.min_length << "\nmax_length " << s.max_length << '\n';
  } else if (train->parsed()) {
    ExperimentConfig config = config_path.empty() ? ExperimentConfig{} : load_config(config_path);
    for (const auto& [key, value] : overrides) set_config_value(config, key, value);
    const TrainOutcome outcome = run_train(config);
    std::cout << "train auc " << outcome.train_metrics.auc << " acc " << outcome.train_metrics.accuracy
              << "\nheldout auc " << outcome.heldout_metrics.auc << " acc " << outcome.heldout_metrics.accuracy
              << "\nwrote " << (config.out / "model.ckpt").string() << '\n';
  } else if (evaluate->parsed()) {
    const SplitChoice which = parse_split(split);
    const Checkpoint checkpoint = load_checked(eval_checkpoint, eval_flags);
    with_output(eval_flags.out, [&](std::ostream& out) {
      run_evaluate(checkpoint, eval_data, which, eval_flags.threshold, eval_flags.overrides(), out);
    });
  } else if (predict->parsed()) {
    std::vector<Checkpoint> checkpoints;
    for (const auto& path : predict_checkpoints) checkpoints.push_back(load_checked(path, predict_flags));
    with_output(predict_flags.out, [&](std::ostream& out) {
      run_predict(checkpoints, predict_data, predict_flags.threshold, predict_flags.overrides(), out);
    });
  } else if (submit->parsed()) {
    const Checkpoint checkpoint = load_checked(submit_checkpoint, submit_flags);
    with_output(submit_flags.out, [&](std::ostream& out) {
      run_export_submission(checkpoint, submit_data, submit_flags.threshold, submit_flags.overrides(), out);
    });
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
