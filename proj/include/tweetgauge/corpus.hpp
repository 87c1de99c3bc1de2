#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <utility>
#include <vector>

namespace tweetgauge {

/// One raw dataset row. `label` is 1 for a disaster tweet, 0 otherwise.
struct Tweet {
  std::string id;
  std::string raw_text;
  std::optional<int> label;
};

struct TokenizedTweet {
  std::string id;
  std::vector<std::string> tokens;
  std::optional<int> label;
};

/// A fixed stop-word set. The built-in list is the 179-word English list
/// shipped in data/stopwords_en.txt (compiled into the library).
class StopWords {
 public:
  StopWords() = default;
  explicit StopWords(std::unordered_set<std::string> words) : words_(std::move(words)) {}

  static const StopWords& english();
  /// One word per line; blank lines and lines starting with '#' are skipped.
  static StopWords from_file(const std::filesystem::path& path);
  static StopWords parse(std::string_view text);

  bool contains(std::string_view word) const { return words_.contains(std::string(word)); }
  std::size_t size() const { return words_.size(); }

 private:
  std::unordered_set<std::string> words_;
};

/// Reads an `id,keyword,location,text[,target]` CSV. Only `id`, `text` and
/// (when `has_labels`) `target` are used.
std::vector<Tweet> load_dataset(const std::filesystem::path& path, bool has_labels);
std::vector<Tweet> parse_dataset(std::istream& in, bool has_labels, std::string_view source);

/// Lowercase, map everything outside [a-z0-9] to a space, split, and drop
/// stop words. Total: any byte string is accepted.
std::vector<std::string> preprocess(std::string_view raw_text,
                                    const StopWords& stop_words = StopWords::english());

std::vector<TokenizedTweet> tokenize(std::span<const Tweet> tweets,
                                     const StopWords& stop_words = StopWords::english());

struct LabelCounts {
  std::size_t positive = 0;
  std::size_t negative = 0;

  bool operator==(const LabelCounts&) const = default;
};

using WordFrequency = std::pair<std::string, std::size_t>;

struct CorpusStats {
  std::size_t total_tweets = 0;
  std::size_t total_positive = 0;
  std::size_t unique_words = 0;
  std::size_t unique_words_min_freq_2 = 0;
  double mean_length = 0.0;
  double median_length = 0.0;
  std::size_t max_length = 0;
  std::size_t min_length = 0;
  /// Keyed by exact token count.
  std::map<std::size_t, LabelCounts> length_histogram_by_label;
  /// Full ranking, frequency descending then word ascending.
  std::vector<WordFrequency> top_words_positive;
  std::vector<WordFrequency> top_words_negative;
};

/// Requires a non-empty, fully labeled corpus. Median is the lower middle
/// element for even counts.
CorpusStats compute_stats(std::span<const TokenizedTweet> corpus);

/// Writes stats_counts.csv, stats_lengths.csv, length_histogram.csv,
/// top_words_positive.csv and top_words_negative.csv into `directory`.
void write_stats_report(const CorpusStats& stats, const std::filesystem::path& directory,
                        std::size_t top_k = 50);

/// Indices of a stratified partition. Both lists are in ascending order.
struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> validation;
};

/// Stratified, seeded partition of `labels` with floor(fraction * n)
/// validation items apportioned across labels by largest remainder.
SplitIndices stratified_split(std::span<const int> labels, double validation_fraction,
                              std::uint64_t seed);

struct CorpusSplit {
  std::vector<TokenizedTweet> train;
  std::vector<TokenizedTweet> validation;
};

CorpusSplit split_train_validation(std::span<const TokenizedTweet> corpus,
                                   double validation_fraction, std::uint64_t seed);

/// Labels of a fully labeled corpus; throws DataError on an unlabeled row.
std::vector<int> labels_of(std::span<const TokenizedTweet> corpus);

}  // namespace tweetgauge
