#include "tweetgauge/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "tweetgauge/error.hpp"
#include "tweetgauge/rng.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

// Generated from data/stopwords_en.txt at configure time.
extern const char* const kEnglishStopWordsText;

const StopWords& StopWords::english() {
  static const StopWords words = StopWords::parse(kEnglishStopWordsText);
  return words;
}

StopWords StopWords::parse(std::string_view text) {
  std::unordered_set<std::string> words;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (line.empty() || line.front() == '#') continue;
    words.emplace(line);
  }
  return StopWords(std::move(words));
}

StopWords StopWords::from_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open stop-word file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse(buffer.str());
}

std::vector<Tweet> parse_dataset(std::istream& in, bool has_labels, std::string_view source) {
  const CsvTable table = read_csv(in, source);
  const std::size_t id_col = table.column("id");
  const std::size_t text_col = table.column("text");
  const std::size_t target_col = table.column("target");
  const std::string where(source);
  if (id_col == CsvTable::npos || text_col == CsvTable::npos) {
    throw DataError(where + ": header must contain `id` and `text` columns");
  }
  if (has_labels && target_col == CsvTable::npos) {
    throw DataError(where + ": header has no `target` column");
  }

  std::vector<Tweet> tweets;
  tweets.reserve(table.rows.size());
  std::unordered_set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const std::string at = where + ": row " + std::to_string(r + 1) + " (line " +
                           std::to_string(table.line_numbers[r]) + ")";
    Tweet tweet{row[id_col], row[text_col], std::nullopt};
    if (!seen.insert(tweet.id).second) throw DataError(at + ": duplicate id `" + tweet.id + "`");
    if (has_labels) {
      const std::string_view target = trim(row[target_col]);
      if (target == "0") {
        tweet.label = 0;
      } else if (target == "1") {
        tweet.label = 1;
      } else {
        throw DataError(at + ": label `" + std::string(target) + "` is not 0 or 1");
      }
    }
    tweets.push_back(std::move(tweet));
  }
  return tweets;
}

std::vector<Tweet> load_dataset(const std::filesystem::path& path, bool has_labels) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open dataset: " + path.string());
  return parse_dataset(in, has_labels, path.string());
}

std::vector<std::string> preprocess(std::string_view raw_text, const StopWords& stop_words) {
  std::string normalized(raw_text);
  for (char& ch : normalized) {
    const auto byte = static_cast<unsigned char>(ch);
    if (byte >= 'A' && byte <= 'Z') {
      ch = static_cast<char>(byte - 'A' + 'a');
    } else if (!((byte >= 'a' && byte <= 'z') || (byte >= '0' && byte <= '9'))) {
      ch = ' ';
    }
  }
  std::vector<std::string> tokens;
  std::size_t pos = 0;
  while (pos < normalized.size()) {
    const auto start = normalized.find_first_not_of(' ', pos);
    if (start == std::string::npos) break;
    auto end = normalized.find(' ', start);
    if (end == std::string::npos) end = normalized.size();
    std::string_view word(normalized.data() + start, end - start);
    if (!stop_words.contains(word)) tokens.emplace_back(word);
    pos = end;
  }
  return tokens;
}

std::vector<TokenizedTweet> tokenize(std::span<const Tweet> tweets, const StopWords& stop_words) {
  std::vector<TokenizedTweet> out;
  out.reserve(tweets.size());
  for (const auto& tweet : tweets) {
    out.push_back({tweet.id, preprocess(tweet.raw_text, stop_words), tweet.label});
  }
  return out;
}

std::vector<int> labels_of(std::span<const TokenizedTweet> corpus) {
  std::vector<int> labels;
  labels.reserve(corpus.size());
  for (const auto& tweet : corpus) {
    if (!tweet.label) throw DataError("tweet `" + tweet.id + "` has no label");
    labels.push_back(*tweet.label);
  }
  return labels;
}

namespace {

std::vector<WordFrequency> rank(const std::unordered_map<std::string, std::size_t>& counts) {
  std::vector<WordFrequency> ranked(counts.begin(), counts.end());
  std::sort(ranked.begin(), ranked.end(), [](const WordFrequency& a, const WordFrequency& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  return ranked;
}

}  // namespace

CorpusStats compute_stats(std::span<const TokenizedTweet> corpus) {
  if (corpus.empty()) throw DataError("cannot compute statistics of an empty corpus");

  CorpusStats stats;
  stats.total_tweets = corpus.size();
  std::unordered_map<std::string, std::size_t> all_counts;
  std::unordered_map<std::string, std::size_t> positive_counts;
  std::unordered_map<std::string, std::size_t> negative_counts;
  std::vector<std::size_t> lengths;
  lengths.reserve(corpus.size());
  std::size_t total_tokens = 0;

  for (const auto& tweet : corpus) {
    if (!tweet.label) throw DataError("tweet `" + tweet.id + "` has no label");
    const bool positive = *tweet.label == 1;
    stats.total_positive += positive ? 1 : 0;
    auto& by_label = positive ? positive_counts : negative_counts;
    for (const auto& token : tweet.tokens) {
      ++all_counts[token];
      ++by_label[token];
    }
    const std::size_t length = tweet.tokens.size();
    lengths.push_back(length);
    total_tokens += length;
    auto& bucket = stats.length_histogram_by_label[length];
    (positive ? bucket.positive : bucket.negative) += 1;
  }

  stats.unique_words = all_counts.size();
  stats.unique_words_min_freq_2 = static_cast<std::size_t>(
      std::count_if(all_counts.begin(), all_counts.end(), [](const auto& kv) { return kv.second >= 2; }));

  std::sort(lengths.begin(), lengths.end());
  stats.min_length = lengths.front();
  stats.max_length = lengths.back();
  stats.median_length = static_cast<double>(lengths[(lengths.size() - 1) / 2]);
  stats.mean_length = static_cast<double>(total_tokens) / static_cast<double>(lengths.size());

  stats.top_words_positive = rank(positive_counts);
  stats.top_words_negative = rank(negative_counts);
  return stats;
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write " + path.string());
  return out;
}

void write_ranking(const std::filesystem::path& path, const std::vector<WordFrequency>& ranking,
                   std::size_t top_k) {
  auto out = open_output(path);
  out << "rank,word,frequency\n";
  for (std::size_t i = 0; i < ranking.size() && i < top_k; ++i) {
    out << (i + 1) << ',' << csv_field(ranking[i].first) << ',' << ranking[i].second << '\n';
  }
}

}  // namespace

void write_stats_report(const CorpusStats& stats, const std::filesystem::path& directory,
                        std::size_t top_k) {
  std::filesystem::create_directories(directory);
  {
    auto out = open_output(directory / "stats_counts.csv");
    out << "statistic,value\n"
        << "total_tweets," << stats.total_tweets << '\n'
        << "total_positive," << stats.total_positive << '\n'
        << "unique_words," << stats.unique_words << '\n'
        << "unique_words_min_freq_2," << stats.unique_words_min_freq_2 << '\n';
  }
  {
    auto out = open_output(directory / "stats_lengths.csv");
    out << "statistic,value\n"
        << "mean_length," << format_fixed(stats.mean_length, 4) << '\n'
        << "median_length," << format_double(stats.median_length) << '\n'
        << "max_length," << stats.max_length << '\n'
        << "min_length," << stats.min_length << '\n';
  }
  {
    auto out = open_output(directory / "length_histogram.csv");
    out << "length,positive,negative\n";
    for (const auto& [length, counts] : stats.length_histogram_by_label) {
      out << length << ',' << counts.positive << ',' << counts.negative << '\n';
    }
  }
  write_ranking(directory / "top_words_positive.csv", stats.top_words_positive, top_k);
  write_ranking(directory / "top_words_negative.csv", stats.top_words_negative, top_k);
}

SplitIndices stratified_split(std::span<const int> labels, double validation_fraction,
                              std::uint64_t seed) {
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    throw std::invalid_argument("validation fraction must lie in (0, 1)");
  }
  const std::size_t n = labels.size();
  if (n < 2) throw DataError("corpus too small to split: need at least 2 items");
  const auto n_validation =
      static_cast<std::size_t>(std::floor(validation_fraction * static_cast<double>(n)));
  if (n_validation < 1) {
    throw DataError("validation fraction " + format_double(validation_fraction) + " of " +
                    std::to_string(n) + " items yields an empty validation set");
  }

  std::map<int, std::vector<std::size_t>> strata;
  for (std::size_t i = 0; i < n; ++i) strata[labels[i]].push_back(i);

  // Largest-remainder apportionment of n_validation across strata.
  struct Share {
    int label;
    std::size_t quota;
    double remainder;
  };
  std::vector<Share> shares;
  std::size_t assigned = 0;
  for (const auto& [label, members] : strata) {
    const double exact =
        static_cast<double>(n_validation) * static_cast<double>(members.size()) / static_cast<double>(n);
    const auto quota = static_cast<std::size_t>(std::floor(exact));
    shares.push_back({label, quota, exact - static_cast<double>(quota)});
    assigned += quota;
  }
  std::vector<std::size_t> order(shares.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return shares[a].remainder > shares[b].remainder; });
  for (std::size_t k = 0; assigned < n_validation; k = (k + 1) % order.size()) {
    auto& share = shares[order[k]];
    if (share.quota < strata[share.label].size()) {
      ++share.quota;
      ++assigned;
    }
  }

  Rng rng(seed);
  std::vector<char> in_validation(n, 0);
  for (const auto& share : shares) {
    auto members = strata[share.label];
    rng.shuffle(members.begin(), members.end());
    for (std::size_t i = 0; i < share.quota; ++i) in_validation[members[i]] = 1;
  }

  SplitIndices split;
  split.validation.reserve(n_validation);
  split.train.reserve(n - n_validation);
  for (std::size_t i = 0; i < n; ++i) (in_validation[i] ? split.validation : split.train).push_back(i);
  return split;
}

CorpusSplit split_train_validation(std::span<const TokenizedTweet> corpus, double validation_fraction,
                                   std::uint64_t seed) {
  const auto labels = labels_of(corpus);
  const auto indices = stratified_split(labels, validation_fraction, seed);
  CorpusSplit split;
  for (auto i : indices.train) split.train.push_back(corpus[i]);
  for (auto i : indices.validation) split.validation.push_back(corpus[i]);
  return split;
}

}  // namespace tweetgauge
