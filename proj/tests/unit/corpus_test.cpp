#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "tweetgauge/corpus.hpp"
#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

using namespace tweetgauge;

namespace {

std::string join(const std::vector<std::string>& tokens) {
  std::string out;
  for (const auto& t : tokens) out += (out.empty() ? "" : " ") + t;
  return out;
}

TokenizedTweet tt(std::string id, std::vector<std::string> tokens, int label) {
  return {std::move(id), std::move(tokens), label};
}

}  // namespace

TEST(Preprocess, RockyFire) {
  const std::vector<std::string> expected{"rockyfire", "update", "california", "hwy",  "20",   "closed",   "directions",
                                          "due",       "lake",   "county",     "fire", "cafire", "wildfires"};
  EXPECT_EQ(preprocess("#RockyFire Update => California Hwy. 20 closed in both directions due to Lake County fire - "
                       "#CAfire #wildfires"),
            expected);
}

TEST(Preprocess, AirplaneAccident) {
  const std::vector<std::string> expected{"theatlantic", "might", "killed", "airplane",
                                          "accident",    "night", "car",    "wreck"};
  EXPECT_EQ(preprocess("@TheAtlantic That or they might be killed in an airplane accident in the night a car wreck!"),
            expected);
}

TEST(Preprocess, EmptyAndUrl) {
  EXPECT_TRUE(preprocess("").empty());
  // "t" is in the stop-word list; the remaining fragments survive.
  EXPECT_EQ(preprocess("http://t.co/AbC1"), (std::vector<std::string>{"http", "co", "abc1"}));
  EXPECT_EQ(preprocess("caf\xC3\xA9 r\xC3\xA9sum\xC3\xA9"), (std::vector<std::string>{"caf", "r", "sum"}));
}

TEST(Preprocess, BuiltInListSize) { EXPECT_EQ(StopWords::english().size(), 179u); }

TEST(Preprocess, RandomStringProperties) {
  std::mt19937 gen(5);
  const std::string alphabet = "abcXYZ019 .,!#@'\"-_\t\n\xC3\xA9theandIS";
  std::uniform_int_distribution<std::size_t> pick(0, alphabet.size() - 1);
  std::uniform_int_distribution<int> length(0, 60);
  for (int trial = 0; trial < 500; ++trial) {
    std::string s;
    for (int i = length(gen); i > 0; --i) s += alphabet[pick(gen)];
    const auto tokens = preprocess(s);
    for (const auto& tok : tokens) {
      EXPECT_FALSE(tok.empty());
      EXPECT_FALSE(StopWords::english().contains(tok));
      EXPECT_TRUE(std::all_of(tok.begin(), tok.end(),
                              [](char c) { return (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'); }));
    }
    EXPECT_EQ(preprocess(join(tokens)), tokens);
  }
}

TEST(StopWordsFile, ParseSkipsComments) {
  const StopWords sw = StopWords::parse("# list\nfoo\n\n bar \n");
  EXPECT_EQ(sw.size(), 2u);
  EXPECT_TRUE(sw.contains("bar"));
  EXPECT_EQ(preprocess("Foo baz BAR", sw), std::vector<std::string>{"baz"});
}

TEST(Dataset, QuotedCommaFixture) {
  std::istringstream in(
      "id,keyword,location,text,target\n"
      "1,,,Our Deeds are the Reason,1\n"
      "4,fire,\"Lagos, NG\",\"Forest fire near La Ronge, Sask. Canada\",1\n"
      "5,,,All residents asked to 'shelter in place',0\n");
  const auto tweets = parse_dataset(in, true, "fixture");
  ASSERT_EQ(tweets.size(), 3u);
  EXPECT_EQ(tweets[1].id, "4");
  EXPECT_EQ(tweets[1].raw_text, "Forest fire near La Ronge, Sask. Canada");
  EXPECT_EQ(tweets[2].raw_text, "All residents asked to 'shelter in place'");
  EXPECT_EQ(*tweets[0].label, 1);
  EXPECT_EQ(*tweets[2].label, 0);
}

TEST(Dataset, HeaderOnlyAndTestMode) {
  std::istringstream empty("id,keyword,location,text,target\n");
  EXPECT_TRUE(parse_dataset(empty, true, "e").empty());
  std::istringstream test("id,keyword,location,text\n7,,,hello\n");
  const auto tweets = parse_dataset(test, false, "t");
  ASSERT_EQ(tweets.size(), 1u);
  EXPECT_FALSE(tweets[0].label.has_value());
}

TEST(Dataset, Errors) {
  std::istringstream bad_label("id,text,target\n1,a,2\n");
  EXPECT_THROW(parse_dataset(bad_label, true, "x"), DataError);
  std::istringstream dup("id,text,target\n1,a,0\n1,b,1\n");
  EXPECT_THROW(parse_dataset(dup, true, "x"), DataError);
  std::istringstream no_target("id,text\n1,a\n");
  EXPECT_THROW(parse_dataset(no_target, true, "x"), DataError);
  try {
    load_dataset("/nonexistent/train.csv", true);
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("/nonexistent/train.csv"), std::string::npos);
  }
}

TEST(Stats, Singleton) {
  const std::vector<TokenizedTweet> corpus{tt("1", {"a", "b"}, 1)};
  const CorpusStats s = compute_stats(corpus);
  EXPECT_EQ(s.total_tweets, 1u);
  EXPECT_EQ(s.total_positive, 1u);
  EXPECT_EQ(s.unique_words, 2u);
  EXPECT_EQ(s.unique_words_min_freq_2, 0u);
  EXPECT_EQ(s.mean_length, 2.0);
  EXPECT_EQ(s.median_length, 2.0);
  EXPECT_EQ(s.max_length, 2u);
  EXPECT_EQ(s.min_length, 2u);
}

TEST(Stats, MatchesCountingOracle) {
  const std::vector<TokenizedTweet> corpus{tt("1", {"fire", "near", "fire"}, 1), tt("2", {"love", "it"}, 0),
                                           tt("3", {"flood", "fire", "town", "now"}, 1), tt("4", {"near"}, 0)};
  const CorpusStats s = compute_stats(corpus);

  std::map<std::string, std::size_t> counts;
  std::map<std::string, std::size_t> pos_counts;
  std::map<std::string, std::size_t> neg_counts;
  std::vector<std::size_t> lengths;
  std::size_t positives = 0;
  for (const auto& t : corpus) {
    lengths.push_back(t.tokens.size());
    positives += *t.label == 1;
    for (const auto& w : t.tokens) {
      ++counts[w];
      ++(*t.label == 1 ? pos_counts : neg_counts)[w];
    }
  }
  std::size_t freq2 = 0;
  for (const auto& [w, c] : counts) freq2 += c >= 2;
  std::sort(lengths.begin(), lengths.end());
  double total_length = 0;
  for (auto l : lengths) total_length += static_cast<double>(l);

  EXPECT_EQ(s.total_tweets, 4u);
  EXPECT_EQ(s.total_positive, positives);
  EXPECT_EQ(s.unique_words, counts.size());
  EXPECT_EQ(s.unique_words_min_freq_2, freq2);
  EXPECT_DOUBLE_EQ(s.mean_length, total_length / 4.0);
  EXPECT_EQ(s.median_length, static_cast<double>(lengths[1]));
  EXPECT_EQ(s.max_length, lengths.back());
  EXPECT_EQ(s.min_length, lengths.front());
  std::size_t histogram_total = 0;
  for (const auto& [len, c] : s.length_histogram_by_label) histogram_total += c.positive + c.negative;
  EXPECT_EQ(histogram_total, s.total_tweets);
  EXPECT_EQ(s.length_histogram_by_label.at(3).positive, 1u);
  ASSERT_FALSE(s.top_words_positive.empty());
  EXPECT_EQ(s.top_words_positive[0], (WordFrequency{"fire", pos_counts["fire"]}));
  EXPECT_EQ(s.top_words_positive[1].first, "flood");  // ties broken lexicographically
  EXPECT_EQ(s.top_words_negative.size(), neg_counts.size());
}

TEST(Stats, Errors) {
  EXPECT_THROW(compute_stats({}), DataError);
  const std::vector<TokenizedTweet> unlabeled{{"1", {"a"}, std::nullopt}};
  EXPECT_THROW(compute_stats(unlabeled), DataError);
}

TEST(Stats, ReportFiles) {
  const auto dir = std::filesystem::temp_directory_path() / "tweetgauge_stats_report";
  std::filesystem::remove_all(dir);
  const std::vector<TokenizedTweet> corpus{tt("1", {"fire", "near"}, 1), tt("2", {"love"}, 0)};
  write_stats_report(compute_stats(corpus), dir, 1);
  for (const char* name : {"stats_counts.csv", "stats_lengths.csv", "length_histogram.csv", "top_words_positive.csv",
                           "top_words_negative.csv"}) {
    EXPECT_TRUE(std::filesystem::exists(dir / name)) << name;
  }
  std::ifstream in(dir / "top_words_positive.csv");
  const CsvTable t = read_csv(in, "top");
  EXPECT_EQ(t.rows.size(), 1u);
}

TEST(Split, ArithmeticSize) {
  std::vector<int> labels(7613, 0);
  for (std::size_t i = 0; i < 3271; ++i) labels[i * 2] = 1;
  const SplitIndices s = stratified_split(labels, 0.01, 7);
  EXPECT_EQ(s.validation.size(), 76u);
  EXPECT_EQ(s.train.size(), 7537u);
}

TEST(Split, TwoTweets) {
  const std::vector<int> labels{0, 1};
  const SplitIndices s = stratified_split(labels, 0.5, 3);
  ASSERT_EQ(s.train.size(), 1u);
  ASSERT_EQ(s.validation.size(), 1u);
  EXPECT_NE(labels[s.train[0]], labels[s.validation[0]]);
}

TEST(Split, PartitionAndStratificationProperties) {
  std::mt19937 gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 300;
    std::vector<int> labels(n);
    for (auto& y : labels) y = static_cast<int>(gen() % 2);
    const double fraction = 0.01 + 0.98 * (gen() % 1000) / 1000.0;
    if (static_cast<std::size_t>(fraction * static_cast<double>(n)) < 1) continue;
    const std::uint64_t seed = gen();
    const SplitIndices s = stratified_split(labels, fraction, seed);
    std::vector<std::size_t> all = s.train;
    all.insert(all.end(), s.validation.begin(), s.validation.end());
    std::sort(all.begin(), all.end());
    for (std::size_t i = 0; i < n; ++i) ASSERT_EQ(all[i], i);
    EXPECT_TRUE(std::is_sorted(s.train.begin(), s.train.end()));
    EXPECT_EQ(s.validation.size(), static_cast<std::size_t>(fraction * static_cast<double>(n)));
    std::size_t pos_total = std::count(labels.begin(), labels.end(), 1);
    std::size_t pos_val = 0;
    for (auto i : s.validation) pos_val += labels[i];
    const double proportional =
        static_cast<double>(pos_total) * static_cast<double>(s.validation.size()) / static_cast<double>(n);
    EXPECT_LE(std::abs(static_cast<double>(pos_val) - proportional), 1.0);
    const SplitIndices again = stratified_split(labels, fraction, seed);
    EXPECT_EQ(again.train, s.train);
    EXPECT_EQ(again.validation, s.validation);
  }
}

TEST(Split, Errors) {
  const std::vector<int> one{1};
  EXPECT_THROW(stratified_split(one, 0.5, 1), DataError);
  const std::vector<int> labels{0, 1, 0, 1};
  EXPECT_ANY_THROW(stratified_split(labels, 1.5, 1));
  EXPECT_ANY_THROW(stratified_split(labels, 0.1, 1));
}

TEST(Split, CorpusWrapper) {
  std::vector<TokenizedTweet> corpus;
  for (int i = 0; i < 20; ++i) corpus.push_back(tt(std::to_string(i), {"w"}, i % 2));
  const CorpusSplit s = split_train_validation(corpus, 0.25, 9);
  EXPECT_EQ(s.validation.size(), 5u);
  EXPECT_EQ(s.train.size(), 15u);
  std::set<std::string> ids;
  for (const auto& t : s.train) ids.insert(t.id);
  for (const auto& t : s.validation) EXPECT_FALSE(ids.contains(t.id));
}
