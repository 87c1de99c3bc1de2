#include <gtest/gtest.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "tweetgauge/embeddings.hpp"
#include "tweetgauge/error.hpp"

using namespace tweetgauge;

namespace {

WordEmbeddingTable table_of(const char* text) {
  std::istringstream in(text);
  return parse_word_vectors(in, "fixture");
}

}  // namespace

TEST(WordVectors, MinimalTable) {
  const auto table = table_of("a 1 0\nb 0 1\n");
  EXPECT_EQ(table.dimension(), 2u);
  EXPECT_EQ(table.size(), 2u);
  EXPECT_EQ(*table.find("b"), Eigen::Vector2f(0, 1));
  EXPECT_FALSE(table.find("z").has_value());
}

TEST(WordVectors, MalformedComponentNamesLine) {
  try {
    table_of("c 1 two 3\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos);
  }
}

TEST(WordVectors, ArityAndDuplicates) {
  try {
    table_of("a 1 0\nb 1 0 0\n");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  const auto table = table_of("a 1 0\na 5 5\n");
  EXPECT_EQ(table.size(), 1u);
  EXPECT_EQ(*table.find("a"), Eigen::Vector2f(1, 0));
  EXPECT_THROW(table_of("a 1 nan\n"), DataError);
  EXPECT_THROW(load_word_vectors("/nonexistent/glove.txt"), DataError);
}

TEST(WordVectors, HeaderAndKeepFilter) {
  const auto table = table_of("3 2\na 1 0\nb 0 1\nc 1 1\n");
  EXPECT_EQ(table.size(), 3u);
  std::istringstream in("a 1 0\nb 0 1\nc 1 1\n");
  const std::unordered_set<std::string> keep{"b"};
  const auto filtered = parse_word_vectors(in, "fixture", &keep);
  EXPECT_EQ(filtered.size(), 1u);
  EXPECT_TRUE(filtered.contains("b"));
}

TEST(MeanPool, Examples) {
  const auto table = table_of("a 1 0\nb 0 1\n");
  const std::vector<std::string> just_a{"a"};
  EXPECT_EQ(mean_pool(just_a, table).vector, Eigen::Vector2d(1, 0));
  const std::vector<std::string> ab{"a", "b"};
  EXPECT_EQ(mean_pool(ab, table).vector, Eigen::Vector2d(0.5, 0.5));
  const std::vector<std::string> azb{"a", "z", "b"};
  const TweetEmbedding e = mean_pool(azb, table);
  EXPECT_EQ(e.vector, (Eigen::Vector2d(1, 0) + Eigen::Vector2d(0, 1)) / 2.0);
  EXPECT_EQ(e.coverage, 2u);
  const std::vector<std::string> oov{"z", "y"};
  const TweetEmbedding zero = mean_pool(oov, table);
  EXPECT_EQ(zero.coverage, 0u);
  EXPECT_EQ(zero.vector, Eigen::Vector2d::Zero());
  EXPECT_EQ(zero.source, EmbeddingSource::mean_pooled);
}

TEST(MeanPool, Properties) {
  std::mt19937 gen(9);
  std::normal_distribution<float> normal;
  WordEmbeddingTable table(5);
  std::vector<std::string> words;
  for (int w = 0; w < 12; ++w) {
    std::vector<float> v(5);
    for (auto& x : v) x = normal(gen);
    words.push_back("w" + std::to_string(w));
    table.insert(words.back(), v);
  }
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<std::string> tokens;
    for (int i = static_cast<int>(gen() % 8); i > 0; --i) tokens.push_back("w" + std::to_string(gen() % 15));
    const TweetEmbedding e = mean_pool(tokens, table);
    EXPECT_EQ(e.vector.size(), 5);
    auto shuffled = tokens;
    std::shuffle(shuffled.begin(), shuffled.end(), gen);
    EXPECT_LT((mean_pool(shuffled, table).vector - e.vector).norm(), 1e-6);
    auto doubled = tokens;
    doubled.insert(doubled.end(), tokens.begin(), tokens.end());
    EXPECT_LT((mean_pool(doubled, table).vector - e.vector).norm(), 1e-6);
    double max_norm = 0;
    for (const auto& t : tokens) {
      if (auto v = table.find(t)) max_norm = std::max(max_norm, v->cast<double>().norm());
    }
    EXPECT_LE(e.vector.norm(), max_norm + 1e-9);
  }
}

TEST(TokenSequence, SkipsOovAndTruncates) {
  const auto table = table_of("a 1 0\nb 0 1\n");
  const std::vector<std::string> tokens{"a", "z", "b", "a"};
  const Eigen::MatrixXf seq = token_sequence(tokens, table, 2);
  ASSERT_EQ(seq.cols(), 2);
  EXPECT_EQ(seq.col(1), Eigen::Vector2f(0, 1));
  const std::vector<std::string> none{"z"};
  EXPECT_EQ(token_sequence(none, table, 32).cols(), 0);
}

TEST(Contextual, ParseAndLookup) {
  std::istringstream cls("#dim=3\n1\t0.5,0.25,-1\n7\t1,2,3\n");
  std::istringstream tokens("#dim=3\n1\t2\t1,0,0;0,1,0\n");
  const auto store = parse_contextual_store(cls, &tokens, "fixture");
  EXPECT_EQ(store.dimension(), 3u);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.cls("1"), Eigen::Vector3d(0.5, 0.25, -1));
  EXPECT_EQ(store.cls_embedding("7").source, EmbeddingSource::contextual_cls);
  EXPECT_EQ(store.tokens("1").cols(), 2);
  EXPECT_THROW(store.cls("missing"), NotFoundError);
  EXPECT_THROW(store.tokens("7"), NotFoundError);
}

TEST(Contextual, FormatErrors) {
  auto parse = [](const char* cls_text, const char* tokens_text) {
    std::istringstream cls(cls_text);
    std::istringstream tokens(tokens_text ? tokens_text : "");
    return parse_contextual_store(cls, tokens_text ? &tokens : nullptr, "fixture");
  };
  EXPECT_THROW(parse("1\t1,2\n", nullptr), DataError);                      // no header
  EXPECT_THROW(parse("#dim=2\n1\t1,2\n1\t3,4\n", nullptr), DataError);      // duplicate id
  EXPECT_THROW(parse("#dim=2\n1\t1,2,3\n", nullptr), DataError);            // dimension
  EXPECT_THROW(parse("#dim=2\n1\t1,x\n", nullptr), DataError);              // numeric
  EXPECT_THROW(parse("#dim=2\n1\t1,2\n", "#dim=2\n2\t1\t1,2\n"), DataError);  // id lacks cls
  EXPECT_THROW(parse("#dim=2\n1\t1,2\n", "#dim=2\n1\t2\t1,2\n"), DataError);  // count mismatch
  EXPECT_THROW(parse("#dim=2\n1\t1,2\n", "#dim=2\n1\t0\t\n"), DataError);     // empty sequence
  EXPECT_THROW(parse("#dim=2\n1\t1,2\n", "#dim=3\n1\t1\t1,2,3\n"), DataError);
}

TEST(Contextual, RoundTripSixDecimals) {
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  ContextualEmbeddingStore store(768);
  for (int id = 0; id < 2; ++id) {
    Eigen::VectorXd v(768);
    for (auto& x : v) x = u(gen);
    store.add_cls(std::to_string(id), v);
    Eigen::MatrixXf seq(768, 3 + id);
    for (Eigen::Index k = 0; k < seq.size(); ++k) seq.data()[k] = static_cast<float>(u(gen));
    store.add_tokens(std::to_string(id), seq);
  }
  std::stringstream cls_out;
  std::stringstream tokens_out;
  write_contextual_cls(cls_out, store);
  write_contextual_tokens(tokens_out, store);
  EXPECT_EQ(cls_out.str().substr(0, 9), "#dim=768\n");
  const auto back = parse_contextual_store(cls_out, &tokens_out, "round trip");
  EXPECT_EQ(back.size(), 2u);
  for (const auto& id : store.ids()) {
    EXPECT_LE((back.cls(id) - store.cls(id)).cwiseAbs().maxCoeff(), 5e-7);
    EXPECT_LE((back.tokens(id) - store.tokens(id)).cwiseAbs().maxCoeff(), 1e-6);
  }
}
