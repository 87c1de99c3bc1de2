#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace tweetgauge {

/// Static word vectors. Storage is single precision, one contiguous column
/// per word.
class WordEmbeddingTable {
 public:
  explicit WordEmbeddingTable(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }

  /// Returns false (and keeps the existing entry) when `word` is present.
  bool insert(std::string word, std::span<const float> vector);
  std::optional<Eigen::Map<const Eigen::VectorXf>> find(std::string_view word) const;
  bool contains(std::string_view word) const { return index_.contains(std::string(word)); }

 private:
  std::size_t dimension_;
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<float> data_;
};

/// Reads `word v1 ... vd` lines. The dimension comes from the first record;
/// a leading `<count> <dim>` header (word2vec/fastText text files) is
/// skipped. Duplicate words keep their first vector. When `keep` is given,
/// only those words are stored; every line is still checked for arity.
WordEmbeddingTable load_word_vectors(const std::filesystem::path& path,
                                     const std::unordered_set<std::string>* keep = nullptr);
WordEmbeddingTable parse_word_vectors(std::istream& in, std::string_view source,
                                      const std::unordered_set<std::string>* keep = nullptr);

enum class EmbeddingSource { mean_pooled, contextual_cls };

struct TweetEmbedding {
  Eigen::VectorXd vector;
  EmbeddingSource source = EmbeddingSource::mean_pooled;
  /// Tokens found in the table; 0 means `vector` is the zero fallback.
  std::size_t coverage = 0;
};

/// Mean of the vectors of in-table tokens; OOV tokens are skipped.
TweetEmbedding mean_pool(std::span<const std::string> tokens, const WordEmbeddingTable& table);

/// In-table token vectors as columns, in order, truncated to `max_length`.
/// Has zero columns when no token is in the table.
Eigen::MatrixXf token_sequence(std::span<const std::string> tokens, const WordEmbeddingTable& table,
                               std::size_t max_length);

/// Per-tweet [CLS] vectors and optional per-token vector sequences produced
/// by the offline contextual exporter.
class ContextualEmbeddingStore {
 public:
  explicit ContextualEmbeddingStore(std::size_t dimension = 0) : dimension_(dimension) {}

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return cls_.size(); }
  bool has_token_sequences() const { return !tokens_.empty(); }
  bool contains(std::string_view id) const { return cls_.contains(std::string(id)); }
  bool has_tokens(std::string_view id) const { return tokens_.contains(std::string(id)); }

  /// Throws NotFoundError for an unknown id.
  const Eigen::VectorXd& cls(std::string_view id) const;
  TweetEmbedding cls_embedding(std::string_view id) const;
  /// Columns are token vectors. Throws NotFoundError for an unknown id.
  const Eigen::MatrixXf& tokens(std::string_view id) const;

  void add_cls(std::string id, Eigen::VectorXd vector);
  void add_tokens(std::string id, Eigen::MatrixXf sequence);

  /// Ids in insertion order.
  const std::vector<std::string>& ids() const { return ids_; }

 private:
  std::size_t dimension_;
  std::vector<std::string> ids_;
  std::unordered_map<std::string, Eigen::VectorXd> cls_;
  std::unordered_map<std::string, Eigen::MatrixXf> tokens_;
};

ContextualEmbeddingStore load_contextual_store(const std::filesystem::path& cls_path,
                                               const std::optional<std::filesystem::path>& tokens_path = {});
ContextualEmbeddingStore parse_contextual_store(std::istream& cls_in, std::istream* tokens_in,
                                                std::string_view source);

/// `#dim=<d>` then `id<TAB>v1,...,vd` per tweet, 6 decimals per value.
void write_contextual_cls(std::ostream& out, const ContextualEmbeddingStore& store);
/// `#dim=<d>` then `id<TAB>n<TAB>v1,...,vd;...` per tweet.
void write_contextual_tokens(std::ostream& out, const ContextualEmbeddingStore& store);

}  // namespace tweetgauge
