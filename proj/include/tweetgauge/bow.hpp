#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "tweetgauge/corpus.hpp"

namespace tweetgauge {

/// Word -> dense index map over words seen at least `min_frequency` times.
/// Indices follow lexicographic word order.
class Vocabulary {
 public:
  Vocabulary() = default;
  /// `words` must be strictly increasing.
  Vocabulary(std::vector<std::string> words, std::size_t min_frequency);

  std::size_t size() const { return words_.size(); }
  bool empty() const { return words_.empty(); }
  std::size_t min_frequency() const { return min_frequency_; }
  std::optional<std::size_t> index_of(std::string_view word) const;
  const std::string& word(std::size_t index) const { return words_.at(index); }
  const std::vector<std::string>& words() const { return words_; }

  /// `word<TAB>index` per line.
  void save(std::ostream& out) const;
  static Vocabulary load(std::istream& in, std::size_t min_frequency = 1);

  bool operator==(const Vocabulary& other) const {
    return words_ == other.words_ && min_frequency_ == other.min_frequency_;
  }

 private:
  std::vector<std::string> words_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t min_frequency_ = 1;
};

/// Frequency counts token occurrences, not documents.
Vocabulary build_vocabulary(std::span<const TokenizedTweet> corpus, std::size_t min_frequency);

/// Binary presence vector with a sorted sparse view of its set bits.
class BowVector {
 public:
  BowVector() = default;
  explicit BowVector(std::size_t size) : bits_(size, 0) {}

  std::size_t size() const { return bits_.size(); }
  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  std::size_t popcount() const { return active_.size(); }
  std::span<const std::uint32_t> active() const { return active_; }

  void set(std::size_t i);

  Eigen::VectorXd to_dense() const;

  bool operator==(const BowVector& other) const { return bits_ == other.bits_; }

 private:
  std::vector<std::uint8_t> bits_;
  std::vector<std::uint32_t> active_;
};

/// Out-of-vocabulary tokens are ignored.
BowVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab);

}  // namespace tweetgauge
