#include "tweetgauge/bow.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

Vocabulary::Vocabulary(std::vector<std::string> words, std::size_t min_frequency)
    : words_(std::move(words)), min_frequency_(min_frequency) {
  index_.reserve(words_.size());
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (i > 0 && !(words_[i - 1] < words_[i])) {
      throw std::invalid_argument("vocabulary words must be strictly increasing");
    }
    index_.emplace(words_[i], i);
  }
}

std::optional<std::size_t> Vocabulary::index_of(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < words_.size(); ++i) out << words_[i] << '\t' << i << '\n';
}

Vocabulary Vocabulary::load(std::istream& in, std::size_t min_frequency) {
  std::vector<std::string> words;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    std::uint64_t index = 0;
    if (tab == std::string::npos || !parse_uint(std::string_view(line).substr(tab + 1), index) ||
        index != words.size()) {
      throw DataError("vocabulary line " + std::to_string(line_number) +
                      ": expected `word<TAB>" + std::to_string(words.size()) + "`");
    }
    words.push_back(line.substr(0, tab));
  }
  try {
    return Vocabulary(std::move(words), min_frequency);
  } catch (const std::invalid_argument&) {
    throw DataError("vocabulary words are not in strictly increasing order");
  }
}

Vocabulary build_vocabulary(std::span<const TokenizedTweet> corpus, std::size_t min_frequency) {
  if (corpus.empty()) throw DataError("cannot build a vocabulary from an empty corpus");
  if (min_frequency < 1) throw std::invalid_argument("min_frequency must be at least 1");
  std::map<std::string, std::size_t> counts;
  for (const auto& tweet : corpus) {
    for (const auto& token : tweet.tokens) ++counts[token];
  }
  std::vector<std::string> words;
  for (const auto& [word, count] : counts) {
    if (count >= min_frequency) words.push_back(word);
  }
  return Vocabulary(std::move(words), min_frequency);
}

void BowVector::set(std::size_t i) {
  if (bits_.at(i)) return;
  bits_[i] = 1;
  const auto value = static_cast<std::uint32_t>(i);
  active_.insert(std::lower_bound(active_.begin(), active_.end(), value), value);
}

Eigen::VectorXd BowVector::to_dense() const {
  Eigen::VectorXd dense = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(bits_.size()));
  for (auto i : active_) dense[i] = 1.0;
  return dense;
}

BowVector vectorize(std::span<const std::string> tokens, const Vocabulary& vocab) {
  BowVector vector(vocab.size());
  for (const auto& token : tokens) {
    if (const auto index = vocab.index_of(token)) vector.set(*index);
  }
  return vector;
}

}  // namespace tweetgauge
