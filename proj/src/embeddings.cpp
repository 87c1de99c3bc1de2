#include "tweetgauge/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

bool WordEmbeddingTable::insert(std::string word, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw std::invalid_argument("vector for `" + word + "` has dimension " + std::to_string(vector.size()) +
                                ", table has " + std::to_string(dimension_));
  }
  if (index_.contains(word)) return false;
  index_.emplace(word, words_.size());
  words_.push_back(std::move(word));
  data_.insert(data_.end(), vector.begin(), vector.end());
  return true;
}

std::optional<Eigen::Map<const Eigen::VectorXf>> WordEmbeddingTable::find(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  if (it == index_.end()) return std::nullopt;
  return Eigen::Map<const Eigen::VectorXf>(data_.data() + it->second * dimension_,
                                           static_cast<Eigen::Index>(dimension_));
}

namespace {

std::vector<std::string_view> fields_of(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    const auto start = line.find_first_not_of(" \t\r", pos);
    if (start == std::string_view::npos) break;
    auto end = line.find_first_of(" \t\r", start);
    if (end == std::string_view::npos) end = line.size();
    fields.push_back(line.substr(start, end - start));
    pos = end;
  }
  return fields;
}

std::string at_line(std::string_view source, std::size_t line) {
  return std::string(source) + ": line " + std::to_string(line);
}

}  // namespace

WordEmbeddingTable parse_word_vectors(std::istream& in, std::string_view source,
                                      const std::unordered_set<std::string>* keep) {
  std::optional<WordEmbeddingTable> table;
  std::vector<float> values;
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto fields = fields_of(line);
    if (fields.empty()) continue;
    if (!table) {
      std::uint64_t count = 0;
      std::uint64_t dim = 0;
      if (line_number == 1 && fields.size() == 2 && parse_uint(fields[0], count) && parse_uint(fields[1], dim)) {
        continue;  // word2vec-style header
      }
      if (fields.size() < 2) throw DataError(at_line(source, line_number) + ": record has no vector components");
      table.emplace(fields.size() - 1);
      values.resize(fields.size() - 1);
    }
    if (fields.size() - 1 != table->dimension()) {
      throw DataError(at_line(source, line_number) + ": expected " + std::to_string(table->dimension()) +
                      " components, found " + std::to_string(fields.size() - 1));
    }
    std::string word(fields[0]);
    if (keep != nullptr && !keep->contains(word)) continue;
    if (table->contains(word)) continue;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      if (!parse_float(fields[k], values[k - 1]) || !std::isfinite(values[k - 1])) {
        throw DataError(at_line(source, line_number) + ": component " + std::to_string(k) + " `" +
                        std::string(fields[k]) + "` is not a finite number");
      }
    }
    table->insert(std::move(word), values);
  }
  if (!table) throw DataError(std::string(source) + ": no word vectors found");
  return std::move(*table);
}

WordEmbeddingTable load_word_vectors(const std::filesystem::path& path,
                                     const std::unordered_set<std::string>* keep) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open word-vector file: " + path.string());
  return parse_word_vectors(in, path.string(), keep);
}

TweetEmbedding mean_pool(std::span<const std::string> tokens, const WordEmbeddingTable& table) {
  TweetEmbedding result;
  result.source = EmbeddingSource::mean_pooled;
  result.vector = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(table.dimension()));
  for (const auto& token : tokens) {
    if (const auto vector = table.find(token)) {
      result.vector += vector->cast<double>();
      ++result.coverage;
    }
  }
  if (result.coverage > 0) result.vector /= static_cast<double>(result.coverage);
  return result;
}

Eigen::MatrixXf token_sequence(std::span<const std::string> tokens, const WordEmbeddingTable& table,
                               std::size_t max_length) {
  std::vector<Eigen::Map<const Eigen::VectorXf>> found;
  for (const auto& token : tokens) {
    if (found.size() == max_length) break;
    if (auto vector = table.find(token)) found.push_back(*vector);
  }
  Eigen::MatrixXf sequence(static_cast<Eigen::Index>(table.dimension()), static_cast<Eigen::Index>(found.size()));
  for (std::size_t t = 0; t < found.size(); ++t) sequence.col(static_cast<Eigen::Index>(t)) = found[t];
  return sequence;
}

const Eigen::VectorXd& ContextualEmbeddingStore::cls(std::string_view id) const {
  const auto it = cls_.find(std::string(id));
  if (it == cls_.end()) throw NotFoundError("no contextual embedding for tweet id `" + std::string(id) + "`");
  return it->second;
}

TweetEmbedding ContextualEmbeddingStore::cls_embedding(std::string_view id) const {
  return {cls(id), EmbeddingSource::contextual_cls, 1};
}

const Eigen::MatrixXf& ContextualEmbeddingStore::tokens(std::string_view id) const {
  const auto it = tokens_.find(std::string(id));
  if (it == tokens_.end()) throw NotFoundError("no token embeddings for tweet id `" + std::string(id) + "`");
  return it->second;
}

void ContextualEmbeddingStore::add_cls(std::string id, Eigen::VectorXd vector) {
  if (static_cast<std::size_t>(vector.size()) != dimension_) throw DataError("cls vector dimension mismatch");
  if (!vector.allFinite()) throw DataError("cls vector for `" + id + "` is not finite");
  if (cls_.contains(id)) throw DataError("duplicate contextual id `" + id + "`");
  ids_.push_back(id);
  cls_.emplace(std::move(id), std::move(vector));
}

void ContextualEmbeddingStore::add_tokens(std::string id, Eigen::MatrixXf sequence) {
  if (!cls_.contains(id)) throw DataError("token sequence for `" + id + "` has no cls vector");
  if (static_cast<std::size_t>(sequence.rows()) != dimension_) throw DataError("token vector dimension mismatch");
  if (sequence.cols() < 1) throw DataError("token sequence for `" + id + "` is empty");
  if (!sequence.allFinite()) throw DataError("token sequence for `" + id + "` is not finite");
  if (tokens_.contains(id)) throw DataError("duplicate token sequence id `" + id + "`");
  tokens_.emplace(std::move(id), std::move(sequence));
}

namespace {

std::size_t read_dim_header(std::istream& in, std::string_view source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(std::string(source) + ": empty contextual export");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::uint64_t dim = 0;
  if (line.rfind("#dim=", 0) != 0 || !parse_uint(std::string_view(line).substr(5), dim) || dim == 0) {
    throw DataError(std::string(source) + ": line 1: expected `#dim=<d>` header");
  }
  return dim;
}

template <class Scalar>
void parse_components(std::string_view text, Scalar* out, std::size_t dim, const std::string& where) {
  const auto parts = split(text, ',');
  if (parts.size() != dim) {
    throw DataError(where + ": expected " + std::to_string(dim) + " components, found " +
                    std::to_string(parts.size()));
  }
  for (std::size_t k = 0; k < dim; ++k) {
    bool ok = false;
    if constexpr (std::is_same_v<Scalar, float>) {
      ok = parse_float(parts[k], out[k]);
    } else {
      ok = parse_double(parts[k], out[k]);
    }
    if (!ok) throw DataError(where + ": component " + std::to_string(k + 1) + " is not a number");
  }
}

}  // namespace

ContextualEmbeddingStore parse_contextual_store(std::istream& cls_in, std::istream* tokens_in,
                                                std::string_view source) {
  const std::string cls_source = std::string(source) + " (cls)";
  const std::size_t dim = read_dim_header(cls_in, cls_source);
  ContextualEmbeddingStore store(dim);
  std::string line;
  std::size_t line_number = 1;
  while (std::getline(cls_in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = at_line(cls_source, line_number);
    const auto tab = line.find('\t');
    if (tab == std::string::npos) throw DataError(where + ": expected `id<TAB>values`");
    Eigen::VectorXd vector(static_cast<Eigen::Index>(dim));
    parse_components(std::string_view(line).substr(tab + 1), vector.data(), dim, where);
    try {
      store.add_cls(line.substr(0, tab), std::move(vector));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }

  if (tokens_in == nullptr) return store;
  const std::string token_source = std::string(source) + " (tokens)";
  const std::size_t token_dim = read_dim_header(*tokens_in, token_source);
  if (token_dim != dim) {
    throw DataError(token_source + ": dimension " + std::to_string(token_dim) + " differs from cls dimension " +
                    std::to_string(dim));
  }
  line_number = 1;
  while (std::getline(*tokens_in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::string where = at_line(token_source, line_number);
    const auto parts = split(line, '\t');
    std::uint64_t count = 0;
    if (parts.size() != 3 || !parse_uint(parts[1], count)) {
      throw DataError(where + ": expected `id<TAB>n<TAB>vectors`");
    }
    const auto vectors = split(parts[2], ';');
    if (count == 0 || vectors.size() != count) {
      throw DataError(where + ": declared " + std::to_string(count) + " token vectors, found " +
                      std::to_string(vectors.size()));
    }
    Eigen::MatrixXf sequence(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(count));
    for (std::size_t t = 0; t < count; ++t) {
      parse_components(vectors[t], sequence.col(static_cast<Eigen::Index>(t)).data(), dim, where);
    }
    try {
      store.add_tokens(std::string(parts[0]), std::move(sequence));
    } catch (const DataError& e) {
      throw DataError(where + ": " + e.what());
    }
  }
  return store;
}

ContextualEmbeddingStore load_contextual_store(const std::filesystem::path& cls_path,
                                               const std::optional<std::filesystem::path>& tokens_path) {
  std::ifstream cls_in(cls_path, std::ios::binary);
  if (!cls_in) throw DataError("cannot open contextual export: " + cls_path.string());
  if (!tokens_path) return parse_contextual_store(cls_in, nullptr, cls_path.string());
  std::ifstream tokens_in(*tokens_path, std::ios::binary);
  if (!tokens_in) throw DataError("cannot open token export: " + tokens_path->string());
  return parse_contextual_store(cls_in, &tokens_in, cls_path.string());
}

namespace {

template <class Derived>
void write_components(std::ostream& out, const Eigen::DenseBase<Derived>& values) {
  for (Eigen::Index k = 0; k < values.size(); ++k) {
    if (k) out << ',';
    out << format_fixed(static_cast<double>(values(k)), 6);
  }
}

}  // namespace

void write_contextual_cls(std::ostream& out, const ContextualEmbeddingStore& store) {
  out << "#dim=" << store.dimension() << '\n';
  for (const auto& id : store.ids()) {
    out << id << '\t';
    write_components(out, store.cls(id));
    out << '\n';
  }
}

void write_contextual_tokens(std::ostream& out, const ContextualEmbeddingStore& store) {
  out << "#dim=" << store.dimension() << '\n';
  for (const auto& id : store.ids()) {
    if (!store.has_tokens(id)) continue;
    const auto& sequence = store.tokens(id);
    out << id << '\t' << sequence.cols() << '\t';
    for (Eigen::Index t = 0; t < sequence.cols(); ++t) {
      if (t) out << ';';
      write_components(out, sequence.col(t));
    }
    out << '\n';
  }
}

}  // namespace tweetgauge
