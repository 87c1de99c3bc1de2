#pragma once

// Small deterministic tweet corpora and word-vector files for end-to-end runs.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace tweetgauge::synthetic {

inline const std::vector<std::string>& disaster_words() {
  static const std::vector<std::string> words{"fire",   "flood",  "earthquake", "evacuate", "storm",
                                              "wildfire", "killed", "crash",     "emergency", "rescue"};
  return words;
}

inline const std::vector<std::string>& casual_words() {
  static const std::vector<std::string> words{"love", "movie", "happy", "song",  "party",
                                              "lunch", "game", "fun",   "music", "coffee"};
  return words;
}

inline const std::vector<std::string>& shared_words() {
  static const std::vector<std::string> words{"today", "people", "just", "new", "like", "time", "city", "news"};
  return words;
}

inline std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// `n` tweets, about 43% positive. Positives draw mostly from the disaster
/// words; a fraction of tweets carry the opposite class's words as noise.
inline void write_corpus(const std::filesystem::path& path, std::size_t n, std::uint64_t seed, bool labeled,
                         std::size_t first_id = 1) {
  std::mt19937_64 gen(seed);
  std::ofstream out(path, std::ios::binary);
  out << "id,keyword,location,text" << (labeled ? ",target" : "") << "\n";
  auto pick = [&](const std::vector<std::string>& from) { return from[gen() % from.size()]; };
  for (std::size_t i = 0; i < n; ++i) {
    const bool positive = gen() % 100 < 43;
    const bool noisy = gen() % 100 < 15;
    const auto& main = positive != noisy ? disaster_words() : casual_words();
    std::string text = "Update: " + pick(main) + " in the " + pick(shared_words()) + ", " + pick(main);
    for (int extra = static_cast<int>(gen() % 4); extra > 0; --extra) text += " " + pick(shared_words());
    if (gen() % 3 == 0) text += " http://t.co/" + std::to_string(gen() % 1000);
    out << (first_id + i) << ",,\"Somewhere, Earth\"," << csv_quote(text);
    if (labeled) out << ',' << (positive ? 1 : 0);
    out << '\n';
  }
}

/// Word vectors for every synthetic word, separated along the first axis.
inline void write_vectors(const std::filesystem::path& path, std::size_t dim, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> noise(0.0, 0.3);
  std::ofstream out(path, std::ios::binary);
  auto emit = [&](const std::vector<std::string>& words, double center) {
    for (const auto& w : words) {
      out << w;
      for (std::size_t k = 0; k < dim; ++k) out << ' ' << (k == 0 ? center : 0.0) + noise(gen);
      out << '\n';
    }
  };
  emit(disaster_words(), 1.0);
  emit(casual_words(), -1.0);
  emit(shared_words(), 0.0);
}

}  // namespace tweetgauge::synthetic
