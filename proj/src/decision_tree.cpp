#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "serial.hpp"
#include "tweetgauge/classic.hpp"
#include "tweetgauge/error.hpp"
#include "tweetgauge/rng.hpp"

namespace tweetgauge {

namespace {

void check_training_data(std::span<const BowVector> x, std::span<const int> y) {
  if (x.empty()) throw DataError("cannot train on an empty dataset");
  if (x.size() != y.size()) {
    throw DataError("feature rows (" + std::to_string(x.size()) + ") and labels (" +
                    std::to_string(y.size()) + ") differ in length");
  }
  const std::size_t width = x.front().size();
  for (const auto& row : x) {
    if (row.size() != width) throw DataError("feature vectors have inconsistent lengths");
  }
  for (int label : y) {
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
  }
}

/// Sum over children of (pos^2 + neg^2) / size, kept as an exact fraction.
/// Larger means purer; Gini impurity decrease is monotone in it.
struct Purity {
  __int128 numerator = 0;
  __int128 denominator = 1;

  bool operator>(const Purity& other) const {
    return numerator * other.denominator > other.numerator * denominator;
  }
};

Purity node_purity(std::int64_t pos, std::int64_t n) { return {pos * pos + (n - pos) * (n - pos), n}; }

Purity split_purity(std::int64_t pos_right, std::int64_t n_right, std::int64_t pos, std::int64_t n) {
  const std::int64_t n_left = n - n_right;
  const std::int64_t pos_left = pos - pos_right;
  const __int128 a = pos_left * pos_left + (n_left - pos_left) * (n_left - pos_left);
  const __int128 b = pos_right * pos_right + (n_right - pos_right) * (n_right - pos_right);
  return {a * n_right + b * n_left, static_cast<__int128>(n_left) * n_right};
}

/// Builds one tree. `rng` is only consulted when features_per_split limits
/// the candidates at a node.
class TreeBuilder {
 public:
  TreeBuilder(std::span<const BowVector> x, std::span<const int> y, const TreeParams& params,
              std::size_t features_per_split, Rng* rng)
      : x_(x),
        y_(y),
        params_(params),
        features_per_split_(features_per_split),
        rng_(rng),
        present_(x.front().size(), 0),
        present_positive_(x.front().size(), 0) {}

  DecisionTreeModel build(std::vector<std::size_t> samples) {
    struct Pending {
      std::int32_t node;
      std::vector<std::size_t> samples;
      std::size_t depth;
    };
    std::vector<DecisionTreeModel::Node> nodes(1);
    std::vector<Pending> stack;
    stack.push_back({0, std::move(samples), 0});

    while (!stack.empty()) {
      Pending item = std::move(stack.back());
      stack.pop_back();
      const auto n = static_cast<std::int64_t>(item.samples.size());
      std::int64_t pos = 0;
      for (auto s : item.samples) pos += y_[s];
      nodes[item.node].positive_fraction = static_cast<double>(pos) / static_cast<double>(n);

      const bool pure = pos == 0 || pos == n;
      const bool too_small = item.samples.size() < params_.min_samples_split;
      const bool too_deep = params_.max_depth && item.depth >= *params_.max_depth;
      if (pure || too_small || too_deep) continue;

      const std::int32_t feature = best_split(item.samples, pos);
      if (feature < 0) continue;

      std::vector<std::size_t> left;
      std::vector<std::size_t> right;
      for (auto s : item.samples) (x_[s][static_cast<std::size_t>(feature)] ? right : left).push_back(s);

      const auto left_id = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      const auto right_id = static_cast<std::int32_t>(nodes.size());
      nodes.emplace_back();
      nodes[item.node].feature = feature;
      nodes[item.node].left = left_id;
      nodes[item.node].right = right_id;
      stack.push_back({right_id, std::move(right), item.depth + 1});
      stack.push_back({left_id, std::move(left), item.depth + 1});
    }
    return DecisionTreeModel(x_.front().size(), std::move(nodes), params_);
  }

 private:
  std::int32_t best_split(const std::vector<std::size_t>& samples, std::int64_t pos) {
    const auto n = static_cast<std::int64_t>(samples.size());
    touched_.clear();
    for (auto s : samples) {
      const int label = y_[s];
      for (auto f : x_[s].active()) {
        if (present_[f]++ == 0) touched_.push_back(f);
        present_positive_[f] += static_cast<std::uint32_t>(label);
      }
    }
    std::sort(touched_.begin(), touched_.end());

    candidates_.clear();
    for (auto f : touched_) {
      if (present_[f] < static_cast<std::uint32_t>(n)) candidates_.push_back(f);
    }
    if (rng_ != nullptr && candidates_.size() > features_per_split_) {
      // Uniform subset of the non-constant features, then ascending order
      // so tie-breaking stays by feature index.
      for (std::size_t i = 0; i < features_per_split_; ++i) {
        const std::size_t j = i + rng_->uniform_index(candidates_.size() - i);
        std::swap(candidates_[i], candidates_[j]);
      }
      candidates_.resize(features_per_split_);
      std::sort(candidates_.begin(), candidates_.end());
    }

    Purity best = node_purity(pos, n);
    std::int32_t best_feature = -1;
    for (auto f : candidates_) {
      const Purity purity = split_purity(present_positive_[f], present_[f], pos, n);
      if (purity > best) {
        best = purity;
        best_feature = static_cast<std::int32_t>(f);
      }
    }

    for (auto f : touched_) {
      present_[f] = 0;
      present_positive_[f] = 0;
    }
    return best_feature;
  }

  std::span<const BowVector> x_;
  std::span<const int> y_;
  TreeParams params_;
  std::size_t features_per_split_;
  Rng* rng_;
  std::vector<std::uint32_t> present_;
  std::vector<std::uint32_t> present_positive_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::uint32_t> candidates_;
};

}  // namespace

DecisionTreeModel::DecisionTreeModel(std::size_t n_features, std::vector<Node> nodes, TreeParams params)
    : n_features_(n_features), nodes_(std::move(nodes)), params_(params) {
  if (nodes_.empty()) throw std::invalid_argument("a tree needs at least one node");
  const auto count = static_cast<std::int32_t>(nodes_.size());
  for (std::int32_t i = 0; i < count; ++i) {
    const Node& node = nodes_[static_cast<std::size_t>(i)];
    if (!(node.positive_fraction >= 0.0 && node.positive_fraction <= 1.0)) {
      throw std::invalid_argument("leaf fraction outside [0, 1]");
    }
    if (node.is_leaf()) continue;
    // Children always follow their parent, which rules out cycles.
    if (node.left <= i || node.right <= i || node.left >= count || node.right >= count ||
        static_cast<std::size_t>(node.feature) >= n_features_) {
      throw std::invalid_argument("malformed tree node " + std::to_string(i));
    }
  }
}

std::size_t DecisionTreeModel::depth() const {
  std::vector<std::size_t> level(nodes_.size(), 0);
  std::size_t deepest = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    deepest = std::max(deepest, level[i]);
    if (!nodes_[i].is_leaf()) {
      level[static_cast<std::size_t>(nodes_[i].left)] = level[i] + 1;
      level[static_cast<std::size_t>(nodes_[i].right)] = level[i] + 1;
    }
  }
  return deepest;
}

double DecisionTreeModel::predict_score(const BowVector& x) const {
  if (x.size() != n_features_) {
    throw DataError("feature length " + std::to_string(x.size()) + " does not match tree width " +
                    std::to_string(n_features_));
  }
  std::size_t at = 0;
  while (!nodes_[at].is_leaf()) {
    const Node& node = nodes_[at];
    at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] ? node.right : node.left);
  }
  return nodes_[at].positive_fraction;
}

void DecisionTreeModel::save(std::ostream& out) const {
  out << "decision_tree v1\n"
      << "features " << n_features_ << '\n'
      << "nodes " << nodes_.size() << '\n';
  for (const Node& node : nodes_) {
    out << node.feature << ' ' << node.left << ' ' << node.right << ' '
        << format_double(node.positive_fraction) << '\n';
  }
}

DecisionTreeModel DecisionTreeModel::load(std::istream& in) {
  serial::expect_line(in, "decision_tree v1");
  const auto n_features = serial::read_uint(in, "features");
  const auto count = serial::read_uint(in, "nodes");
  std::vector<Node> nodes;
  nodes.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    const std::string line = serial::next_line(in, "tree node");
    const auto parts = split(line, ' ');
    Node node;
    double fraction = 0;
    long long fields[3] = {0, 0, 0};
    bool ok = parts.size() == 4;
    for (int k = 0; ok && k < 3; ++k) {
      double value = 0;
      ok = parse_double(parts[k], value) && value == std::floor(value);
      fields[k] = static_cast<long long>(value);
    }
    ok = ok && parse_double(parts[3], fraction);
    if (!ok) throw DataError("checkpoint: malformed tree node line " + std::to_string(i));
    node.feature = static_cast<std::int32_t>(fields[0]);
    node.left = static_cast<std::int32_t>(fields[1]);
    node.right = static_cast<std::int32_t>(fields[2]);
    node.positive_fraction = fraction;
    nodes.push_back(node);
  }
  try {
    return DecisionTreeModel(n_features, std::move(nodes));
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

DecisionTreeModel train_decision_tree(std::span<const BowVector> x, std::span<const int> y,
                                      const TreeParams& params) {
  check_training_data(x, y);
  std::vector<std::size_t> samples(x.size());
  for (std::size_t i = 0; i < samples.size(); ++i) samples[i] = i;
  TreeBuilder builder(x, y, params, x.front().size(), nullptr);
  return builder.build(std::move(samples));
}

RandomForestModel::RandomForestModel(std::vector<DecisionTreeModel> trees, std::size_t features_per_split,
                                     std::uint64_t seed)
    : trees_(std::move(trees)), features_per_split_(features_per_split), seed_(seed) {
  if (trees_.empty()) throw std::invalid_argument("a forest needs at least one tree");
}

double RandomForestModel::predict_score(const BowVector& x) const {
  double sum = 0.0;
  for (const auto& tree : trees_) sum += tree.predict_score(x);
  return sum / static_cast<double>(trees_.size());
}

void RandomForestModel::save(std::ostream& out) const {
  out << "random_forest v1\n"
      << "trees " << trees_.size() << '\n'
      << "features_per_split " << features_per_split_ << '\n'
      << "seed " << seed_ << '\n';
  for (const auto& tree : trees_) tree.save(out);
}

RandomForestModel RandomForestModel::load(std::istream& in) {
  serial::expect_line(in, "random_forest v1");
  const auto count = serial::read_uint(in, "trees");
  const auto features_per_split = serial::read_uint(in, "features_per_split");
  const auto seed = serial::read_uint(in, "seed");
  if (count == 0) throw DataError("checkpoint: forest has no trees");
  std::vector<DecisionTreeModel> trees;
  trees.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) trees.push_back(DecisionTreeModel::load(in));
  return RandomForestModel(std::move(trees), features_per_split, seed);
}

std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t tree_index) {
  Rng rng(derive_seed(seed, tree_index));
  std::vector<std::size_t> draws(n);
  for (auto& d : draws) d = rng.uniform_index(n);
  return draws;
}

RandomForestModel train_random_forest(std::span<const BowVector> x, std::span<const int> y,
                                      const ForestParams& params) {
  check_training_data(x, y);
  const std::size_t width = x.front().size();
  if (params.n_trees < 1) throw std::invalid_argument("n_trees must be at least 1");
  std::size_t k = params.features_per_split;
  if (k == 0) k = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(width))));
  if (k < 1 || k > std::max<std::size_t>(width, 1)) {
    throw std::invalid_argument("features_per_split must lie in [1, n_features]");
  }

  std::vector<DecisionTreeModel> trees(params.n_trees);
  auto train_one = [&](std::size_t t) {
    Rng rng(derive_seed(params.seed, t));
    std::vector<std::size_t> samples(x.size());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      samples[i] = params.bootstrap ? rng.uniform_index(x.size()) : i;
    }
    TreeBuilder builder(x, y, params.tree, k, &rng);
    trees[t] = builder.build(std::move(samples));
  };

  std::size_t workers = params.workers ? params.workers : std::thread::hardware_concurrency();
  workers = std::clamp<std::size_t>(workers, 1, params.n_trees);
  if (workers == 1) {
    for (std::size_t t = 0; t < params.n_trees; ++t) train_one(t);
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t t = w; t < params.n_trees; t += workers) train_one(t);
      });
    }
  }
  return RandomForestModel(std::move(trees), k, params.seed);
}

std::vector<std::optional<double>> out_of_bag_scores(const RandomForestModel& forest,
                                                     std::span<const BowVector> x,
                                                     const ForestParams& params) {
  const std::size_t n = x.size();
  std::vector<double> sums(n, 0.0);
  std::vector<std::size_t> counts(n, 0);
  std::vector<char> in_bag(n);
  for (std::size_t t = 0; t < forest.n_trees(); ++t) {
    std::fill(in_bag.begin(), in_bag.end(), 0);
    if (params.bootstrap) {
      for (auto i : bootstrap_indices(n, params.seed, t)) in_bag[i] = 1;
    } else {
      std::fill(in_bag.begin(), in_bag.end(), 1);
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (in_bag[i]) continue;
      sums[i] += forest.trees()[t].predict_score(x[i]);
      ++counts[i];
    }
  }
  std::vector<std::optional<double>> scores(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (counts[i] > 0) scores[i] = sums[i] / static_cast<double>(counts[i]);
  }
  return scores;
}

double clamp_probability(double p) { return std::clamp(p, 1e-6, 1.0 - 1e-6); }

}  // namespace tweetgauge
