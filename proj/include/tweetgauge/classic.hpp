#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "tweetgauge/bow.hpp"

namespace tweetgauge {

struct TreeParams {
  std::optional<std::size_t> max_depth;  // unlimited when empty
  std::size_t min_samples_split = 2;
};

/// CART tree over binary features. Internal nodes send samples lacking the
/// feature to `left` and samples having it to `right`.
class DecisionTreeModel {
 public:
  struct Node {
    std::int32_t feature = -1;  // -1 marks a leaf
    std::int32_t left = -1;
    std::int32_t right = -1;
    double positive_fraction = 0.0;

    bool is_leaf() const { return feature < 0; }
    bool operator==(const Node&) const = default;
  };

  DecisionTreeModel() = default;
  DecisionTreeModel(std::size_t n_features, std::vector<Node> nodes, TreeParams params = {});

  std::size_t n_features() const { return n_features_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  const TreeParams& params() const { return params_; }
  std::size_t depth() const;

  double predict_score(const BowVector& x) const;

  void save(std::ostream& out) const;
  static DecisionTreeModel load(std::istream& in);

  bool operator==(const DecisionTreeModel& other) const {
    return n_features_ == other.n_features_ && nodes_ == other.nodes_;
  }

 private:
  std::size_t n_features_ = 0;
  std::vector<Node> nodes_;
  TreeParams params_;
};

/// Greedy Gini CART. Stops on a pure node, when no split strictly lowers
/// impurity, below min_samples_split, or at max_depth. Ties go to the lowest
/// feature index.
DecisionTreeModel train_decision_tree(std::span<const BowVector> x, std::span<const int> y,
                                      const TreeParams& params = {});

struct ForestParams {
  std::size_t n_trees = 100;
  /// 0 selects ceil(sqrt(n_features)).
  std::size_t features_per_split = 0;
  bool bootstrap = true;
  std::uint64_t seed = 0;
  TreeParams tree;
  /// Worker threads; 0 selects the hardware concurrency. Results do not
  /// depend on this value.
  std::size_t workers = 0;
};

class RandomForestModel {
 public:
  RandomForestModel() = default;
  RandomForestModel(std::vector<DecisionTreeModel> trees, std::size_t features_per_split,
                    std::uint64_t seed);

  const std::vector<DecisionTreeModel>& trees() const { return trees_; }
  std::size_t n_trees() const { return trees_.size(); }
  std::size_t n_features() const { return trees_.front().n_features(); }
  std::size_t features_per_split() const { return features_per_split_; }
  std::uint64_t seed() const { return seed_; }

  /// Mean of the member trees' leaf fractions.
  double predict_score(const BowVector& x) const;

  void save(std::ostream& out) const;
  static RandomForestModel load(std::istream& in);

  bool operator==(const RandomForestModel&) const = default;

 private:
  std::vector<DecisionTreeModel> trees_;
  std::size_t features_per_split_ = 1;
  std::uint64_t seed_ = 0;
};

/// Tree `tree_index` draws its bootstrap sample as the first `n` outputs of
/// a generator seeded from (seed, tree_index).
std::vector<std::size_t> bootstrap_indices(std::size_t n, std::uint64_t seed, std::size_t tree_index);

RandomForestModel train_random_forest(std::span<const BowVector> x, std::span<const int> y,
                                      const ForestParams& params);

/// Out-of-bag score per training sample: the mean over trees whose
/// bootstrap sample excluded it, or nullopt when every tree saw it.
std::vector<std::optional<double>> out_of_bag_scores(const RandomForestModel& forest,
                                                     std::span<const BowVector> x,
                                                     const ForestParams& params);

struct LogisticParams {
  double learning_rate = 0.1;
  std::size_t epochs = 300;
  /// Defaults to 1 / n_samples.
  std::optional<double> l2_lambda;
  /// Recorded for interface symmetry; full-batch descent from zero is
  /// deterministic without it.
  std::uint64_t seed = 0;
};

class LogisticRegressionModel {
 public:
  LogisticRegressionModel() = default;
  LogisticRegressionModel(Eigen::VectorXd weights, double bias, double l2_lambda);

  const Eigen::VectorXd& weights() const { return weights_; }
  double bias() const { return bias_; }
  double l2_lambda() const { return l2_lambda_; }
  std::size_t n_features() const { return static_cast<std::size_t>(weights_.size()); }

  double logit(const BowVector& x) const;
  double predict_score(const BowVector& x) const;

  void save(std::ostream& out) const;
  static LogisticRegressionModel load(std::istream& in);

  bool operator==(const LogisticRegressionModel& other) const {
    return weights_ == other.weights_ && bias_ == other.bias_ && l2_lambda_ == other.l2_lambda_;
  }

 private:
  Eigen::VectorXd weights_;
  double bias_ = 0.0;
  double l2_lambda_ = 0.0;
};

struct LogisticObjective {
  double loss = 0.0;
  Eigen::VectorXd weight_gradient;
  double bias_gradient = 0.0;
};

/// Mean binary cross-entropy plus (lambda / 2) ||w||^2, with its gradient.
LogisticObjective logistic_objective(std::span<const BowVector> x, std::span<const int> y,
                                     const Eigen::VectorXd& weights, double bias, double l2_lambda);

/// Full-batch gradient descent from zero. When `loss_curve` is given it
/// receives the objective before each epoch and after the last one.
LogisticRegressionModel train_logistic_regression(std::span<const BowVector> x, std::span<const int> y,
                                                  const LogisticParams& params = {},
                                                  std::vector<double>* loss_curve = nullptr);

/// Clamp to [1e-6, 1 - 1e-6] before AUC or log-loss on tree outputs.
double clamp_probability(double p);

}  // namespace tweetgauge
