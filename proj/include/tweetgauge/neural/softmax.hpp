#pragma once

#include <cstdint>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "tweetgauge/embeddings.hpp"
#include "tweetgauge/neural/training.hpp"
#include "tweetgauge/rng.hpp"

namespace tweetgauge {

/// Probability of each label: exp(Z_i . v) / sum_k exp(Z_k . v). The maximum
/// logit is subtracted first so large logits cannot overflow.
template <class DerivedV, class DerivedZ>
Eigen::Matrix<typename DerivedZ::Scalar, Eigen::Dynamic, 1> softmax_probability(
    const Eigen::MatrixBase<DerivedV>& v, const Eigen::MatrixBase<DerivedZ>& z) {
  using Scalar = typename DerivedZ::Scalar;
  if (v.cols() != 1 || z.cols() != v.rows()) {
    throw std::invalid_argument("softmax: weight matrix has " + std::to_string(z.cols()) +
                                " columns but the input has dimension " + std::to_string(v.rows()));
  }
  if (!v.allFinite() || !z.allFinite()) throw std::invalid_argument("softmax: non-finite input");
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> logits = z * v.template cast<Scalar>();
  const Scalar peak = logits.maxCoeff();
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> expo = (logits.array() - peak).exp().matrix();
  return expo / expo.sum();
}

/// Two-label softmax head over a tweet vector. Row 0 of Z scores the
/// positive (disaster) label, row 1 the negative label.
class SoftmaxClassifier {
 public:
  static constexpr Eigen::Index kLabels = 2;
  static constexpr Eigen::Index kPositiveRow = 0;

  SoftmaxClassifier() = default;
  /// Zero weights.
  explicit SoftmaxClassifier(Eigen::Index input_dim);
  /// Entries drawn from uniform(-half_width, half_width).
  static SoftmaxClassifier random_uniform(Eigen::Index input_dim, double half_width, Rng& rng);

  Eigen::Index input_dim() const { return input_dim_; }
  Eigen::Map<Eigen::MatrixXd> weights() { return {parameters_.data(), kLabels, input_dim_}; }
  Eigen::Map<const Eigen::MatrixXd> weights() const { return {parameters_.data(), kLabels, input_dim_}; }
  /// Column-major Z.
  Eigen::VectorXd& parameters() { return parameters_; }
  const Eigen::VectorXd& parameters() const { return parameters_; }

  Eigen::Vector2d probabilities(const Eigen::Ref<const Eigen::VectorXd>& v) const;
  /// Probability of the positive label.
  double score(const Eigen::Ref<const Eigen::VectorXd>& v) const { return probabilities(v)[kPositiveRow]; }

  /// Mean categorical cross-entropy over the columns of `inputs`. For two
  /// labels this equals the binary cross-entropy of the positive probability.
  double loss(const Eigen::Ref<const Eigen::MatrixXd>& inputs, std::span<const int> labels) const;
  double loss_and_gradient(const Eigen::Ref<const Eigen::MatrixXd>& inputs, std::span<const int> labels,
                           Eigen::VectorXd& gradient) const;

  void save(std::ostream& out) const;
  static SoftmaxClassifier load(std::istream& in);

  bool operator==(const SoftmaxClassifier& other) const {
    return input_dim_ == other.input_dim_ && parameters_ == other.parameters_;
  }

 private:
  Eigen::Index input_dim_ = 0;
  Eigen::VectorXd parameters_;
};

struct SoftmaxTraining {
  SoftmaxClassifier model;
  TrainReport report;
};

/// Shuffled mini-batch SGD with early stopping on a stratified validation
/// split. Weights start from seeded uniform(-0.05, 0.05).
SoftmaxTraining train_softmax(const Eigen::MatrixXd& inputs, std::span<const int> labels,
                              const TrainConfig& config);
SoftmaxTraining train_softmax(std::span<const TweetEmbedding> vectors, std::span<const int> labels,
                              const TrainConfig& config);

/// Columns of a matrix built from tweet embeddings.
Eigen::MatrixXd stack_columns(std::span<const TweetEmbedding> vectors);

}  // namespace tweetgauge
