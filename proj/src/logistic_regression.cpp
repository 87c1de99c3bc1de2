#include <cmath>
#include <stdexcept>

#include "serial.hpp"
#include "tweetgauge/classic.hpp"
#include "tweetgauge/error.hpp"
#include "tweetgauge/math.hpp"

namespace tweetgauge {

LogisticRegressionModel::LogisticRegressionModel(Eigen::VectorXd weights, double bias, double l2_lambda)
    : weights_(std::move(weights)), bias_(bias), l2_lambda_(l2_lambda) {
  if (!weights_.allFinite() || !std::isfinite(bias_)) {
    throw std::invalid_argument("logistic regression parameters must be finite");
  }
  if (!(l2_lambda_ >= 0.0)) throw std::invalid_argument("l2_lambda must be non-negative");
}

double LogisticRegressionModel::logit(const BowVector& x) const {
  if (x.size() != n_features()) {
    throw DataError("feature length " + std::to_string(x.size()) + " does not match model width " +
                    std::to_string(n_features()));
  }
  double z = bias_;
  for (auto i : x.active()) z += weights_[i];
  return z;
}

double LogisticRegressionModel::predict_score(const BowVector& x) const { return sigmoid(logit(x)); }

void LogisticRegressionModel::save(std::ostream& out) const {
  out << "logistic_regression v1\n"
      << "features " << weights_.size() << '\n'
      << "l2_lambda " << format_double(l2_lambda_) << '\n'
      << "bias " << format_double(bias_) << '\n';
  serial::write_values(out, weights_);
}

LogisticRegressionModel LogisticRegressionModel::load(std::istream& in) {
  serial::expect_line(in, "logistic_regression v1");
  const auto n = serial::read_uint(in, "features");
  const double lambda = serial::read_double(in, "l2_lambda");
  const double bias = serial::read_double(in, "bias");
  Eigen::VectorXd weights = serial::read_values(in, static_cast<Eigen::Index>(n), "weights");
  try {
    return LogisticRegressionModel(std::move(weights), bias, lambda);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint: ") + e.what());
  }
}

LogisticObjective logistic_objective(std::span<const BowVector> x, std::span<const int> y,
                                     const Eigen::VectorXd& weights, double bias, double l2_lambda) {
  if (x.empty() || x.size() != y.size()) throw DataError("logistic objective needs matching, non-empty data");
  const double scale = 1.0 / static_cast<double>(x.size());
  LogisticObjective result;
  result.weight_gradient = Eigen::VectorXd::Zero(weights.size());
  double loss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i].size() != static_cast<std::size_t>(weights.size())) {
      throw DataError("feature vectors and weights differ in length");
    }
    double z = bias;
    for (auto f : x[i].active()) z += weights[f];
    const double target = y[i];
    loss += binary_cross_entropy_from_logit(z, target);
    const double residual = sigmoid(z) - target;
    for (auto f : x[i].active()) result.weight_gradient[f] += residual;
    result.bias_gradient += residual;
  }
  result.loss = loss * scale + 0.5 * l2_lambda * weights.squaredNorm();
  result.weight_gradient = result.weight_gradient * scale + l2_lambda * weights;
  result.bias_gradient *= scale;
  return result;
}

LogisticRegressionModel train_logistic_regression(std::span<const BowVector> x, std::span<const int> y,
                                                  const LogisticParams& params,
                                                  std::vector<double>* loss_curve) {
  if (x.empty()) throw DataError("cannot train on an empty dataset");
  if (x.size() != y.size()) throw DataError("feature rows and labels differ in length");
  if (!(params.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  const double lambda = params.l2_lambda.value_or(1.0 / static_cast<double>(x.size()));
  if (!(lambda >= 0.0)) throw std::invalid_argument("l2_lambda must be non-negative");

  Eigen::VectorXd weights = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(x.front().size()));
  double bias = 0.0;
  if (loss_curve) loss_curve->clear();
  for (std::size_t epoch = 0;; ++epoch) {
    const LogisticObjective objective = logistic_objective(x, y, weights, bias, lambda);
    if (!std::isfinite(objective.loss)) {
      throw DivergenceError("logistic regression loss became non-finite at epoch " + std::to_string(epoch) +
                            "; lower the learning rate");
    }
    if (loss_curve) loss_curve->push_back(objective.loss);
    if (epoch == params.epochs) break;
    weights -= params.learning_rate * objective.weight_gradient;
    bias -= params.learning_rate * objective.bias_gradient;
  }
  return LogisticRegressionModel(std::move(weights), bias, lambda);
}

}  // namespace tweetgauge
