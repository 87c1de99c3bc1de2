#include "tweetgauge/neural/gradient_check.hpp"

namespace tweetgauge {

double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric) {
  if (analytic.size() != numeric.size()) throw std::invalid_argument("gradient sizes differ");
  double worst = 0.0;
  for (Eigen::Index k = 0; k < analytic.size(); ++k) {
    const double a = analytic[k];
    const double n = numeric[k];
    const double scale = std::max({std::abs(a), std::abs(n), 1e-8});
    worst = std::max(worst, std::abs(a - n) / scale);
  }
  return worst;
}

double gradient_check(const SoftmaxClassifier& model, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                      double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("finite-difference step must be positive");
  Eigen::VectorXd analytic;
  model.loss_and_gradient(inputs, labels, analytic);
  SoftmaxClassifier probe = model;
  const Eigen::VectorXd numeric = central_difference(
      model.parameters(),
      [&](const Eigen::VectorXd& p) {
        probe.parameters() = p;
        return probe.loss(inputs, labels);
      },
      step);
  return max_relative_error(analytic, numeric);
}

double gradient_check(const BiLstmClassifier& model, const SequenceBatch& batch, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("finite-difference step must be positive");
  Eigen::VectorXd analytic;
  model.loss_and_gradient(batch, analytic);
  BiLstmClassifier probe = model;
  const Eigen::VectorXd numeric = central_difference(
      model.parameters(),
      [&](const Eigen::VectorXd& p) {
        probe.parameters() = p;
        return probe.loss(batch);
      },
      step);
  return max_relative_error(analytic, numeric);
}

}  // namespace tweetgauge
