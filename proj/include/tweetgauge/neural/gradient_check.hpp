#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "tweetgauge/neural/bilstm.hpp"
#include "tweetgauge/neural/softmax.hpp"

namespace tweetgauge {

/// max_k |a_k - n_k| / max(|a_k|, |n_k|, 1e-8)
double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& numeric);

/// Central differences of `loss` at `parameters`, one coordinate at a time.
template <class LossFn>
Eigen::VectorXd central_difference(Eigen::VectorXd parameters, LossFn&& loss, double step) {
  if (!(step > 0.0) || !std::isfinite(step)) throw std::invalid_argument("finite-difference step must be positive");
  Eigen::VectorXd numeric(parameters.size());
  for (Eigen::Index k = 0; k < parameters.size(); ++k) {
    const double saved = parameters[k];
    parameters[k] = saved + step;
    const double up = loss(parameters);
    parameters[k] = saved - step;
    const double down = loss(parameters);
    parameters[k] = saved;
    numeric[k] = (up - down) / (2.0 * step);
  }
  return numeric;
}

/// Analytic vs. central-difference gradient of the mean cross-entropy.
double gradient_check(const SoftmaxClassifier& model, const Eigen::MatrixXd& inputs, std::span<const int> labels,
                      double step);
/// Analytic (BPTT) vs. central-difference gradient over every parameter.
double gradient_check(const BiLstmClassifier& model, const SequenceBatch& batch, double step);

}  // namespace tweetgauge
