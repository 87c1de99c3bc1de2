#pragma once

#include <cmath>
#include <concepts>

#include <Eigen/Core>

namespace tweetgauge {

/// Logistic function, evaluated without overflow for large |x|.
template <std::floating_point Scalar>
Scalar sigmoid(Scalar x) {
  using std::exp;
  if (x >= Scalar(0)) return Scalar(1) / (Scalar(1) + exp(-x));
  const Scalar e = exp(x);
  return e / (Scalar(1) + e);
}

/// log(1 + exp(x)), accurate for both tails.
template <std::floating_point Scalar>
Scalar softplus(Scalar x) {
  using std::exp;
  using std::log1p;
  if (x > Scalar(0)) return x + log1p(exp(-x));
  return log1p(exp(x));
}

/// Binary cross-entropy of a logit against a 0/1 target: softplus(z) - y z.
template <std::floating_point Scalar>
Scalar binary_cross_entropy_from_logit(Scalar logit, Scalar target) {
  return softplus(logit) - target * logit;
}

template <class Derived>
auto sigmoid(const Eigen::ArrayBase<Derived>& x) {
  return x.unaryExpr([](typename Derived::Scalar v) { return sigmoid(v); });
}

}  // namespace tweetgauge
