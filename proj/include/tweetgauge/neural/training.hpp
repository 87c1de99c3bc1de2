#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "tweetgauge/error.hpp"
#include "tweetgauge/rng.hpp"

namespace tweetgauge {

enum class LossKind { categorical_cross_entropy, binary_cross_entropy };

struct TrainConfig {
  std::size_t max_epochs = 100;
  std::size_t batch_size = 32;
  double learning_rate = 0.05;
  std::size_t patience = 10;
  double validation_fraction = 0.01;
  std::uint64_t seed = 0;
  LossKind loss = LossKind::categorical_cross_entropy;

  /// Throws ConfigError on a non-positive field.
  void validate() const;
};

/// Loss curves are indexed by epoch; entry 0 is measured at initialization.
struct TrainReport {
  std::size_t epochs_run = 0;
  std::vector<double> train_loss;
  std::vector<double> validation_loss;
  std::size_t best_epoch = 0;
  bool stopped_early = false;

  /// `epoch,train_loss,val_loss`, one row per entry of the curves.
  void write_csv(std::ostream& out) const;
};

/// A model bound to its training and validation data.
template <class T>
concept EpochTrainable = requires(T& session, const T& const_session, Rng& rng) {
  /// One pass over the training data; returns the mean per-example loss.
  { session.train_epoch(rng) } -> std::convertible_to<double>;
  { const_session.training_loss() } -> std::convertible_to<double>;
  { const_session.validation_loss() } -> std::convertible_to<double>;
  { session.parameters() } -> std::same_as<Eigen::VectorXd&>;
};

namespace detail {

inline void check_finite_loss(double loss, std::size_t epoch, const char* what) {
  if (!std::isfinite(loss)) {
    throw DivergenceError(std::string(what) + " loss became non-finite at epoch " + std::to_string(epoch) +
                          "; lower the learning rate");
  }
}

}  // namespace detail

/// Runs up to max_epochs epochs, tracking validation loss. Training stops
/// once `patience` consecutive epochs fail to strictly improve on the best
/// validation loss seen (initialization counts as epoch 0), and the session
/// is left holding the parameters from the best epoch.
template <EpochTrainable Session>
TrainReport run_early_stopping(Session& session, const TrainConfig& config) {
  config.validate();
  Rng rng(derive_seed(config.seed, 2));
  TrainReport report;
  report.train_loss.push_back(session.training_loss());
  report.validation_loss.push_back(session.validation_loss());
  detail::check_finite_loss(report.train_loss.back(), 0, "training");
  detail::check_finite_loss(report.validation_loss.back(), 0, "validation");

  double best_loss = report.validation_loss.back();
  Eigen::VectorXd best_parameters = session.parameters();

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double train_loss = session.train_epoch(rng);
    detail::check_finite_loss(train_loss, epoch, "training");
    const double validation_loss = session.validation_loss();
    detail::check_finite_loss(validation_loss, epoch, "validation");
    report.train_loss.push_back(train_loss);
    report.validation_loss.push_back(validation_loss);
    report.epochs_run = epoch;

    if (validation_loss < best_loss) {
      best_loss = validation_loss;
      report.best_epoch = epoch;
      best_parameters = session.parameters();
    } else if (epoch - report.best_epoch >= config.patience) {
      report.stopped_early = true;
      break;
    }
  }
  session.parameters() = best_parameters;
  return report;
}

/// Shuffled index batches of at most `batch_size`.
std::vector<std::vector<std::size_t>> shuffled_batches(std::size_t count, std::size_t batch_size, Rng& rng);

/// Batches whose members share one length. Indices are shuffled, grouped by
/// length (stable), cut into batches, and the batch order is shuffled.
std::vector<std::vector<std::size_t>> length_bucketed_batches(std::span<const std::size_t> lengths,
                                                              std::size_t batch_size, Rng& rng);

}  // namespace tweetgauge
