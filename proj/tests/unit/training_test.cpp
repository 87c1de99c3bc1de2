#include <gtest/gtest.h>

#include <algorithm>
#include <set>
#include <sstream>

#include "tweetgauge/neural/training.hpp"

using namespace tweetgauge;

namespace {

// Validation loss falls until `plateau_epoch`, then stays flat. The single
// parameter records the epoch it was produced at.
struct PlateauSession {
  std::size_t plateau_epoch;
  std::size_t epoch = 0;
  Eigen::VectorXd params = Eigen::VectorXd::Zero(1);

  double train_epoch(Rng&) {
    ++epoch;
    params[0] = static_cast<double>(epoch);
    return training_loss();
  }
  double training_loss() const { return 1.0 / (1.0 + params[0]); }
  double validation_loss() const {
    const double e = std::min(params[0], static_cast<double>(plateau_epoch));
    return 10.0 - e;
  }
  Eigen::VectorXd& parameters() { return params; }
};

static_assert(EpochTrainable<PlateauSession>);

}  // namespace

TEST(EarlyStopping, PlateauStopsAfterPatience) {
  for (std::size_t k : {0u, 1u, 5u, 37u}) {
    PlateauSession session{k};
    TrainConfig config;
    const TrainReport report = run_early_stopping(session, config);
    EXPECT_TRUE(report.stopped_early);
    EXPECT_EQ(report.epochs_run, k + 10);
    EXPECT_EQ(report.best_epoch, k);
    EXPECT_EQ(session.params[0], static_cast<double>(k));
    ASSERT_EQ(report.validation_loss.size(), k + 11);
    for (std::size_t e = report.best_epoch + 1; e <= report.best_epoch + config.patience; ++e) {
      EXPECT_GE(report.validation_loss[e], report.validation_loss[report.best_epoch]);
    }
  }
}

TEST(EarlyStopping, NeverTriggersOnSteadyDecrease) {
  PlateauSession session{1000};
  TrainConfig config;
  const TrainReport report = run_early_stopping(session, config);
  EXPECT_FALSE(report.stopped_early);
  EXPECT_EQ(report.epochs_run, 100u);
  EXPECT_EQ(report.best_epoch, 100u);
  EXPECT_EQ(session.params[0], 100.0);
}

TEST(EarlyStopping, ReportCsv) {
  PlateauSession session{1};
  TrainConfig config;
  config.patience = 2;
  const TrainReport report = run_early_stopping(session, config);
  std::ostringstream out;
  report.write_csv(out);
  EXPECT_EQ(out.str(), "epoch,train_loss,val_loss\n0,1,10\n1,0.5,9\n2,0.3333333333333333,9\n3,0.25,9\n");
}

TEST(TrainConfig, Validation) {
  TrainConfig config;
  EXPECT_NO_THROW(config.validate());
  config.validation_fraction = 1.0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = {};
  config.learning_rate = 0;
  EXPECT_THROW(config.validate(), ConfigError);
  config = {};
  config.patience = 0;
  EXPECT_THROW(config.validate(), ConfigError);
}

TEST(Batching, ShuffledCoversAll) {
  Rng rng(1);
  const auto batches = shuffled_batches(70, 32, rng);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches.back().size(), 6u);
  std::set<std::size_t> seen;
  for (const auto& b : batches) seen.insert(b.begin(), b.end());
  EXPECT_EQ(seen.size(), 70u);
}

TEST(Batching, LengthBucketsShareLength) {
  Rng rng(2);
  std::vector<std::size_t> lengths;
  for (std::size_t i = 0; i < 100; ++i) lengths.push_back(1 + i % 7);
  const auto batches = length_bucketed_batches(lengths, 5, rng);
  std::set<std::size_t> seen;
  for (const auto& b : batches) {
    EXPECT_LE(b.size(), 5u);
    for (auto i : b) EXPECT_EQ(lengths[i], lengths[b[0]]);
    seen.insert(b.begin(), b.end());
  }
  EXPECT_EQ(seen.size(), 100u);
  Rng again(2);
  EXPECT_EQ(length_bucketed_batches(lengths, 5, again), batches);
}
