#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "tweetgauge/error.hpp"
#include "tweetgauge/metrics.hpp"

using namespace tweetgauge;

namespace {

struct Instance {
  std::vector<double> scores;
  std::vector<int> labels;
};

// Sizes 2..200, both classes present, scores drawn from a small grid so ties occur.
Instance random_instance(std::mt19937& gen) {
  Instance inst;
  const std::size_t n = 2 + gen() % 199;
  const int grid = 2 + static_cast<int>(gen() % 40);
  for (std::size_t i = 0; i < n; ++i) {
    inst.scores.push_back(static_cast<double>(gen() % grid) / grid);
    inst.labels.push_back(static_cast<int>(gen() % 2));
  }
  inst.labels[0] = 1;
  inst.labels[1] = 0;
  return inst;
}

}  // namespace

TEST(Confusion, Examples) {
  const std::vector<double> s1{0.9, 0.1};
  const std::vector<int> l1{1, 0};
  EXPECT_EQ(confusion(s1, l1), (ConfusionMatrix{1, 0, 1, 0}));
  const std::vector<double> s2{0.9, 0.9};
  const std::vector<int> l2{0, 0};
  EXPECT_EQ(confusion(s2, l2).fp, 2u);
  const std::vector<double> s3{0.5};
  const std::vector<int> l3{1};
  EXPECT_EQ(confusion(s3, l3).tp, 1u);
  EXPECT_THROW(confusion(s1, l3), DataError);
  EXPECT_THROW(confusion({}, {}), DataError);
}

TEST(Confusion, Formulas) {
  const ConfusionMatrix perfect{1, 0, 1, 0};
  EXPECT_EQ(accuracy(perfect), 1.0);
  EXPECT_EQ(precision(perfect), 1.0);
  EXPECT_EQ(recall(perfect), 1.0);
  EXPECT_EQ(f1(perfect), 1.0);
  const ConfusionMatrix even{2, 1, 0, 1};
  EXPECT_DOUBLE_EQ(precision(even), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(recall(even), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(f1(even), 2.0 / 3.0);
  const ConfusionMatrix none{0, 0, 3, 2};
  EXPECT_EQ(precision(none), 0.0);
  EXPECT_EQ(recall(none), 0.0);
  EXPECT_EQ(f1(none), 0.0);
}

TEST(Confusion, MatchesRecountOracle) {
  std::mt19937 gen(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + gen() % 60;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = std::round(u(gen) * 10) / 10;
      labels[i] = static_cast<int>(gen() % 2);
    }
    const double threshold = std::round(u(gen) * 10) / 10;
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool predicted = !(scores[i] < threshold);
      if (predicted && labels[i] == 1) ++tp;
      if (predicted && labels[i] == 0) ++fp;
      if (!predicted && labels[i] == 0) ++tn;
      if (!predicted && labels[i] == 1) ++fn;
    }
    const ConfusionMatrix cm = confusion(scores, labels, threshold);
    ASSERT_EQ(cm, (ConfusionMatrix{tp, fp, tn, fn}));
    EXPECT_EQ(cm.total(), n);
    const double acc = static_cast<double>(tp + tn) / static_cast<double>(n);
    const double p = tp + fp ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    const double r = tp + fn ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    const double f = p + r > 0 ? 2 * p * r / (p + r) : 0.0;
    EXPECT_DOUBLE_EQ(accuracy(cm), acc);
    EXPECT_DOUBLE_EQ(precision(cm), p);
    EXPECT_DOUBLE_EQ(recall(cm), r);
    EXPECT_DOUBLE_EQ(f1(cm), f);
  }
}

TEST(Auc, Examples) {
  const std::vector<double> scores{0.9, 0.8, 0.4, 0.35};
  const std::vector<int> labels{1, 0, 0, 1};
  EXPECT_EQ(auc(scores, labels), 0.5);
  EXPECT_EQ(auc_pairwise_oracle(scores, labels), 0.5);
  const std::vector<double> separated{0.9, 0.8, 0.2, 0.1};
  const std::vector<int> sep_labels{1, 1, 0, 0};
  EXPECT_EQ(auc(separated, sep_labels), 1.0);
  const std::vector<double> flat(5, 0.3);
  const std::vector<int> flat_labels{1, 0, 1, 0, 0};
  EXPECT_EQ(auc(flat, flat_labels), 0.5);
  const std::vector<double> pair{0.7, 0.2};
  const std::vector<int> pair_labels{1, 0};
  EXPECT_EQ(auc_pairwise_oracle(pair, pair_labels), 1.0);
}

TEST(Auc, SingleClassIsAnError) {
  const std::vector<double> scores{0.1, 0.2};
  const std::vector<int> labels{1, 1};
  EXPECT_THROW(auc(scores, labels), DataError);
  EXPECT_THROW(auc_pairwise_oracle(scores, labels), DataError);
  const std::vector<double> nan{0.1, std::nan("")};
  const std::vector<int> mixed{1, 0};
  EXPECT_THROW(auc(nan, mixed), DataError);
}

TEST(Auc, EqualsPairwiseOracle) {
  std::mt19937 gen(2024);
  for (int trial = 0; trial < 500; ++trial) {
    const Instance inst = random_instance(gen);
    EXPECT_NEAR(auc(inst.scores, inst.labels), auc_pairwise_oracle(inst.scores, inst.labels), 1e-12);
  }
}

TEST(Auc, MonotoneTransformInvariance) {
  std::mt19937 gen(5);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = random_instance(gen);
    for (auto& s : inst.scores) s = s * 2 - 1;
    const double base = auc(inst.scores, inst.labels);
    std::vector<double> cubed;
    std::vector<double> squashed;
    for (double s : inst.scores) {
      cubed.push_back(s * s * s);
      squashed.push_back(1.0 / (1.0 + std::exp(-5.0 * s)));
    }
    EXPECT_NEAR(auc(cubed, inst.labels), base, 1e-12);
    EXPECT_NEAR(auc(squashed, inst.labels), base, 1e-12);
  }
}

TEST(Auc, ComplementWithoutTies) {
  std::mt19937 gen(6);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + gen() % 100;
    std::vector<double> scores(n);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
      scores[i] = u(gen);
      labels[i] = static_cast<int>(gen() % 2);
    }
    labels[0] = 1;
    labels[1] = 0;
    std::vector<double> flipped;
    for (double s : scores) flipped.push_back(1.0 - s);
    EXPECT_NEAR(auc(flipped, labels), 1.0 - auc(scores, labels), 1e-12);
  }
}

TEST(Report, RowLayout) {
  const std::vector<double> scores{0.9, 0.2, 0.6, 0.4};
  const std::vector<int> labels{1, 0, 0, 1};
  const MetricsReport r = evaluate_scores(scores, labels);
  EXPECT_EQ(r.accuracy, 0.5);
  EXPECT_EQ(r.auc, 0.75);
  for (double v : {r.accuracy, r.precision, r.recall, r.f1, r.auc}) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
  std::ostringstream out;
  write_metrics_header(out);
  write_metrics_row(out, "logistic_regression", "bow", "heldout", r);
  EXPECT_EQ(out.str(), "model,embedding,split,auc,f1,acc\nlogistic_regression,bow,heldout,0.7500,0.5000,0.5000\n");
}
