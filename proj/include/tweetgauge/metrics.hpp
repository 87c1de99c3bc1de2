#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string_view>

namespace tweetgauge {

struct ConfusionMatrix {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionMatrix&) const = default;
};

/// Predicted positive iff score >= threshold.
ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels,
                          double threshold = 0.5);

// A metric whose denominator is zero is defined as 0.
double accuracy(const ConfusionMatrix& cm);
double precision(const ConfusionMatrix& cm);
double recall(const ConfusionMatrix& cm);
double f1(const ConfusionMatrix& cm);

/// ROC-AUC by a descending-score sweep with trapezoids over tie groups.
/// A tied positive/negative pair contributes 1/2. Throws DataError when only
/// one class is present.
double auc(std::span<const double> scores, std::span<const int> labels);

/// The same quantity by direct O(n^2) enumeration of positive/negative pairs.
double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels);

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
};

MetricsReport evaluate_scores(std::span<const double> scores, std::span<const int> labels,
                              double threshold = 0.5);

/// `model,embedding,split,auc,f1,acc`
void write_metrics_header(std::ostream& out);
void write_metrics_row(std::ostream& out, std::string_view model, std::string_view embedding,
                       std::string_view split, const MetricsReport& report);

}  // namespace tweetgauge
