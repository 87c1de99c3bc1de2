#include "tweetgauge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "tweetgauge/error.hpp"
#include "tweetgauge/text_io.hpp"

namespace tweetgauge {

namespace {

void check_inputs(std::span<const double> scores, std::span<const int> labels) {
  if (scores.empty()) throw DataError("metrics need at least one scored example");
  if (scores.size() != labels.size()) {
    throw DataError("scores (" + std::to_string(scores.size()) + ") and labels (" +
                    std::to_string(labels.size()) + ") differ in length");
  }
  for (int label : labels) {
    if (label != 0 && label != 1) throw DataError("labels must be 0 or 1");
  }
  for (double score : scores) {
    if (std::isnan(score)) throw DataError("scores must not be NaN");
  }
}

double ratio(std::size_t numerator, std::size_t denominator) {
  return denominator == 0 ? 0.0 : static_cast<double>(numerator) / static_cast<double>(denominator);
}

void check_both_classes(std::size_t positives, std::size_t negatives) {
  if (positives == 0 || negatives == 0) {
    throw DataError("AUC is undefined when only one class is present");
  }
}

}  // namespace

ConfusionMatrix confusion(std::span<const double> scores, std::span<const int> labels, double threshold) {
  check_inputs(scores, labels);
  if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      ++(predicted ? cm.tp : cm.fn);
    } else {
      ++(predicted ? cm.fp : cm.tn);
    }
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) { return ratio(cm.tp + cm.tn, cm.total()); }
double precision(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fp); }
double recall(const ConfusionMatrix& cm) { return ratio(cm.tp, cm.tp + cm.fn); }

double f1(const ConfusionMatrix& cm) {
  const double p = precision(cm);
  const double r = recall(cm);
  if (p + r == 0.0) return 0.0;
  return 2.0 * (p * r) / (p + r);
}

double auc(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  // Sweep thresholds from high to low. Each tie group moves the ROC point by
  // (negatives, positives); the trapezoid under that step, in units of
  // pairs, is negatives * (tp_before + positives / 2).
  double area = 0.0;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t group_pos = 0;
    std::size_t group_neg = 0;
    std::size_t j = i;
    for (; j < order.size() && scores[order[j]] == scores[order[i]]; ++j) {
      (labels[order[j]] == 1 ? group_pos : group_neg) += 1;
    }
    area += static_cast<double>(group_neg) * (static_cast<double>(tp) + 0.5 * static_cast<double>(group_pos));
    tp += group_pos;
    fp += group_neg;
    i = j;
  }
  check_both_classes(tp, fp);
  return area / (static_cast<double>(tp) * static_cast<double>(fp));
}

double auc_pairwise_oracle(std::span<const double> scores, std::span<const int> labels) {
  check_inputs(scores, labels);
  double wins = 0.0;
  std::size_t positives = 0;
  std::size_t negatives = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] == 1 ? positives : negatives) += 1;
  check_both_classes(positives, negatives);
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (labels[i] != 1) continue;
    for (std::size_t j = 0; j < scores.size(); ++j) {
      if (labels[j] != 0) continue;
      if (scores[i] > scores[j]) {
        wins += 1.0;
      } else if (scores[i] == scores[j]) {
        wins += 0.5;
      }
    }
  }
  return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

MetricsReport evaluate_scores(std::span<const double> scores, std::span<const int> labels, double threshold) {
  const ConfusionMatrix cm = confusion(scores, labels, threshold);
  MetricsReport report;
  report.accuracy = accuracy(cm);
  report.precision = precision(cm);
  report.recall = recall(cm);
  report.f1 = f1(cm);
  report.auc = auc(scores, labels);
  return report;
}

void write_metrics_header(std::ostream& out) { out << "model,embedding,split,auc,f1,acc\n"; }

void write_metrics_row(std::ostream& out, std::string_view model, std::string_view embedding,
                       std::string_view split, const MetricsReport& report) {
  out << csv_field(model) << ',' << csv_field(embedding) << ',' << csv_field(split) << ','
      << format_fixed(report.auc, 4) << ',' << format_fixed(report.f1, 4) << ','
      << format_fixed(report.accuracy, 4) << '\n';
}

}  // namespace tweetgauge
