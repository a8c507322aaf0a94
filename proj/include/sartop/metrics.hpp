#ifndef SARTOP_METRICS_HPP_
#define SARTOP_METRICS_HPP_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "sartop/matrix.hpp"

namespace sartop {

/// n x n prediction counts; rows are true classes, columns predicted.
struct ConfusionMatrix {
  std::size_t n_classes = 0;
  std::vector<std::int64_t> counts;  // row-major

  std::int64_t at(std::size_t truth, std::size_t pred) const {
    return counts[truth * n_classes + pred];
  }
  std::int64_t total() const;
  std::int64_t trace() const;
};

struct MetricsReport {
  std::vector<double> precision;
  std::vector<double> recall;
  std::vector<double> f1;
  double macro_f1 = 0.0;
  double top1_accuracy = 0.0;
  /// Only known when the report was built from score rows; a confusion
  /// matrix alone carries top-1 information.
  std::optional<double> top2_accuracy;
};

ConfusionMatrix confusion(std::span<const std::int32_t> true_labels,
                          std::span<const std::int32_t> predicted_labels,
                          std::size_t n_classes);

/// Fraction of rows whose true label is among the k best scores
/// (descending score, ties by ascending class index). Empty input is an
/// error, not zero.
double topk_accuracy(const Matrix& score_rows,
                     std::span<const std::int32_t> true_labels,
                     std::size_t k);

/// Per class: p = TP/(TP+FP), r = TP/(TP+FN), f1 = 2/(1/p + 1/r), with the
/// 0/0 -> 0 convention; macro_f1 is the unweighted mean of per-class f1.
/// top1_accuracy comes from the matrix trace.
MetricsReport macro_f1(const ConfusionMatrix& cm);

/// Full report from score rows: confusion-based precision/recall/f1 plus
/// top-1 and top-2 accuracies.
MetricsReport evaluate(const Matrix& score_rows,
                       std::span<const std::int32_t> true_labels,
                       std::size_t n_classes);

/// One model's test-set output for ensemble voting.
struct ModelPredictions {
  std::vector<std::vector<std::int32_t>> ranked;  // per sample, best first
  Matrix probs;                                   // per sample softmax row
};

/// Plurality vote over the models' top-1 predictions. Ties go to the tied
/// class with the highest mean softmax probability, then to the lowest
/// class index.
std::vector<std::int32_t> majority_vote(
    const std::vector<ModelPredictions>& models);

}  // namespace sartop

#endif  // SARTOP_METRICS_HPP_
