#include "sartop/metrics.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "sartop/error.hpp"
#include "sartop/network.hpp"

namespace sartop {

std::int64_t ConfusionMatrix::total() const {
  return std::accumulate(counts.begin(), counts.end(), std::int64_t{0});
}

std::int64_t ConfusionMatrix::trace() const {
  std::int64_t acc = 0;
  for (std::size_t c = 0; c < n_classes; ++c) acc += at(c, c);
  return acc;
}

ConfusionMatrix confusion(std::span<const std::int32_t> true_labels,
                          std::span<const std::int32_t> predicted_labels,
                          std::size_t n_classes) {
  if (true_labels.size() != predicted_labels.size()) {
    fail(ErrorCode::kShapeMismatch,
         "confusion: label sequences differ in length");
  }
  if (n_classes == 0) {
    fail(ErrorCode::kInvalidArgument, "confusion: n_classes must be >= 1");
  }
  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(n_classes * n_classes, 0);
  for (std::size_t i = 0; i < true_labels.size(); ++i) {
    const std::int32_t t = true_labels[i];
    const std::int32_t p = predicted_labels[i];
    if (t < 0 || static_cast<std::size_t>(t) >= n_classes || p < 0 ||
        static_cast<std::size_t>(p) >= n_classes) {
      fail(ErrorCode::kInvalidArgument,
           "confusion: label out of range at row " + std::to_string(i));
    }
    cm.counts[static_cast<std::size_t>(t) * n_classes +
              static_cast<std::size_t>(p)] += 1;
  }
  return cm;
}

double topk_accuracy(const Matrix& score_rows,
                     std::span<const std::int32_t> true_labels,
                     std::size_t k) {
  if (score_rows.rows == 0) {
    fail(ErrorCode::kInvalidArgument, "topk_accuracy: no rows to evaluate");
  }
  if (score_rows.rows != true_labels.size()) {
    fail(ErrorCode::kShapeMismatch,
         "topk_accuracy: row and label counts differ");
  }
  if (k == 0 || k > score_rows.cols) {
    fail(ErrorCode::kInvalidArgument, "topk_accuracy: k out of range");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < score_rows.rows; ++i) {
    const auto ranked = rank_scores(score_rows.row(i), k);
    if (std::find(ranked.begin(), ranked.end(), true_labels[i]) !=
        ranked.end()) {
      ++hits;
    }
  }
  return static_cast<double>(hits) / static_cast<double>(score_rows.rows);
}

MetricsReport macro_f1(const ConfusionMatrix& cm) {
  const std::size_t n = cm.n_classes;
  if (n == 0 || cm.counts.size() != n * n) {
    fail(ErrorCode::kInvalidArgument, "macro_f1: invalid confusion matrix");
  }
  MetricsReport report;
  report.precision.resize(n);
  report.recall.resize(n);
  report.f1.resize(n);

  double f1_sum = 0.0;
  for (std::size_t c = 0; c < n; ++c) {
    std::int64_t tp = cm.at(c, c);
    std::int64_t fp = 0;
    std::int64_t fn = 0;
    for (std::size_t o = 0; o < n; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    const double p = (tp + fp) > 0
                         ? static_cast<double>(tp) / static_cast<double>(tp + fp)
                         : 0.0;
    const double r = (tp + fn) > 0
                         ? static_cast<double>(tp) / static_cast<double>(tp + fn)
                         : 0.0;
    const double f = (p + r) > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    report.precision[c] = p;
    report.recall[c] = r;
    report.f1[c] = f;
    f1_sum += f;
  }
  report.macro_f1 = f1_sum / static_cast<double>(n);
  const std::int64_t total = cm.total();
  report.top1_accuracy =
      total > 0 ? static_cast<double>(cm.trace()) / static_cast<double>(total)
                : 0.0;
  return report;
}

MetricsReport evaluate(const Matrix& score_rows,
                       std::span<const std::int32_t> true_labels,
                       std::size_t n_classes) {
  if (score_rows.cols != n_classes) {
    fail(ErrorCode::kShapeMismatch,
         "evaluate: score width does not match n_classes");
  }
  std::vector<std::int32_t> top1(score_rows.rows);
  for (std::size_t i = 0; i < score_rows.rows; ++i) {
    top1[i] = rank_scores(score_rows.row(i), 1)[0];
  }
  MetricsReport report = macro_f1(confusion(true_labels, top1, n_classes));
  report.top2_accuracy =
      topk_accuracy(score_rows, true_labels, std::min<std::size_t>(2, n_classes));
  return report;
}

std::vector<std::int32_t> majority_vote(
    const std::vector<ModelPredictions>& models) {
  if (models.empty()) {
    fail(ErrorCode::kInvalidArgument, "majority_vote: no models");
  }
  const std::size_t n_samples = models.front().ranked.size();
  const std::size_t n_classes = models.front().probs.cols;
  for (const auto& m : models) {
    if (m.ranked.size() != n_samples || m.probs.rows != n_samples ||
        m.probs.cols != n_classes) {
      fail(ErrorCode::kShapeMismatch,
           "majority_vote: models disagree on sample count or class count");
    }
  }

  std::vector<std::int32_t> out(n_samples);
  std::vector<std::int64_t> votes(n_classes);
  std::vector<double> mean_prob(n_classes);
  for (std::size_t i = 0; i < n_samples; ++i) {
    std::fill(votes.begin(), votes.end(), 0);
    std::fill(mean_prob.begin(), mean_prob.end(), 0.0);
    for (const auto& m : models) {
      if (m.ranked[i].empty()) {
        fail(ErrorCode::kInvalidArgument, "majority_vote: empty ranking");
      }
      votes[static_cast<std::size_t>(m.ranked[i][0])] += 1;
      for (std::size_t c = 0; c < n_classes; ++c) {
        mean_prob[c] += m.probs.at(i, c);
      }
    }
    const std::int64_t best_votes = *std::max_element(votes.begin(), votes.end());
    std::int32_t winner = -1;
    double winner_prob = -1.0;
    for (std::size_t c = 0; c < n_classes; ++c) {
      if (votes[c] != best_votes) continue;
      if (mean_prob[c] > winner_prob) {
        winner_prob = mean_prob[c];
        winner = static_cast<std::int32_t>(c);
      }
    }
    out[i] = winner;
  }
  return out;
}

}  // namespace sartop
