#include "sartop/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sartop/error.hpp"

namespace sartop {

namespace {

void check_scores(std::span<const double> scores, std::size_t label) {
  if (scores.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "score vector needs at least 2 classes");
  }
  if (label >= scores.size()) {
    fail(ErrorCode::kInvalidArgument,
         "label " + std::to_string(label) + " out of range for " +
             std::to_string(scores.size()) + " classes");
  }
  for (double s : scores) {
    if (!std::isfinite(s)) {
      fail(ErrorCode::kDomain, "score vector contains a non-finite entry");
    }
  }
}

// log(1 + exp(x)) without overflow for large x or loss of precision for
// very negative x.
double softplus(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

// Standard max-subtracted log-sum-exp. Returns -inf for an empty range.
double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) return -std::numeric_limits<double>::infinity();
  double m = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

}  // namespace

void LossConfig::validate() const {
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  }
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    fail(ErrorCode::kDomain, "tau must be a positive finite temperature");
  }
  if (!(mu >= 0.0) || !std::isfinite(mu)) {
    fail(ErrorCode::kInvalidArgument, "mu must be a nonnegative finite value");
  }
}

ClassWeights class_weights(const ClassStats& stats) {
  const std::size_t n = stats.counts.size();
  if (n < 2) {
    fail(ErrorCode::kInvalidArgument,
         "class_weights needs at least 2 classes");
  }
  std::int64_t total = 0;
  for (std::int64_t c : stats.counts) {
    if (c < 0) fail(ErrorCode::kInvalidArgument, "negative class count");
    total += c;
  }
  if (total == 0) {
    fail(ErrorCode::kInvalidArgument, "class_weights: total count is zero");
  }
  ClassWeights out;
  out.weights.resize(n);
  for (std::size_t y = 0; y < n; ++y) {
    out.weights[y] = (1.0 - static_cast<double>(stats.counts[y]) /
                                static_cast<double>(total)) /
                     static_cast<double>(n - 1);
  }
  return out;
}

ClassWeights uniform_class_weights(std::size_t n_classes) {
  if (n_classes < 2) {
    fail(ErrorCode::kInvalidArgument,
         "uniform_class_weights needs at least 2 classes");
  }
  ClassWeights out;
  out.weights.assign(n_classes, 1.0 / static_cast<double>(n_classes));
  return out;
}

LossValueGrad top2_smooth_loss(std::span<const double> scores,
                               std::size_t label, double tau) {
  check_scores(scores, label);
  if (!(tau > 0.0) || !std::isfinite(tau)) {
    fail(ErrorCode::kDomain, "tau must be a positive finite temperature");
  }

  const std::size_t n = scores.size();
  LossValueGrad out;
  out.grad.assign(n, 0.0);

  // Exponents for the subsets split by whether they contain the label.
  // Pairs containing the label have margin 0, so their first-term and
  // second-term exponents coincide and cancel in the value.
  std::vector<double> with_label;      // h(S)/tau, S = {label, j}
  std::vector<std::size_t> with_other; // the j of each with_label entry
  std::vector<double> without_label;   // (1 + h(S))/tau
  std::vector<std::pair<std::size_t, std::size_t>> without_members;
  with_label.reserve(n - 1);
  with_other.reserve(n - 1);
  without_label.reserve(n * (n - 1) / 2);
  without_members.reserve(n * (n - 1) / 2);

  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double half_sum = 0.5 * (scores[i] + scores[j]);
      if (i == label || j == label) {
        with_label.push_back(half_sum / tau);
        with_other.push_back(i == label ? j : i);
      } else {
        without_label.push_back((1.0 + half_sum) / tau);
        without_members.emplace_back(i, j);
      }
    }
  }

  const double lse_with = log_sum_exp(with_label);
  const double lse_without = log_sum_exp(without_label);
  // Value of the difference of the two log-sum-exp terms; the with-label
  // terms appear in both and reduce to softplus of the gap between the
  // two disjoint groups.
  out.value = (n == 2) ? 0.0 : tau * softplus(lse_without - lse_with);

  if (n == 2) return out;  // single subset, constant loss

  // First-term softmax over all subsets: sum = e^{lse_with} + e^{lse_without}.
  // sigma is the total first-term mass of the without-label group.
  const double sigma = 1.0 / (1.0 + std::exp(lse_with - lse_without));

  // Contributions of subsets containing the label: first-term mass is
  // (1 - sigma) * p2, second-term mass is p2 (their own softmax).
  for (std::size_t t = 0; t < with_label.size(); ++t) {
    const double p2 = std::exp(with_label[t] - lse_with);
    const double diff = 0.5 * ((1.0 - sigma) * p2 - p2);  // = -0.5*sigma*p2
    out.grad[label] += diff;
    out.grad[with_other[t]] += diff;
  }
  // Subsets without the label only appear in the first term.
  for (std::size_t t = 0; t < without_label.size(); ++t) {
    const double p1 = sigma * std::exp(without_label[t] - lse_without);
    out.grad[without_members[t].first] += 0.5 * p1;
    out.grad[without_members[t].second] += 0.5 * p1;
  }
  return out;
}

double top2_hard_reference(std::span<const double> scores, std::size_t label) {
  check_scores(scores, label);
  const std::size_t n = scores.size();
  double best_all = -std::numeric_limits<double>::infinity();
  double best_with = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double half_sum = 0.5 * (scores[i] + scores[j]);
      const bool has_label = (i == label || j == label);
      best_all = std::max(best_all, (has_label ? 0.0 : 1.0) + half_sum);
      if (has_label) best_with = std::max(best_with, half_sum);
    }
  }
  return best_all - best_with;
}

LossValueGrad cross_entropy(std::span<const double> scores,
                            std::size_t label) {
  check_scores(scores, label);
  const std::size_t n = scores.size();
  const double m = *std::max_element(scores.begin(), scores.end());

  LossValueGrad out;
  out.grad.resize(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.grad[i] = std::exp(scores[i] - m);
    sum += out.grad[i];
  }
  // LSE(s) - s_label. When the label attains the max, fold its own unit
  // term out of the log so small losses keep full precision.
  if (scores[label] == m) {
    out.value = std::log1p(sum - out.grad[label]);
  } else {
    out.value = (m - scores[label]) + std::log(sum);
  }
  for (std::size_t i = 0; i < n; ++i) out.grad[i] /= sum;
  out.grad[label] -= 1.0;
  return out;
}

LossValueGrad combined_data_loss(std::span<const double> scores,
                                 std::size_t label, const ClassWeights& w,
                                 const LossConfig& cfg) {
  cfg.validate();
  if (w.weights.size() != scores.size()) {
    fail(ErrorCode::kShapeMismatch,
         "class weight vector length does not match score vector");
  }
  check_scores(scores, label);

  const double ce_coef = 1.0 - cfg.lambda;
  const double top2_coef = w.weights[label] * cfg.lambda;

  LossValueGrad out;
  out.grad.assign(scores.size(), 0.0);
  if (ce_coef != 0.0) {
    LossValueGrad ce = cross_entropy(scores, label);
    out.value += ce_coef * ce.value;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out.grad[i] += ce_coef * ce.grad[i];
    }
  }
  if (cfg.lambda != 0.0) {
    LossValueGrad t2 = top2_smooth_loss(scores, label, cfg.tau);
    out.value += top2_coef * t2.value;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      out.grad[i] += top2_coef * t2.grad[i];
    }
  }
  return out;
}

std::vector<double> softmax(std::span<const double> scores) {
  if (scores.empty()) {
    fail(ErrorCode::kInvalidArgument, "softmax of an empty score vector");
  }
  const double m = *std::max_element(scores.begin(), scores.end());
  std::vector<double> out(scores.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out[i] = std::exp(scores[i] - m);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace sartop
