#ifndef SARTOP_LOSS_HPP_
#define SARTOP_LOSS_HPP_

#include <cstdint>
#include <span>
#include <vector>

namespace sartop {

/// Per-class sample counts of a labelled collection.
struct ClassStats {
  std::vector<std::int64_t> counts;
};

/// Cost weights, one per class, nonnegative and summing to 1.
struct ClassWeights {
  std::vector<double> weights;
};

/// Hyper-parameters of the combined loss: trade-off lambda in [0,1],
/// temperature tau > 0, L2 coefficient mu >= 0.
struct LossConfig {
  double lambda = 0.2;
  double tau = 1.0;
  double mu = 0.25;

  void validate() const;
};

/// A loss value together with its gradient w.r.t. the score vector.
struct LossValueGrad {
  double value = 0.0;
  std::vector<double> grad;
};

/// Cost weight per class: w_y = (1 - N_y / sum_i N_i) / (n - 1).
/// The weights always sum to exactly 1 over the classes.
ClassWeights class_weights(const ClassStats& stats);

/// Uniform weights 1/n; the degenerate profile used when cost weighting
/// is switched off.
ClassWeights uniform_class_weights(std::size_t n_classes);

/// Temperature-smoothed top-2 loss.
///
/// Over the unordered 2-subsets S of the label set, with margin
/// d(S) = 1 if label not in S else 0 and half-sum h(S) = (s_i + s_j)/2:
///
///   L = tau * LSE_{all S} [(d(S) + h(S)) / tau]
///     - tau * LSE_{S containing label} [h(S) / tau]
///
/// Evaluated as tau * softplus(U - V) where U is the log-sum-exp over
/// subsets NOT containing the label and V over subsets containing it;
/// the shared terms cancel exactly, so the value stays accurate (and
/// nonnegative) even when the true label dominates. For n = 2 the first
/// set is empty and the loss is identically zero.
///
/// The gradient is d/ds_m = (P1(m) - P2(m)) / 2, where P1(m) is the
/// softmax mass of first-term subsets containing m and P2(m) the same
/// for the second term.
LossValueGrad top2_smooth_loss(std::span<const double> scores,
                               std::size_t label, double tau);

/// Zero-temperature limit of top2_smooth_loss: max replaces log-sum-exp
/// on both sides. Reference oracle for the temperature-limit property.
double top2_hard_reference(std::span<const double> scores, std::size_t label);

/// Standard categorical cross-entropy -log softmax(s)_y with analytic
/// gradient softmax(s) - onehot(y).
LossValueGrad cross_entropy(std::span<const double> scores, std::size_t label);

/// Data terms of the combined objective:
///   (1 - lambda) * cross_entropy + w_label * lambda * top2_smooth_loss.
/// The L2 penalty on network weights is applied separately (see
/// l2_penalty in network.hpp); cfg.mu is carried but not used here.
LossValueGrad combined_data_loss(std::span<const double> scores,
                                 std::size_t label, const ClassWeights& w,
                                 const LossConfig& cfg);

/// Numerically stable softmax of a score row.
std::vector<double> softmax(std::span<const double> scores);

}  // namespace sartop

#endif  // SARTOP_LOSS_HPP_
