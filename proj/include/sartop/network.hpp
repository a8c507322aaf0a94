#ifndef SARTOP_NETWORK_HPP_
#define SARTOP_NETWORK_HPP_

#include <cstdint>
#include <vector>

#include "sartop/matrix.hpp"

namespace sartop {

struct NetworkSpec {
  std::size_t input_dim = 0;
  std::size_t width = 0;
  std::size_t n_blocks = 0;
  std::size_t n_classes = 0;
  std::uint64_t init_seed = 0;

  void validate() const;
};

/// One residual block: out = x + w2 * relu(w1 * x + b1) + b2.
struct ResidualBlock {
  Matrix w1;
  std::vector<double> b1;
  Matrix w2;
  std::vector<double> b2;
};

/// Residual multilayer network: relu affine stem, n residual blocks,
/// affine head. A value type; copy freely.
struct Network {
  NetworkSpec spec;
  Matrix stem_w;
  std::vector<double> stem_b;
  std::vector<ResidualBlock> blocks;
  Matrix head_w;
  std::vector<double> head_b;
  /// When set, stem and block parameters are excluded from optimizer
  /// updates (the freeze-features transfer mode).
  bool trunk_frozen = false;

  std::size_t parameter_count() const;
};

/// Gradients (or optimizer moments), shaped exactly like the Network
/// parameter arrays.
struct GradientSet {
  Matrix stem_w;
  std::vector<double> stem_b;
  std::vector<ResidualBlock> blocks;
  Matrix head_w;
  std::vector<double> head_b;
};

struct AdamState {
  GradientSet first_moment;
  GradientSet second_moment;
  std::size_t step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  double learning_rate = 1e-4;
};

/// Activations recorded by forward() for the matching backward() call.
struct ForwardCache {
  Matrix input;                  // batch x input_dim
  Matrix stem_pre;               // batch x width, pre-relu
  std::vector<Matrix> hidden;    // hidden[0] = stem output, hidden[k+1] = block k output
  std::vector<Matrix> inner_pre; // per block, pre-relu of the inner layer
  Matrix scores;                 // batch x n_classes
};

/// He-style Gaussian init (stddev sqrt(2/fan_in)) for weights, zero biases.
/// Deterministic for a fixed seed.
Network init_network(const NetworkSpec& spec);

/// Batched forward pass; the cache holds everything backward() needs.
ForwardCache forward(const Network& net, const Matrix& features);

/// Mean-over-batch gradients of the data loss plus 2*mu*weight for every
/// weight matrix (biases carry no penalty). loss_grads holds per-sample
/// d(loss)/d(scores), one row per batch row of the cache.
GradientSet backward(const Network& net, const ForwardCache& cache,
                     const Matrix& loss_grads, double mu);

/// mu * sum of squared Frobenius norms of the weight matrices.
double l2_penalty(const Network& net, double mu);

GradientSet zeros_like(const Network& net);

AdamState make_adam_state(const Network& net, double learning_rate);

/// In-place Adam update with bias correction. Honors net.trunk_frozen by
/// leaving stem and block parameters (and their moments) untouched.
void adam_step(Network& net, const GradientSet& grads, AdamState& state);

enum class TransferMode {
  kHeadOnlyReinit,   // copy trunk, fresh head, trunk stays trainable
  kFreezeFeatures,   // copy trunk, fresh head, trunk frozen
};

/// Copies stem and blocks from the source and re-initializes the head for
/// a new class count.
Network transfer_init(const Network& source, std::size_t new_n_classes,
                      TransferMode mode, std::uint64_t seed);

/// Per row: class indices sorted by descending score, exact ties broken by
/// ascending class index, truncated to k.
std::vector<std::vector<std::int32_t>> predict_topk(const Network& net,
                                                    const Matrix& features,
                                                    std::size_t k);

/// Ranking of one score row by the predict_topk ordering.
std::vector<std::int32_t> rank_scores(std::span<const double> scores,
                                      std::size_t k);

}  // namespace sartop

#endif  // SARTOP_NETWORK_HPP_
