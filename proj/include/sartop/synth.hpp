#ifndef SARTOP_SYNTH_HPP_
#define SARTOP_SYNTH_HPP_

#include <cstdint>
#include <vector>

#include "sartop/dataset.hpp"

namespace sartop {

/// Seeded Gaussian mixture: one isotropic cluster per class, class means on
/// random directions scaled by `separation`, within-class stddev `spread`.
struct MixtureSpec {
  std::size_t n_classes = 7;
  std::size_t feature_dim = 8;
  std::vector<std::int64_t> counts;  // per class; empty -> default profile
  double separation = 3.0;
  double spread = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
  std::vector<std::int64_t> effective_counts() const;
};

/// Two-hop shifted copy chain: domain A at the base mixture, domain B one
/// shift step away, the target another step along the same per-class
/// directions (so B lies strictly between A and the target).
struct DomainChainSpec {
  MixtureSpec base;
  double shift_magnitude = 0.0;
};

/// The default 7-class imbalance profile (majority-heavy land-cover-style
/// counts) and a factor-scaled variant (counts rounded half away from zero).
std::vector<std::int64_t> default_imbalance_profile();
std::vector<std::int64_t> scaled_imbalance_profile(double factor);

/// Generates the mixture. Class means depend only on spec.seed; the sample
/// noise stream additionally depends on sample_stream, so several disjoint
/// datasets (train/test) can be drawn around identical means.
Dataset make_imbalanced_mixture(const MixtureSpec& spec,
                                std::uint64_t sample_stream = 0);

struct DomainChain {
  Dataset domain_a;
  Dataset domain_b;
  Dataset target;
};

/// One dataset of the chain; hop 0 = A, 1 = B, 2 = target.
Dataset make_domain_dataset(const DomainChainSpec& spec, std::size_t hop,
                            std::uint64_t sample_stream = 0);

DomainChain make_domain_chain(const DomainChainSpec& spec);

}  // namespace sartop

#endif  // SARTOP_SYNTH_HPP_
