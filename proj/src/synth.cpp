#include "sartop/synth.hpp"

#include <cmath>
#include <string>

#include "sartop/error.hpp"
#include "sartop/rng.hpp"

namespace sartop {

namespace {

constexpr std::uint64_t kMeansStream = 0xA11CE5;
constexpr std::uint64_t kShiftStream = 0x5117F5;
constexpr std::uint64_t kSampleStream = 0x5A3B1E;

std::vector<std::vector<double>> class_means(const MixtureSpec& spec) {
  Rng rng(Rng::mix(spec.seed, kMeansStream));
  std::vector<std::vector<double>> means(spec.n_classes);
  for (auto& mu : means) {
    mu.resize(spec.feature_dim);
    double norm_sq = 0.0;
    for (auto& v : mu) {
      v = rng.normal();
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    // A zero draw is astronomically unlikely; fall back to axis 0.
    if (norm == 0.0) {
      mu.assign(spec.feature_dim, 0.0);
      mu[0] = 1.0;
    } else {
      for (auto& v : mu) v /= norm;
    }
    for (auto& v : mu) v *= spec.separation;
  }
  return means;
}

std::vector<std::vector<double>> shift_directions(const MixtureSpec& spec) {
  Rng rng(Rng::mix(spec.seed, kShiftStream));
  std::vector<std::vector<double>> dirs(spec.n_classes);
  for (auto& d : dirs) {
    d.resize(spec.feature_dim);
    double norm_sq = 0.0;
    for (auto& v : d) {
      v = rng.normal();
      norm_sq += v * v;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm == 0.0) {
      d.assign(spec.feature_dim, 0.0);
      d[0] = 1.0;
    } else {
      for (auto& v : d) v /= norm;
    }
  }
  return dirs;
}

Dataset sample_around_means(const MixtureSpec& spec,
                            const std::vector<std::vector<double>>& means,
                            std::uint64_t sample_stream) {
  const auto counts = spec.effective_counts();
  Rng rng(Rng::mix(Rng::mix(spec.seed, kSampleStream), sample_stream));

  std::size_t total = 0;
  for (auto c : counts) total += static_cast<std::size_t>(c);

  std::vector<double> features;
  features.reserve(total * spec.feature_dim);
  std::vector<std::int32_t> labels;
  labels.reserve(total);
  for (std::size_t c = 0; c < spec.n_classes; ++c) {
    for (std::int64_t i = 0; i < counts[c]; ++i) {
      for (std::size_t f = 0; f < spec.feature_dim; ++f) {
        features.push_back(means[c][f] + spec.spread * rng.normal());
      }
      labels.push_back(static_cast<std::int32_t>(c));
    }
  }
  return Dataset::make(spec.n_classes, spec.feature_dim, std::move(features),
                       std::move(labels));
}

}  // namespace

void MixtureSpec::validate() const {
  if (n_classes < 2) {
    fail(ErrorCode::kInvalidArgument, "mixture: n_classes must be >= 2");
  }
  if (feature_dim == 0) {
    fail(ErrorCode::kInvalidArgument, "mixture: feature_dim must be >= 1");
  }
  if (!(separation >= 0.0) || !(spread > 0.0)) {
    fail(ErrorCode::kInvalidArgument,
         "mixture: separation must be >= 0 and spread > 0");
  }
  const auto c = effective_counts();
  if (c.size() != n_classes) {
    fail(ErrorCode::kShapeMismatch,
         "mixture: counts length does not match n_classes");
  }
  for (auto v : c) {
    if (v <= 0) {
      fail(ErrorCode::kInvalidArgument, "mixture: counts must be positive");
    }
  }
}

std::vector<std::int64_t> MixtureSpec::effective_counts() const {
  if (!counts.empty()) return counts;
  if (n_classes == 7) return scaled_imbalance_profile(0.1);
  // No default profile for other class counts; spread the default total
  // evenly.
  return std::vector<std::int64_t>(n_classes, 500);
}

std::vector<std::int64_t> default_imbalance_profile() {
  return {24930, 2979, 4485, 6029, 4911, 2240, 6826};
}

std::vector<std::int64_t> scaled_imbalance_profile(double factor) {
  if (!(factor > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "profile factor must be > 0");
  }
  auto counts = default_imbalance_profile();
  for (auto& c : counts) {
    c = std::llround(static_cast<double>(c) * factor);
    if (c < 1) c = 1;
  }
  return counts;
}

Dataset make_imbalanced_mixture(const MixtureSpec& spec,
                                std::uint64_t sample_stream) {
  spec.validate();
  return sample_around_means(spec, class_means(spec), sample_stream);
}

Dataset make_domain_dataset(const DomainChainSpec& spec, std::size_t hop,
                            std::uint64_t sample_stream) {
  spec.base.validate();
  if (!(spec.shift_magnitude >= 0.0)) {
    fail(ErrorCode::kInvalidArgument, "chain: shift_magnitude must be >= 0");
  }
  if (hop > 2) {
    fail(ErrorCode::kInvalidArgument, "chain: hop must be 0, 1 or 2");
  }
  auto means = class_means(spec.base);
  if (hop > 0 && spec.shift_magnitude > 0.0) {
    const auto dirs = shift_directions(spec.base);
    const double step = spec.shift_magnitude * static_cast<double>(hop);
    for (std::size_t c = 0; c < means.size(); ++c) {
      for (std::size_t f = 0; f < means[c].size(); ++f) {
        means[c][f] += step * dirs[c][f];
      }
    }
  }
  // Distinct sample noise per hop even at shift 0.
  return sample_around_means(spec.base, means,
                             Rng::mix(sample_stream, 7000 + hop));
}

DomainChain make_domain_chain(const DomainChainSpec& spec) {
  DomainChain chain;
  chain.domain_a = make_domain_dataset(spec, 0);
  chain.domain_b = make_domain_dataset(spec, 1);
  chain.target = make_domain_dataset(spec, 2);
  return chain;
}

}  // namespace sartop
