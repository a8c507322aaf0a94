#ifndef SARTOP_SAMPLER_HPP_
#define SARTOP_SAMPLER_HPP_

#include <cstdint>
#include <vector>

#include "sartop/dataset.hpp"

namespace sartop {

/// Row ids of one mini-batch.
struct Batch {
  std::vector<std::size_t> rows;
};

struct NoiseSpec {
  double rate = 0.0;  // flip probability per sample
  std::uint64_t seed = 0;
};

/// One epoch of class-balanced batches: per-class counts inside every batch
/// differ by at most 1 (the classes receiving the remainder are picked by a
/// seeded shuffle per batch). Minority classes are recycled with
/// replacement; the epoch is long enough to cover the majority class once:
/// ceil(majority_size * n_classes / batch_size) batches.
std::vector<Batch> balanced_batches(const Dataset& ds, std::size_t batch_size,
                                    std::uint64_t seed);

/// Plain epoch: one seeded shuffle of all rows cut into consecutive batches
/// (last one may be short). Used when balanced sampling is switched off.
std::vector<Batch> shuffled_batches(const Dataset& ds, std::size_t batch_size,
                                    std::uint64_t seed);

/// Uniform with-replacement resample of the same size.
Dataset bootstrap_resample(const Dataset& ds, std::uint64_t seed);

/// Flips each label with probability spec.rate to a uniformly random
/// different class. Features are untouched.
Dataset inject_label_noise(const Dataset& ds, const NoiseSpec& spec);

struct SplitResult {
  Dataset train;
  Dataset test;
};

/// Per class, round(test_fraction * class_size) rows go to the test side.
/// Errors out if any class cannot place at least one row on each side.
SplitResult stratified_split(const Dataset& ds, double test_fraction,
                             std::uint64_t seed);

/// Fixed-count variant: exactly test_per_class test rows from every class.
SplitResult stratified_split_count(const Dataset& ds,
                                   std::size_t test_per_class,
                                   std::uint64_t seed);

/// Seeded per-class subsample of at most per_class rows (all rows of a
/// class if it is smaller).
Dataset subsample_per_class(const Dataset& ds, std::size_t per_class,
                            std::uint64_t seed);

}  // namespace sartop

#endif  // SARTOP_SAMPLER_HPP_
