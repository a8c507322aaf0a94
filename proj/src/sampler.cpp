#include "sartop/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sartop/error.hpp"
#include "sartop/rng.hpp"

namespace sartop {

namespace {

// Endless seeded pass over one class: shuffled order, reshuffled whenever
// it runs out. Minority classes just come around more often.
class ClassCycle {
 public:
  ClassCycle(const std::vector<std::size_t>& rows, std::uint64_t seed)
      : rows_(rows), rng_(seed) {
    rng_.shuffle(rows_);
  }

  std::size_t next() {
    if (pos_ == rows_.size()) {
      rng_.shuffle(rows_);
      pos_ = 0;
    }
    return rows_[pos_++];
  }

 private:
  std::vector<std::size_t> rows_;
  Rng rng_;
  std::size_t pos_ = 0;
};

void require_nonempty_classes(const Dataset& ds, const char* who) {
  for (std::size_t c = 0; c < ds.n_classes(); ++c) {
    if (ds.class_rows(c).empty()) {
      fail(ErrorCode::kInvalidArgument,
           std::string(who) + ": class " + std::to_string(c) +
               " has no samples");
    }
  }
}

}  // namespace

std::vector<Batch> balanced_batches(const Dataset& ds, std::size_t batch_size,
                                    std::uint64_t seed) {
  const std::size_t n = ds.n_classes();
  if (batch_size < n) {
    fail(ErrorCode::kInvalidArgument,
         "balanced_batches: batch_size must be >= n_classes");
  }
  require_nonempty_classes(ds, "balanced_batches");

  std::size_t majority = 0;
  for (std::size_t c = 0; c < n; ++c) {
    majority = std::max(majority, ds.class_rows(c).size());
  }
  const std::size_t n_batches = (majority * n + batch_size - 1) / batch_size;

  std::vector<ClassCycle> cycles;
  cycles.reserve(n);
  for (std::size_t c = 0; c < n; ++c) {
    cycles.emplace_back(ds.class_rows(c), Rng::mix(seed, 1000 + c));
  }
  Rng remainder_rng(Rng::mix(seed, 1));

  const std::size_t base = batch_size / n;
  const std::size_t remainder = batch_size % n;
  std::vector<std::size_t> class_order(n);
  std::iota(class_order.begin(), class_order.end(), 0);

  std::vector<Batch> batches(n_batches);
  for (auto& batch : batches) {
    batch.rows.reserve(batch_size);
    remainder_rng.shuffle(class_order);
    for (std::size_t t = 0; t < n; ++t) {
      const std::size_t c = class_order[t];
      const std::size_t count = base + (t < remainder ? 1 : 0);
      for (std::size_t i = 0; i < count; ++i) {
        batch.rows.push_back(cycles[c].next());
      }
    }
  }
  return batches;
}

std::vector<Batch> shuffled_batches(const Dataset& ds, std::size_t batch_size,
                                    std::uint64_t seed) {
  if (batch_size == 0) {
    fail(ErrorCode::kInvalidArgument, "shuffled_batches: batch_size is zero");
  }
  if (ds.n_rows() == 0) {
    fail(ErrorCode::kInvalidArgument, "shuffled_batches: empty dataset");
  }
  std::vector<std::size_t> order(ds.n_rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(seed);
  rng.shuffle(order);

  std::vector<Batch> batches;
  for (std::size_t start = 0; start < order.size(); start += batch_size) {
    Batch b;
    const std::size_t end = std::min(start + batch_size, order.size());
    b.rows.assign(order.begin() + start, order.begin() + end);
    batches.push_back(std::move(b));
  }
  return batches;
}

Dataset bootstrap_resample(const Dataset& ds, std::uint64_t seed) {
  if (ds.n_rows() == 0) {
    fail(ErrorCode::kInvalidArgument, "bootstrap_resample: empty dataset");
  }
  Rng rng(seed);
  std::vector<std::size_t> rows(ds.n_rows());
  for (auto& r : rows) r = rng.index(ds.n_rows());
  return ds.select(rows);
}

Dataset inject_label_noise(const Dataset& ds, const NoiseSpec& spec) {
  if (!(spec.rate >= 0.0 && spec.rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "noise rate must lie in [0, 1]");
  }
  if (spec.rate > 0.0 && ds.n_classes() < 2) {
    fail(ErrorCode::kInvalidArgument,
         "label noise needs at least 2 classes");
  }
  Rng rng(spec.seed);
  std::vector<std::int32_t> labels(ds.labels().begin(), ds.labels().end());
  for (auto& y : labels) {
    if (rng.uniform() < spec.rate) {
      // Uniform over the other n-1 classes.
      auto offset = static_cast<std::int32_t>(rng.index(ds.n_classes() - 1));
      y = offset >= y ? offset + 1 : offset;
    }
  }
  return ds.with_labels(std::move(labels));
}

namespace {

SplitResult split_by_counts(const Dataset& ds,
                            const std::vector<std::size_t>& test_counts,
                            std::uint64_t seed) {
  std::vector<std::size_t> train_rows;
  std::vector<std::size_t> test_rows;
  Rng rng(seed);
  for (std::size_t c = 0; c < ds.n_classes(); ++c) {
    std::vector<std::size_t> rows = ds.class_rows(c);
    const std::size_t want = test_counts[c];
    if (want < 1 || want >= rows.size()) {
      fail(ErrorCode::kInvalidArgument,
           "stratified split: class " + std::to_string(c) + " with " +
               std::to_string(rows.size()) +
               " samples cannot place at least one sample on each side");
    }
    rng.shuffle(rows);
    test_rows.insert(test_rows.end(), rows.begin(), rows.begin() + want);
    train_rows.insert(train_rows.end(), rows.begin() + want, rows.end());
  }
  std::sort(train_rows.begin(), train_rows.end());
  std::sort(test_rows.begin(), test_rows.end());
  return {ds.select(train_rows), ds.select(test_rows)};
}

}  // namespace

SplitResult stratified_split(const Dataset& ds, double test_fraction,
                             std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "test_fraction must lie in (0, 1)");
  }
  require_nonempty_classes(ds, "stratified_split");
  std::vector<std::size_t> counts(ds.n_classes());
  for (std::size_t c = 0; c < ds.n_classes(); ++c) {
    const double want =
        test_fraction * static_cast<double>(ds.class_rows(c).size());
    counts[c] = static_cast<std::size_t>(std::llround(want));
  }
  return split_by_counts(ds, counts, seed);
}

SplitResult stratified_split_count(const Dataset& ds,
                                   std::size_t test_per_class,
                                   std::uint64_t seed) {
  require_nonempty_classes(ds, "stratified_split_count");
  std::vector<std::size_t> counts(ds.n_classes(), test_per_class);
  return split_by_counts(ds, counts, seed);
}

Dataset subsample_per_class(const Dataset& ds, std::size_t per_class,
                            std::uint64_t seed) {
  if (per_class == 0) {
    fail(ErrorCode::kInvalidArgument, "subsample_per_class: zero per_class");
  }
  Rng rng(seed);
  std::vector<std::size_t> keep;
  for (std::size_t c = 0; c < ds.n_classes(); ++c) {
    std::vector<std::size_t> rows = ds.class_rows(c);
    rng.shuffle(rows);
    const std::size_t take = std::min(per_class, rows.size());
    keep.insert(keep.end(), rows.begin(), rows.begin() + take);
  }
  std::sort(keep.begin(), keep.end());
  return ds.select(keep);
}

}  // namespace sartop
