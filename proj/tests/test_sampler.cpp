#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "sartop/error.hpp"
#include "sartop/sampler.hpp"

using namespace sartop;

namespace {

// Rows carry their row index as the single feature, so identity is easy to
// track through resampling.
Dataset tagged_dataset(const std::vector<std::int64_t>& class_counts) {
  std::vector<double> features;
  std::vector<std::int32_t> labels;
  std::size_t row = 0;
  for (std::size_t c = 0; c < class_counts.size(); ++c) {
    for (std::int64_t i = 0; i < class_counts[c]; ++i) {
      features.push_back(static_cast<double>(row++));
      labels.push_back(static_cast<std::int32_t>(c));
    }
  }
  return Dataset::make(class_counts.size(), 1, std::move(features),
                       std::move(labels));
}

std::map<std::int32_t, std::size_t> batch_class_counts(const Dataset& ds,
                                                       const Batch& batch) {
  std::map<std::int32_t, std::size_t> counts;
  for (std::size_t id : batch.rows) counts[ds.label(id)] += 1;
  return counts;
}

}  // namespace

TEST_CASE("manifest round-trips through text") {
  const Dataset ds = tagged_dataset({3, 4, 2});
  const Dataset back = parse_manifest(manifest_to_string(ds));
  CHECK(back.n_rows() == ds.n_rows());
  CHECK(back.n_classes() == ds.n_classes());
  CHECK(back.n_features() == ds.n_features());
  CHECK(back.features() == ds.features());
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    CHECK(back.label(i) == ds.label(i));
  }
}

TEST_CASE("manifest loader rejects inconsistent input") {
  CHECK_THROWS_AS(parse_manifest(""), Error);
  CHECK_THROWS_AS(parse_manifest("2,1\n"), Error);                    // short header
  CHECK_THROWS_AS(parse_manifest("2,1,1\n0,1.0,2.0\n"), Error);       // extra field
  CHECK_THROWS_AS(parse_manifest("2,2,1\n0,1.0\n"), Error);           // missing field
  CHECK_THROWS_AS(parse_manifest("2,1,1\n5,1.0\n"), Error);           // label range
  CHECK_THROWS_AS(parse_manifest("2,1,2\n0,1.0\n"), Error);           // row count
  CHECK_THROWS_AS(parse_manifest("2,1,1\n0,abc\n"), Error);           // bad number
  CHECK_THROWS_AS(parse_manifest("2,1,0\n0,1.0\n"), Error);           // surplus row
  CHECK_NOTHROW(parse_manifest("2,1,2\n0,1.5\n1,-2.5\n"));
}

TEST_CASE("balanced batches split evenly when divisible") {
  const Dataset ds = tagged_dataset({30, 5, 12, 8, 20, 3, 16});
  const auto batches = balanced_batches(ds, 14, 42);
  // ceil(30 * 7 / 14) = 15 batches covering the majority class once.
  CHECK(batches.size() == 15);
  for (const auto& batch : batches) {
    CHECK(batch.rows.size() == 14);
    for (const auto& [cls, count] : batch_class_counts(ds, batch)) {
      (void)cls;
      CHECK(count == 2);
    }
  }
}

TEST_CASE("balanced batches keep the class spread at one") {
  const Dataset ds = tagged_dataset({30, 5, 12, 8, 20, 3, 16});
  const auto batches = balanced_batches(ds, 16, 43);
  CHECK(batches.size() == (30 * 7 + 15) / 16);
  for (const auto& batch : batches) {
    const auto counts = batch_class_counts(ds, batch);
    CHECK(counts.size() == 7);
    std::size_t lo = batch.rows.size(), hi = 0;
    for (const auto& [cls, count] : counts) {
      (void)cls;
      lo = std::min(lo, count);
      hi = std::max(hi, count);
    }
    CHECK(hi - lo <= 1);
  }
}

TEST_CASE("minority classes recycle with replacement") {
  const Dataset ds = tagged_dataset({40, 3, 10});
  const auto batches = balanced_batches(ds, 9, 7);
  std::size_t class1_draws = 0;
  for (const auto& batch : batches) {
    for (std::size_t id : batch.rows) {
      CHECK(id < ds.n_rows());
      if (ds.label(id) == 1) ++class1_draws;
    }
  }
  CHECK(class1_draws > 3);  // 3 distinct rows cannot cover the epoch
}

TEST_CASE("balanced batches are reproducible and validate inputs") {
  const Dataset ds = tagged_dataset({10, 10, 10});
  const auto a = balanced_batches(ds, 6, 99);
  const auto b = balanced_batches(ds, 6, 99);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].rows == b[i].rows);

  CHECK_THROWS_AS(balanced_batches(ds, 2, 1), Error);  // batch < n_classes

  std::vector<std::int32_t> labels(6, 0);
  labels[3] = 1;  // class 2 stays empty
  const Dataset gappy =
      Dataset::make(3, 1, std::vector<double>(6, 0.0), std::move(labels));
  CHECK_THROWS_AS(balanced_batches(gappy, 6, 1), Error);
}

TEST_CASE("shuffled batches cover every row exactly once") {
  const Dataset ds = tagged_dataset({11, 7});
  const auto batches = shuffled_batches(ds, 4, 5);
  CHECK(batches.size() == 5);  // 18 rows -> 4+4+4+4+2
  std::set<std::size_t> seen;
  for (const auto& batch : batches) {
    for (std::size_t id : batch.rows) CHECK(seen.insert(id).second);
  }
  CHECK(seen.size() == 18);
}

TEST_CASE("bootstrap resample is seeded and size-preserving") {
  const Dataset ds = tagged_dataset({600, 250, 150});
  const Dataset a = bootstrap_resample(ds, 31);
  const Dataset b = bootstrap_resample(ds, 31);
  CHECK(a.n_rows() == ds.n_rows());
  CHECK(a.features() == b.features());
  CHECK(bootstrap_resample(ds, 32).features() != a.features());
  CHECK_THROWS_AS(
      bootstrap_resample(Dataset::make(2, 1, {}, {}), 1), Error);
}

TEST_CASE("bootstrap unique fraction matches the 1 - 1/e law") {
  const Dataset ds = tagged_dataset({400, 300, 300});  // 1000 rows
  double unique_sum = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Dataset rs = bootstrap_resample(ds, seed);
    std::set<double> unique(rs.features().begin(), rs.features().end());
    unique_sum += static_cast<double>(unique.size()) / 1000.0;
  }
  const double mean_unique = unique_sum / 100.0;
  CHECK(mean_unique > 0.62);
  CHECK(mean_unique < 0.645);
}

TEST_CASE("label noise flips the requested fraction") {
  const Dataset ds = tagged_dataset({4000, 3000, 3000});  // 10,000 rows

  const Dataset clean = inject_label_noise(ds, {0.0, 5});
  CHECK(std::equal(clean.labels().begin(), clean.labels().end(),
                   ds.labels().begin()));

  const Dataset flipped = inject_label_noise(ds, {1.0, 5});
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    CHECK(flipped.label(i) != ds.label(i));
    CHECK(flipped.label(i) >= 0);
    CHECK(flipped.label(i) < 3);
  }
  CHECK(flipped.features() == ds.features());

  const Dataset noisy = inject_label_noise(ds, {0.2, 5});
  std::size_t changed = 0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    if (noisy.label(i) != ds.label(i)) ++changed;
  }
  // 4 binomial standard deviations around 2000: sigma = sqrt(10000*0.2*0.8).
  CHECK(changed > 2000 - 4 * 40);
  CHECK(changed < 2000 + 4 * 40);

  const Dataset again = inject_label_noise(ds, {0.2, 5});
  CHECK(std::equal(again.labels().begin(), again.labels().end(),
                   noisy.labels().begin()));
}

TEST_CASE("stratified split partitions every class") {
  const Dataset ds = tagged_dataset({10, 10, 10});
  const SplitResult split = stratified_split(ds, 0.5, 77);
  CHECK(split.train.n_rows() == 15);
  CHECK(split.test.n_rows() == 15);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(split.train.class_rows(c).size() == 5);
    CHECK(split.test.class_rows(c).size() == 5);
  }

  // The original feature tags must show up exactly once across both sides.
  std::multiset<double> tags(split.train.features().begin(),
                             split.train.features().end());
  tags.insert(split.test.features().begin(), split.test.features().end());
  std::multiset<double> expected(ds.features().begin(), ds.features().end());
  CHECK(tags == expected);
}

TEST_CASE("stratified split rounds per class and rejects tiny classes") {
  const Dataset ds = tagged_dataset({10, 5});
  const SplitResult split = stratified_split(ds, 0.3, 1);
  CHECK(split.test.class_rows(0).size() == 3);   // round(3.0)
  CHECK(split.test.class_rows(1).size() == 2);   // round(1.5) away from zero

  CHECK_THROWS_AS(stratified_split(ds, 1.5, 1), Error);
  const Dataset tiny = tagged_dataset({10, 4});
  CHECK_THROWS_AS(stratified_split(tiny, 0.05, 1), Error);  // round(0.2) = 0
}

TEST_CASE("fixed-count split takes exactly the requested test rows") {
  const Dataset ds = tagged_dataset({250, 230, 300});
  const SplitResult split = stratified_split_count(ds, 200, 9);
  for (std::size_t c = 0; c < 3; ++c) {
    CHECK(split.test.class_rows(c).size() == 200);
  }
  CHECK(split.train.n_rows() + split.test.n_rows() == ds.n_rows());
  CHECK_THROWS_AS(stratified_split_count(ds, 230, 9), Error);
}

TEST_CASE("per-class subsampling caps each class") {
  const Dataset ds = tagged_dataset({50, 8, 20});
  const Dataset small = subsample_per_class(ds, 10, 3);
  CHECK(small.class_rows(0).size() == 10);
  CHECK(small.class_rows(1).size() == 8);  // smaller class kept whole
  CHECK(small.class_rows(2).size() == 10);
  const Dataset again = subsample_per_class(ds, 10, 3);
  CHECK(small.features() == again.features());
}
