#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sartop/error.hpp"
#include "sartop/loss.hpp"
#include "test_util.hpp"

using namespace sartop;
using testutil::central_diff;
using testutil::naive_top2_loss;
using testutil::random_scores;
using testutil::rel_err;

TEST_CASE("class_weights matches the closed form") {
  // 7-class counts with a heavy majority class, total 52,400.
  ClassStats stats{{24930, 2979, 4485, 6029, 4911, 2240, 6826}};
  const ClassWeights w = class_weights(stats);
  CHECK(w.weights[0] == doctest::Approx(0.0873728).epsilon(1e-6));
  CHECK(w.weights[5] == doctest::Approx(0.1595420).epsilon(1e-6));

  double sum = 0.0;
  for (double v : w.weights) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
    sum += v;
  }
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("class_weights uniform and two-class cases") {
  ClassStats uniform{{42, 42, 42, 42, 42, 42, 42}};
  for (double v : class_weights(uniform).weights) {
    CHECK(v == doctest::Approx(1.0 / 7.0).epsilon(1e-15));
  }

  ClassStats two{{1, 3}};
  const ClassWeights w = class_weights(two);
  CHECK(w.weights[0] == doctest::Approx(0.75));
  CHECK(w.weights[1] == doctest::Approx(0.25));
}

TEST_CASE("class_weights rejects degenerate stats") {
  CHECK_THROWS_AS(class_weights(ClassStats{{5}}), Error);
  CHECK_THROWS_AS(class_weights(ClassStats{{0, 0}}), Error);
  CHECK_THROWS_AS(class_weights(ClassStats{{-1, 2}}), Error);
}

TEST_CASE("class_weights sum to one for random counts") {
  std::mt19937_64 gen(7);
  std::uniform_int_distribution<std::int64_t> count(0, 100000);
  std::uniform_int_distribution<std::size_t> classes(2, 12);
  for (int trial = 0; trial < 100; ++trial) {
    ClassStats stats;
    stats.counts.resize(classes(gen));
    for (auto& c : stats.counts) c = count(gen);
    stats.counts[0] += 1;  // keep the total positive
    double sum = 0.0;
    for (double v : class_weights(stats).weights) sum += v;
    CHECK(std::fabs(sum - 1.0) < 1e-12);
  }
}

TEST_CASE("top2_smooth_loss is identically zero for two classes") {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const auto s = random_scores(gen, 2, -30.0, 30.0);
    for (std::size_t y = 0; y < 2; ++y) {
      const auto lv = top2_smooth_loss(s, y, 0.7);
      CHECK(lv.value == 0.0);
      CHECK(lv.grad[0] == 0.0);
      CHECK(lv.grad[1] == 0.0);
    }
  }
}

TEST_CASE("top2_smooth_loss hand-enumerated three-class values") {
  // s = (0,0,0): subsets {0,1},{0,2} contribute e^0, {1,2} contributes e^1.
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  const double expected_zeros = std::log((2.0 + std::exp(1.0)) / 2.0);
  auto lv = top2_smooth_loss(zeros, 0, 1.0);
  CHECK(lv.value == doctest::Approx(expected_zeros).epsilon(1e-12));
  CHECK(lv.value == doctest::Approx(0.858297).epsilon(1e-6));

  // s = (10,0,0): {0,1},{0,2} give e^5, {1,2} gives e^1.
  const std::vector<double> spiked{10.0, 0.0, 0.0};
  const double expected_spiked = std::log1p(std::exp(-4.0) / 2.0);
  lv = top2_smooth_loss(spiked, 0, 1.0);
  CHECK(lv.value == doctest::Approx(expected_spiked).epsilon(1e-12));
  CHECK(lv.value == doctest::Approx(0.0091161).epsilon(1e-4));
}

TEST_CASE("top2_smooth_loss gradient matches central finite differences") {
  std::mt19937_64 gen(13);
  auto value_at = [](const std::vector<double>& s) {
    return top2_smooth_loss(s, 3, 1.3).value;
  };
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scores(gen, 7);
    const auto lv = top2_smooth_loss(s, 3, 1.3);
    for (std::size_t m = 0; m < s.size(); ++m) {
      const double fd = central_diff(value_at, s, m);
      CHECK(rel_err(lv.grad[m], fd) < 1e-5);
    }
  }
}

TEST_CASE("top2_smooth_loss rejects bad inputs") {
  const std::vector<double> s{1.0, 2.0, 3.0};
  CHECK_THROWS_AS(top2_smooth_loss(s, 3, 1.0), Error);
  CHECK_THROWS_AS(top2_smooth_loss(s, 0, 0.0), Error);
  CHECK_THROWS_AS(top2_smooth_loss(s, 0, -1.0), Error);
  const std::vector<double> bad{1.0, std::nan(""), 0.0};
  CHECK_THROWS_AS(top2_smooth_loss(bad, 0, 1.0), Error);
  const std::vector<double> tiny{1.0};
  CHECK_THROWS_AS(top2_smooth_loss(tiny, 0, 1.0), Error);
}

TEST_CASE("top2_hard_reference hand values") {
  const std::vector<double> spiked{10.0, 0.0, 0.0};
  CHECK(top2_hard_reference(spiked, 0) == doctest::Approx(0.0));

  const std::vector<double> behind{0.0, 5.0, 5.0};
  CHECK(top2_hard_reference(behind, 0) == doctest::Approx(3.5));

  const std::vector<double> pair{4.0, -2.0};
  CHECK(top2_hard_reference(pair, 0) == doctest::Approx(0.0));
  CHECK(top2_hard_reference(pair, 1) == doctest::Approx(0.0));
}

TEST_CASE("temperature limit approaches the hard reference") {
  std::mt19937_64 gen(17);
  const double tau = 1e-3;
  const double bound = tau * std::log(21.0) + 1e-6;  // 21 subsets for n=7
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scores(gen, 7);
    const std::size_t y = gen() % 7;
    const double smooth = top2_smooth_loss(s, y, tau).value;
    const double hard = top2_hard_reference(s, y);
    CHECK(std::fabs(smooth - hard) <= bound);
  }
}

TEST_CASE("cross_entropy hand values") {
  const std::vector<double> uniform(7, 0.25);
  auto lv = cross_entropy(uniform, 2);
  CHECK(lv.value == doctest::Approx(std::log(7.0)).epsilon(1e-12));

  const std::vector<double> pair{1.0, 0.0};
  lv = cross_entropy(pair, 0);
  CHECK(lv.value == doctest::Approx(std::log1p(std::exp(-1.0))).epsilon(1e-12));
  CHECK(lv.value == doctest::Approx(0.313262).epsilon(1e-6));

  std::vector<double> dominant(5, 0.0);
  dominant[3] = 50.0;
  lv = cross_entropy(dominant, 3);
  CHECK(lv.value >= 0.0);
  CHECK(lv.value < 1e-20);
}

TEST_CASE("cross_entropy gradient is softmax minus onehot") {
  std::mt19937_64 gen(19);
  for (int trial = 0; trial < 100; ++trial) {
    const auto s = random_scores(gen, 5);
    const std::size_t y = gen() % 5;
    const auto lv = cross_entropy(s, y);
    const auto p = softmax(s);
    for (std::size_t i = 0; i < s.size(); ++i) {
      const double expected = p[i] - (i == y ? 1.0 : 0.0);
      CHECK(rel_err(lv.grad[i], expected) < 1e-12);
    }
    auto value_at = [y](const std::vector<double>& v) {
      return cross_entropy(v, y).value;
    };
    for (std::size_t m = 0; m < s.size(); ++m) {
      CHECK(rel_err(lv.grad[m], central_diff(value_at, s, m)) < 1e-5);
    }
  }
}

TEST_CASE("combined_data_loss degenerates at the lambda endpoints") {
  std::mt19937_64 gen(23);
  const ClassWeights w = class_weights(ClassStats{{10, 20, 30}});
  for (int trial = 0; trial < 20; ++trial) {
    const auto s = random_scores(gen, 3);
    const std::size_t y = gen() % 3;

    const auto ce_only = combined_data_loss(s, y, w, {0.0, 1.0, 0.25});
    const auto ce = cross_entropy(s, y);
    CHECK(ce_only.value == ce.value);
    for (std::size_t i = 0; i < 3; ++i) CHECK(ce_only.grad[i] == ce.grad[i]);

    const auto top2_only = combined_data_loss(s, y, w, {1.0, 1.0, 0.25});
    const auto t2 = top2_smooth_loss(s, y, 1.0);
    CHECK(top2_only.value == w.weights[y] * t2.value);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(top2_only.grad[i] == w.weights[y] * t2.grad[i]);
    }
  }
}

TEST_CASE("combined_data_loss mixed hand value") {
  const std::vector<double> zeros{0.0, 0.0, 0.0};
  const ClassWeights w = uniform_class_weights(3);
  const auto lv = combined_data_loss(zeros, 0, w, {0.2, 1.0, 0.25});
  const double expected =
      0.8 * std::log(3.0) + (0.2 / 3.0) * std::log((2.0 + std::exp(1.0)) / 2.0);
  CHECK(lv.value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(lv.value == doctest::Approx(0.936110).epsilon(1e-5));
}

TEST_CASE("combined_data_loss validates shapes and config") {
  const std::vector<double> s{0.0, 1.0, 2.0};
  const ClassWeights short_w = uniform_class_weights(2);
  CHECK_THROWS_AS(combined_data_loss(s, 0, short_w, {}), Error);
  const ClassWeights w = uniform_class_weights(3);
  CHECK_THROWS_AS(combined_data_loss(s, 0, w, {1.5, 1.0, 0.25}), Error);
  CHECK_THROWS_AS(combined_data_loss(s, 0, w, {0.2, 0.0, 0.25}), Error);
  CHECK_THROWS_AS(combined_data_loss(s, 0, w, {0.2, 1.0, -0.1}), Error);
}

TEST_CASE("translation invariance of both losses") {
  std::mt19937_64 gen(29);
  std::uniform_real_distribution<double> shift(-100.0, 100.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 7;
    const auto s = random_scores(gen, n);
    const std::size_t y = gen() % n;
    const double c = shift(gen);
    std::vector<double> shifted = s;
    for (auto& v : shifted) v += c;

    CHECK(std::fabs(top2_smooth_loss(shifted, y, 0.9).value -
                    top2_smooth_loss(s, y, 0.9).value) < 1e-9);
    CHECK(std::fabs(cross_entropy(shifted, y).value -
                    cross_entropy(s, y).value) < 1e-9);
  }
}

TEST_CASE("gradient entries sum to zero") {
  std::mt19937_64 gen(31);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 7;
    const auto s = random_scores(gen, n);
    const std::size_t y = gen() % n;
    double top2_sum = 0.0;
    for (double g : top2_smooth_loss(s, y, 1.1).grad) top2_sum += g;
    CHECK(std::fabs(top2_sum) < 1e-9);
    double ce_sum = 0.0;
    for (double g : cross_entropy(s, y).grad) ce_sum += g;
    CHECK(std::fabs(ce_sum) < 1e-9);
  }
}

TEST_CASE("losses decrease in the true score") {
  std::mt19937_64 gen(37);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 7;
    const auto s = random_scores(gen, n);
    const std::size_t y = gen() % n;
    CHECK(top2_smooth_loss(s, y, 0.8).grad[y] <= 0.0);
    CHECK(cross_entropy(s, y).grad[y] <= 0.0);
  }
}

TEST_CASE("nonnegativity, strict positivity for three or more classes") {
  std::mt19937_64 gen(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 7;
    const auto s = random_scores(gen, n);
    const std::size_t y = gen() % n;
    const double t2 = top2_smooth_loss(s, y, 1.0).value;
    const double ce = cross_entropy(s, y).value;
    CHECK(t2 >= 0.0);
    CHECK(ce >= 0.0);
    if (n >= 3) CHECK(t2 > 0.0);
  }
}

TEST_CASE("loss vanishes when the true class dominates") {
  std::mt19937_64 gen(43);
  for (int trial = 0; trial < 100; ++trial) {
    auto s = random_scores(gen, 7, -1.0, 1.0);
    const std::size_t y = gen() % 7;
    double other_max = -1e300;
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i != y) other_max = std::max(other_max, s[i]);
    }
    s[y] = other_max + 50.0;
    CHECK(top2_smooth_loss(s, y, 1.0).value < 1e-6);
  }
}

TEST_CASE("stabilized value matches extended-precision enumeration") {
  std::mt19937_64 gen(47);
  std::uniform_real_distribution<double> entry(-30.0, 30.0);
  std::uniform_real_distribution<double> temp(0.1, 10.0);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 2 + gen() % 9;
    std::vector<double> s(n);
    for (auto& v : s) v = entry(gen);
    const std::size_t y = gen() % n;
    const double tau = temp(gen);
    const double impl = top2_smooth_loss(s, y, tau).value;
    const double oracle = static_cast<double>(naive_top2_loss(s, y, tau));
    CHECK(rel_err(impl, oracle) < 1e-9);
  }
}
