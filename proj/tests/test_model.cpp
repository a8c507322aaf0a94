#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "sartop/checkpoint.hpp"
#include "sartop/error.hpp"
#include "sartop/loss.hpp"
#include "sartop/network.hpp"
#include "test_util.hpp"

using namespace sartop;
using testutil::rel_err;

namespace {

std::vector<std::vector<double>*> param_arrays(Network& net) {
  std::vector<std::vector<double>*> out{&net.stem_w.data, &net.stem_b};
  for (auto& blk : net.blocks) {
    out.push_back(&blk.w1.data);
    out.push_back(&blk.b1);
    out.push_back(&blk.w2.data);
    out.push_back(&blk.b2);
  }
  out.push_back(&net.head_w.data);
  out.push_back(&net.head_b);
  return out;
}

std::vector<const std::vector<double>*> grad_arrays(const GradientSet& g) {
  std::vector<const std::vector<double>*> out{&g.stem_w.data, &g.stem_b};
  for (const auto& blk : g.blocks) {
    out.push_back(&blk.w1.data);
    out.push_back(&blk.b1);
    out.push_back(&blk.w2.data);
    out.push_back(&blk.b2);
  }
  out.push_back(&g.head_w.data);
  out.push_back(&g.head_b);
  return out;
}

Matrix random_batch(std::mt19937_64& gen, std::size_t rows, std::size_t cols) {
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  Matrix m(rows, cols);
  for (auto& v : m.data) v = dist(gen);
  return m;
}

// Mean combined data loss over the batch plus the L2 penalty; the objective
// whose exact gradient backward() claims to produce.
double objective(const Network& net, const Matrix& x,
                 const std::vector<std::size_t>& labels,
                 const ClassWeights& w, const LossConfig& lc) {
  const ForwardCache cache = forward(net, x);
  double total = 0.0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    total += combined_data_loss(cache.scores.row(i), labels[i], w, lc).value;
  }
  return total / static_cast<double>(x.rows) + l2_penalty(net, lc.mu);
}

Matrix batch_loss_grads(const Network& net, const Matrix& x,
                        const std::vector<std::size_t>& labels,
                        const ClassWeights& w, const LossConfig& lc,
                        const ForwardCache& cache) {
  Matrix grads(x.rows, net.spec.n_classes);
  for (std::size_t i = 0; i < x.rows; ++i) {
    const auto lv = combined_data_loss(cache.scores.row(i), labels[i], w, lc);
    std::copy(lv.grad.begin(), lv.grad.end(),
              grads.data.begin() + static_cast<std::ptrdiff_t>(i * grads.cols));
  }
  return grads;
}

}  // namespace

TEST_CASE("init_network is deterministic and counts parameters") {
  const NetworkSpec spec{4, 8, 2, 7, 99};
  const Network a = init_network(spec);
  const Network b = init_network(spec);
  CHECK(a.parameter_count() == 391);  // 8*4+8 + 2*2*(8*8+8) + 7*8+7
  CHECK(a.stem_w.data == b.stem_w.data);
  CHECK(a.head_w.data == b.head_w.data);
  for (std::size_t k = 0; k < a.blocks.size(); ++k) {
    CHECK(a.blocks[k].w1.data == b.blocks[k].w1.data);
    CHECK(a.blocks[k].w2.data == b.blocks[k].w2.data);
  }
  for (double v : a.stem_b) CHECK(v == 0.0);

  NetworkSpec other = spec;
  other.init_seed = 100;
  CHECK(init_network(other).stem_w.data != a.stem_w.data);

  NetworkSpec bad = spec;
  bad.width = 0;
  CHECK_THROWS_AS(init_network(bad), Error);
}

TEST_CASE("zeroed blocks act as identities") {
  std::mt19937_64 gen(3);
  Network net = init_network({3, 5, 2, 4, 7});
  Network trunkless = net;
  for (auto& blk : net.blocks) {
    std::fill(blk.w1.data.begin(), blk.w1.data.end(), 0.0);
    std::fill(blk.b1.begin(), blk.b1.end(), 0.0);
    std::fill(blk.w2.data.begin(), blk.w2.data.end(), 0.0);
    std::fill(blk.b2.begin(), blk.b2.end(), 0.0);
  }
  trunkless.blocks.clear();
  trunkless.spec.n_blocks = 0;

  const Matrix x = random_batch(gen, 6, 3);
  const Matrix with_blocks = forward(net, x).scores;
  const Matrix without = forward(trunkless, x).scores;
  for (std::size_t t = 0; t < with_blocks.data.size(); ++t) {
    CHECK(with_blocks.data[t] == without.data[t]);
  }
}

TEST_CASE("all-zero parameters give all-zero scores") {
  Network net = init_network({3, 4, 1, 3, 11});
  for (auto* arr : param_arrays(net)) std::fill(arr->begin(), arr->end(), 0.0);
  std::mt19937_64 gen(5);
  const Matrix scores = forward(net, random_batch(gen, 4, 3)).scores;
  for (double v : scores.data) CHECK(v == 0.0);
}

TEST_CASE("forward matches a pencil-and-paper pass") {
  Network net = init_network({2, 2, 1, 2, 1});
  net.stem_w.data = {1.0, 0.0, 0.0, 1.0};
  net.stem_b = {0.0, 0.0};
  net.blocks[0].w1.data = {1.0, 1.0, 0.0, 1.0};
  net.blocks[0].b1 = {0.5, -0.5};
  net.blocks[0].w2.data = {0.5, 0.0, 0.0, -1.0};
  net.blocks[0].b2 = {0.0, 0.1};
  net.head_w.data = {1.0, 0.0, 0.0, 1.0};
  net.head_b = {0.0, 0.0};

  Matrix x(1, 2);
  x.data = {1.0, -2.0};
  // stem relu -> (1, 0); inner z = (1.5, -0.5), relu (1.5, 0);
  // w2 path = (0.75, 0.1); residual out = (1.75, 0.1).
  const Matrix scores = forward(net, x).scores;
  CHECK(scores.at(0, 0) == doctest::Approx(1.75).epsilon(1e-15));
  CHECK(scores.at(0, 1) == doctest::Approx(0.1).epsilon(1e-15));

  Matrix wrong(1, 3);
  CHECK_THROWS_AS(forward(net, wrong), Error);
}

TEST_CASE("backward with zero loss gradients") {
  std::mt19937_64 gen(7);
  const Network net = init_network({3, 6, 1, 4, 13});
  const Matrix x = random_batch(gen, 5, 3);
  const ForwardCache cache = forward(net, x);
  const Matrix zero_grads(5, 4);

  const GradientSet g0 = backward(net, cache, zero_grads, 0.0);
  for (const auto* arr : grad_arrays(g0)) {
    for (double v : *arr) CHECK(v == 0.0);
  }

  // With mu > 0 the weight gradients are exactly 2*mu*w, biases zero.
  const double mu = 0.25;
  const GradientSet g1 = backward(net, cache, zero_grads, mu);
  for (std::size_t t = 0; t < net.stem_w.data.size(); ++t) {
    CHECK(g1.stem_w.data[t] == 2.0 * mu * net.stem_w.data[t]);
  }
  for (double v : g1.stem_b) CHECK(v == 0.0);
  for (std::size_t t = 0; t < net.head_w.data.size(); ++t) {
    CHECK(g1.head_w.data[t] == 2.0 * mu * net.head_w.data[t]);
  }
  for (double v : g1.head_b) CHECK(v == 0.0);
}

TEST_CASE("end-to-end gradients match finite differences") {
  struct Config {
    NetworkSpec spec;
    std::size_t batch;
    std::uint64_t data_seed;
  };
  const Config configs[] = {
      {{5, 16, 2, 7, 101}, 8, 27},
      {{3, 4, 1, 3, 55}, 4, 21},
      {{2, 8, 0, 2, 77}, 6, 20},
  };
  for (const auto& cfg : configs) {
    CAPTURE(cfg.spec.width);
    Network net = init_network(cfg.spec);
    std::mt19937_64 gen(cfg.data_seed);
    const Matrix x = random_batch(gen, cfg.batch, cfg.spec.input_dim);
    std::vector<std::size_t> labels(cfg.batch);
    for (auto& y : labels) y = gen() % cfg.spec.n_classes;

    // Central differences assume the relu inputs stay on one side of zero;
    // these fixtures keep a wide margin around every kink.
    {
      const ForwardCache probe = forward(net, x);
      double min_pre = 1e300;
      for (double v : probe.stem_pre.data) min_pre = std::min(min_pre, std::fabs(v));
      for (const auto& z : probe.inner_pre) {
        for (double v : z.data) min_pre = std::min(min_pre, std::fabs(v));
      }
      REQUIRE(min_pre > 1e-3);
    }
    const ClassWeights w = uniform_class_weights(cfg.spec.n_classes);
    const LossConfig lc{0.2, 1.0, 0.25};

    const ForwardCache cache = forward(net, x);
    const Matrix loss_grads = batch_loss_grads(net, x, labels, w, lc, cache);
    const GradientSet grads = backward(net, cache, loss_grads, lc.mu);

    const auto params = param_arrays(net);
    const auto analytic = grad_arrays(grads);
    const double h = 1e-5;
    for (std::size_t a = 0; a < params.size(); ++a) {
      for (std::size_t i = 0; i < params[a]->size(); ++i) {
        const double saved = (*params[a])[i];
        (*params[a])[i] = saved + h;
        const double hi = objective(net, x, labels, w, lc);
        (*params[a])[i] = saved - h;
        const double lo = objective(net, x, labels, w, lc);
        (*params[a])[i] = saved;
        const double fd = (hi - lo) / (2.0 * h);
        CHECK(rel_err((*analytic[a])[i], fd) < 1e-4);
      }
    }
  }
}

TEST_CASE("l2_penalty sums squared weights only") {
  Network net = init_network({1, 1, 0, 2, 3});
  CHECK(l2_penalty(net, 0.0) == 0.0);

  net.stem_w.data = {3.0};
  net.stem_b = {4.0};  // biases excluded
  std::fill(net.head_w.data.begin(), net.head_w.data.end(), 0.0);
  std::fill(net.head_b.begin(), net.head_b.end(), 0.0);
  CHECK(l2_penalty(net, 0.25) == doctest::Approx(2.25).epsilon(1e-15));

  const Network random_net = init_network({4, 6, 2, 5, 17});
  double oracle = 0.0;
  for (double v : random_net.stem_w.data) oracle += v * v;
  for (const auto& blk : random_net.blocks) {
    for (double v : blk.w1.data) oracle += v * v;
    for (double v : blk.w2.data) oracle += v * v;
  }
  for (double v : random_net.head_w.data) oracle += v * v;
  CHECK(rel_err(l2_penalty(random_net, 0.25), 0.25 * oracle) < 1e-12);
}

TEST_CASE("adam leaves parameters alone under zero gradients") {
  const Network reference = init_network({3, 4, 1, 3, 19});
  Network net = reference;
  AdamState state = make_adam_state(net, 1e-3);
  const GradientSet zero = zeros_like(net);
  for (int step = 0; step < 5; ++step) adam_step(net, zero, state);
  CHECK(net.stem_w.data == reference.stem_w.data);
  CHECK(net.head_w.data == reference.head_w.data);
  CHECK(state.step_count == 5);
}

TEST_CASE("adam first step moves a unit-gradient parameter by the rate") {
  Network net = init_network({1, 1, 0, 2, 5});
  net.stem_w.data = {1.0};
  AdamState state = make_adam_state(net, 1e-4);
  GradientSet grads = zeros_like(net);
  grads.stem_w.data = {1.0};
  adam_step(net, grads, state);
  // m_hat = v_hat = 1 after bias correction, so the step is lr/(1+eps).
  CHECK(net.stem_w.data[0] == doctest::Approx(1.0 - 1e-4).epsilon(1e-10));
  CHECK(state.step_count == 1);
  // Untouched parameters have zero moments and zero gradient: no movement.
  CHECK(net.head_w.data == init_network({1, 1, 0, 2, 5}).head_w.data);
}

TEST_CASE("training steps are bit-reproducible") {
  auto run = [] {
    Network net = init_network({3, 5, 1, 3, 23});
    AdamState state = make_adam_state(net, 1e-3);
    std::mt19937_64 gen(9);
    const ClassWeights w = uniform_class_weights(3);
    const LossConfig lc{0.2, 1.0, 0.1};
    for (int step = 0; step < 10; ++step) {
      const Matrix x = random_batch(gen, 4, 3);
      std::vector<std::size_t> labels(4);
      for (auto& y : labels) y = gen() % 3;
      const ForwardCache cache = forward(net, x);
      const Matrix lg = batch_loss_grads(net, x, labels, w, lc, cache);
      adam_step(net, backward(net, cache, lg, lc.mu), state);
    }
    return net;
  };
  const Network a = run();
  const Network b = run();
  CHECK(a.stem_w.data == b.stem_w.data);
  CHECK(a.blocks[0].w1.data == b.blocks[0].w1.data);
  CHECK(a.head_w.data == b.head_w.data);
  CHECK(a.head_b == b.head_b);
}

TEST_CASE("transfer_init copies the trunk and re-initializes the head") {
  const Network source = init_network({4, 6, 2, 7, 31});
  const Network moved = transfer_init(source, 5, TransferMode::kHeadOnlyReinit, 32);
  CHECK(moved.spec.n_classes == 5);
  CHECK(moved.stem_w.data == source.stem_w.data);
  for (std::size_t k = 0; k < source.blocks.size(); ++k) {
    CHECK(moved.blocks[k].w1.data == source.blocks[k].w1.data);
    CHECK(moved.blocks[k].w2.data == source.blocks[k].w2.data);
  }
  CHECK(moved.head_w.rows == 5);
  CHECK_FALSE(moved.trunk_frozen);

  const Network same_classes = transfer_init(source, 7, TransferMode::kHeadOnlyReinit, 33);
  CHECK(same_classes.head_w.data != source.head_w.data);
}

TEST_CASE("frozen trunk stays bit-identical through training") {
  const Network source = init_network({3, 5, 2, 4, 37});
  Network net = transfer_init(source, 3, TransferMode::kFreezeFeatures, 38);
  CHECK(net.trunk_frozen);
  AdamState state = make_adam_state(net, 1e-2);
  std::mt19937_64 gen(39);
  const ClassWeights w = uniform_class_weights(3);
  const LossConfig lc{0.2, 1.0, 0.25};
  std::vector<double> head_before = net.head_w.data;
  for (int step = 0; step < 20; ++step) {
    const Matrix x = random_batch(gen, 6, 3);
    std::vector<std::size_t> labels(6);
    for (auto& y : labels) y = gen() % 3;
    const ForwardCache cache = forward(net, x);
    const Matrix lg = batch_loss_grads(net, x, labels, w, lc, cache);
    adam_step(net, backward(net, cache, lg, lc.mu), state);
  }
  CHECK(net.stem_w.data == source.stem_w.data);
  CHECK(net.stem_b == source.stem_b);
  for (std::size_t k = 0; k < source.blocks.size(); ++k) {
    CHECK(net.blocks[k].w1.data == source.blocks[k].w1.data);
    CHECK(net.blocks[k].b1 == source.blocks[k].b1);
    CHECK(net.blocks[k].w2.data == source.blocks[k].w2.data);
    CHECK(net.blocks[k].b2 == source.blocks[k].b2);
  }
  CHECK(net.head_w.data != head_before);
}

TEST_CASE("head-only transfer keeps the trunk trainable") {
  const Network source = init_network({3, 5, 1, 4, 41});
  Network net = transfer_init(source, 4, TransferMode::kHeadOnlyReinit, 42);
  AdamState state = make_adam_state(net, 1e-2);
  std::mt19937_64 gen(43);
  const ClassWeights w = uniform_class_weights(4);
  const LossConfig lc{0.2, 1.0, 0.25};
  const Matrix x = random_batch(gen, 6, 3);
  std::vector<std::size_t> labels(6);
  for (auto& y : labels) y = gen() % 4;
  const ForwardCache cache = forward(net, x);
  const Matrix lg = batch_loss_grads(net, x, labels, w, lc, cache);
  adam_step(net, backward(net, cache, lg, lc.mu), state);
  CHECK(net.stem_w.data != source.stem_w.data);
}

TEST_CASE("predict_topk orders classes with deterministic tie-breaks") {
  const std::vector<double> scores{0.1, 0.9, 0.5};
  CHECK(rank_scores(scores, 2) == std::vector<std::int32_t>{1, 2});
  CHECK(rank_scores(scores, 3) == std::vector<std::int32_t>{1, 2, 0});

  const std::vector<double> tie{0.5, 0.5};
  CHECK(rank_scores(tie, 1) == std::vector<std::int32_t>{0});

  CHECK_THROWS_AS(rank_scores(scores, 0), Error);
  CHECK_THROWS_AS(rank_scores(scores, 4), Error);

  const Network net = init_network({3, 4, 1, 5, 47});
  std::mt19937_64 gen(48);
  const Matrix x = random_batch(gen, 9, 3);
  const auto ranked = predict_topk(net, x, 5);
  for (const auto& row : ranked) {
    std::vector<std::int32_t> sorted = row;
    std::sort(sorted.begin(), sorted.end());
    CHECK(sorted == std::vector<std::int32_t>{0, 1, 2, 3, 4});
  }
  CHECK_THROWS_AS(predict_topk(net, x, 6), Error);
}

TEST_CASE("checkpoint round-trip reproduces every parameter bit") {
  const Network net = init_network({6, 9, 2, 7, 1234567});
  const std::string text = checkpoint_to_string(net);
  const Network back = checkpoint_from_string(text);
  CHECK(back.spec.input_dim == net.spec.input_dim);
  CHECK(back.spec.init_seed == net.spec.init_seed);
  CHECK(back.stem_w.data == net.stem_w.data);
  CHECK(back.stem_b == net.stem_b);
  for (std::size_t k = 0; k < net.blocks.size(); ++k) {
    CHECK(back.blocks[k].w1.data == net.blocks[k].w1.data);
    CHECK(back.blocks[k].b1 == net.blocks[k].b1);
    CHECK(back.blocks[k].w2.data == net.blocks[k].w2.data);
    CHECK(back.blocks[k].b2 == net.blocks[k].b2);
  }
  CHECK(back.head_w.data == net.head_w.data);
  CHECK(back.head_b == net.head_b);
}

TEST_CASE("checkpoint parser rejects malformed input") {
  const Network net = init_network({2, 3, 1, 2, 5});
  std::string text = checkpoint_to_string(net);
  CHECK_THROWS_AS(checkpoint_from_string("bogus " + text), Error);
  CHECK_THROWS_AS(checkpoint_from_string("sartop-checkpoint 999\n"), Error);
  CHECK_THROWS_AS(checkpoint_from_string(text.substr(0, text.size() / 2)), Error);
}
