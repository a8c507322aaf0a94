#include "sartop/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "sartop/error.hpp"
#include "sartop/rng.hpp"

namespace sartop {

namespace {

// out(b,:) += x(b,:) * w^T + bias, i.e. out_j = sum_i w(j,i) x_i + b_j.
void affine_forward(const Matrix& x, const Matrix& w,
                    const std::vector<double>& bias, Matrix& out) {
  for (std::size_t b = 0; b < x.rows; ++b) {
    const double* xr = x.data.data() + b * x.cols;
    double* or_ = out.data.data() + b * out.cols;
    for (std::size_t j = 0; j < w.rows; ++j) {
      const double* wr = w.data.data() + j * w.cols;
      double acc = bias[j];
      for (std::size_t i = 0; i < w.cols; ++i) acc += wr[i] * xr[i];
      or_[j] = acc;
    }
  }
}

// dx(b,:) = g(b,:) * w, i.e. dx_i = sum_j g_j w(j,i). Accumulates into dx.
void backprop_through_weights(const Matrix& g, const Matrix& w, Matrix& dx) {
  for (std::size_t b = 0; b < g.rows; ++b) {
    const double* gr = g.data.data() + b * g.cols;
    double* dr = dx.data.data() + b * dx.cols;
    for (std::size_t j = 0; j < w.rows; ++j) {
      const double gj = gr[j];
      if (gj == 0.0) continue;
      const double* wr = w.data.data() + j * w.cols;
      for (std::size_t i = 0; i < w.cols; ++i) dr[i] += gj * wr[i];
    }
  }
}

// gw += g^T x / batch, gb += colmean(g).
void accumulate_param_grads(const Matrix& g, const Matrix& x, Matrix& gw,
                            std::vector<double>& gb) {
  const double inv_batch = 1.0 / static_cast<double>(g.rows);
  for (std::size_t b = 0; b < g.rows; ++b) {
    const double* gr = g.data.data() + b * g.cols;
    const double* xr = x.data.data() + b * x.cols;
    for (std::size_t j = 0; j < g.cols; ++j) {
      const double gj = gr[j] * inv_batch;
      if (gj == 0.0) continue;
      double* wr = gw.data.data() + j * gw.cols;
      for (std::size_t i = 0; i < x.cols; ++i) wr[i] += gj * xr[i];
      gb[j] += gj;
    }
  }
}

Matrix relu(const Matrix& x) {
  Matrix out = x;
  for (double& v : out.data) v = std::max(v, 0.0);
  return out;
}

void init_weight(Matrix& w, std::size_t fan_in, Rng& rng) {
  const double stddev = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (double& v : w.data) v = stddev * rng.normal();
}

void check_finite(const Matrix& m, const char* what) {
  for (double v : m.data) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kDomain, std::string(what) + " contains a non-finite value");
    }
  }
}

template <typename Fn>
void for_each_weight(Network& net, GradientSet& a, GradientSet& b,
                     const GradientSet& g, bool include_trunk, Fn&& fn) {
  if (include_trunk) {
    fn(net.stem_w.data, a.stem_w.data, b.stem_w.data, g.stem_w.data);
    fn(net.stem_b, a.stem_b, b.stem_b, g.stem_b);
    for (std::size_t k = 0; k < net.blocks.size(); ++k) {
      fn(net.blocks[k].w1.data, a.blocks[k].w1.data, b.blocks[k].w1.data,
         g.blocks[k].w1.data);
      fn(net.blocks[k].b1, a.blocks[k].b1, b.blocks[k].b1, g.blocks[k].b1);
      fn(net.blocks[k].w2.data, a.blocks[k].w2.data, b.blocks[k].w2.data,
         g.blocks[k].w2.data);
      fn(net.blocks[k].b2, a.blocks[k].b2, b.blocks[k].b2, g.blocks[k].b2);
    }
  }
  fn(net.head_w.data, a.head_w.data, b.head_w.data, g.head_w.data);
  fn(net.head_b, a.head_b, b.head_b, g.head_b);
}

}  // namespace

void NetworkSpec::validate() const {
  if (input_dim == 0 || width == 0) {
    fail(ErrorCode::kInvalidArgument,
         "network spec: input_dim and width must be >= 1");
  }
  if (n_classes < 2) {
    fail(ErrorCode::kInvalidArgument, "network spec: n_classes must be >= 2");
  }
}

std::size_t Network::parameter_count() const {
  std::size_t count = stem_w.data.size() + stem_b.size() +
                      head_w.data.size() + head_b.size();
  for (const auto& blk : blocks) {
    count += blk.w1.data.size() + blk.b1.size() + blk.w2.data.size() +
             blk.b2.size();
  }
  return count;
}

Network init_network(const NetworkSpec& spec) {
  spec.validate();
  Rng rng(spec.init_seed);

  Network net;
  net.spec = spec;
  net.stem_w = Matrix(spec.width, spec.input_dim);
  net.stem_b.assign(spec.width, 0.0);
  init_weight(net.stem_w, spec.input_dim, rng);

  net.blocks.resize(spec.n_blocks);
  for (auto& blk : net.blocks) {
    blk.w1 = Matrix(spec.width, spec.width);
    blk.b1.assign(spec.width, 0.0);
    blk.w2 = Matrix(spec.width, spec.width);
    blk.b2.assign(spec.width, 0.0);
    init_weight(blk.w1, spec.width, rng);
    init_weight(blk.w2, spec.width, rng);
  }

  net.head_w = Matrix(spec.n_classes, spec.width);
  net.head_b.assign(spec.n_classes, 0.0);
  init_weight(net.head_w, spec.width, rng);
  return net;
}

ForwardCache forward(const Network& net, const Matrix& features) {
  if (features.cols != net.spec.input_dim) {
    fail(ErrorCode::kShapeMismatch,
         "forward: feature width " + std::to_string(features.cols) +
             " does not match input_dim " +
             std::to_string(net.spec.input_dim));
  }
  check_finite(features, "feature batch");

  const std::size_t batch = features.rows;
  const std::size_t width = net.spec.width;

  ForwardCache cache;
  cache.input = features;
  cache.stem_pre = Matrix(batch, width);
  affine_forward(features, net.stem_w, net.stem_b, cache.stem_pre);
  cache.hidden.reserve(net.blocks.size() + 1);
  cache.hidden.push_back(relu(cache.stem_pre));

  cache.inner_pre.reserve(net.blocks.size());
  for (const auto& blk : net.blocks) {
    const Matrix& x = cache.hidden.back();
    Matrix z(batch, width);
    affine_forward(x, blk.w1, blk.b1, z);
    Matrix a = relu(z);
    Matrix out(batch, width);
    affine_forward(a, blk.w2, blk.b2, out);
    for (std::size_t t = 0; t < out.data.size(); ++t) out.data[t] += x.data[t];
    cache.inner_pre.push_back(std::move(z));
    cache.hidden.push_back(std::move(out));
  }

  cache.scores = Matrix(batch, net.spec.n_classes);
  affine_forward(cache.hidden.back(), net.head_w, net.head_b, cache.scores);
  return cache;
}

GradientSet zeros_like(const Network& net) {
  GradientSet g;
  g.stem_w = Matrix(net.stem_w.rows, net.stem_w.cols);
  g.stem_b.assign(net.stem_b.size(), 0.0);
  g.blocks.resize(net.blocks.size());
  for (std::size_t k = 0; k < net.blocks.size(); ++k) {
    g.blocks[k].w1 = Matrix(net.blocks[k].w1.rows, net.blocks[k].w1.cols);
    g.blocks[k].b1.assign(net.blocks[k].b1.size(), 0.0);
    g.blocks[k].w2 = Matrix(net.blocks[k].w2.rows, net.blocks[k].w2.cols);
    g.blocks[k].b2.assign(net.blocks[k].b2.size(), 0.0);
  }
  g.head_w = Matrix(net.head_w.rows, net.head_w.cols);
  g.head_b.assign(net.head_b.size(), 0.0);
  return g;
}

GradientSet backward(const Network& net, const ForwardCache& cache,
                     const Matrix& loss_grads, double mu) {
  if (cache.hidden.size() != net.blocks.size() + 1 ||
      cache.input.cols != net.spec.input_dim ||
      cache.stem_pre.cols != net.spec.width) {
    fail(ErrorCode::kShapeMismatch,
         "backward: cache does not match this network");
  }
  if (loss_grads.rows != cache.input.rows ||
      loss_grads.cols != net.spec.n_classes) {
    fail(ErrorCode::kShapeMismatch,
         "backward: loss gradient batch has the wrong shape");
  }
  if (mu < 0.0) fail(ErrorCode::kInvalidArgument, "mu must be >= 0");

  const std::size_t batch = cache.input.rows;
  const std::size_t width = net.spec.width;
  GradientSet g = zeros_like(net);

  // Head.
  accumulate_param_grads(loss_grads, cache.hidden.back(), g.head_w, g.head_b);
  Matrix dh(batch, width);
  backprop_through_weights(loss_grads, net.head_w, dh);

  // Blocks, in reverse. Residual skip adds the incoming gradient through.
  for (std::size_t k = net.blocks.size(); k-- > 0;) {
    const auto& blk = net.blocks[k];
    const Matrix& block_in = cache.hidden[k];
    const Matrix& z = cache.inner_pre[k];
    Matrix a = relu(z);

    accumulate_param_grads(dh, a, g.blocks[k].w2, g.blocks[k].b2);

    Matrix da(batch, width);
    backprop_through_weights(dh, blk.w2, da);
    for (std::size_t t = 0; t < da.data.size(); ++t) {
      if (z.data[t] <= 0.0) da.data[t] = 0.0;
    }
    accumulate_param_grads(da, block_in, g.blocks[k].w1, g.blocks[k].b1);

    Matrix dprev = dh;  // skip connection
    backprop_through_weights(da, blk.w1, dprev);
    dh = std::move(dprev);
  }

  // Stem.
  for (std::size_t t = 0; t < dh.data.size(); ++t) {
    if (cache.stem_pre.data[t] <= 0.0) dh.data[t] = 0.0;
  }
  accumulate_param_grads(dh, cache.input, g.stem_w, g.stem_b);

  if (mu > 0.0) {
    auto add_penalty = [mu](const Matrix& w, Matrix& gw) {
      for (std::size_t t = 0; t < w.data.size(); ++t) {
        gw.data[t] += 2.0 * mu * w.data[t];
      }
    };
    add_penalty(net.stem_w, g.stem_w);
    for (std::size_t k = 0; k < net.blocks.size(); ++k) {
      add_penalty(net.blocks[k].w1, g.blocks[k].w1);
      add_penalty(net.blocks[k].w2, g.blocks[k].w2);
    }
    add_penalty(net.head_w, g.head_w);
  }
  return g;
}

double l2_penalty(const Network& net, double mu) {
  if (mu < 0.0) fail(ErrorCode::kInvalidArgument, "mu must be >= 0");
  auto sq = [](const Matrix& w) {
    double acc = 0.0;
    for (double v : w.data) acc += v * v;
    return acc;
  };
  double total = sq(net.stem_w) + sq(net.head_w);
  for (const auto& blk : net.blocks) total += sq(blk.w1) + sq(blk.w2);
  return mu * total;
}

AdamState make_adam_state(const Network& net, double learning_rate) {
  if (!(learning_rate > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "learning rate must be > 0");
  }
  AdamState state;
  state.first_moment = zeros_like(net);
  state.second_moment = zeros_like(net);
  state.learning_rate = learning_rate;
  return state;
}

void adam_step(Network& net, const GradientSet& grads, AdamState& state) {
  if (!net.stem_w.same_shape(grads.stem_w) ||
      !net.head_w.same_shape(grads.head_w) ||
      net.blocks.size() != grads.blocks.size()) {
    fail(ErrorCode::kShapeMismatch, "adam_step: gradient shapes do not match");
  }
  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double bias1 = 1.0 - std::pow(state.beta1, t);
  const double bias2 = 1.0 - std::pow(state.beta2, t);

  auto update = [&](auto& params, auto& m, auto& v, const auto& g) {
    for (std::size_t i = 0; i < params.size(); ++i) {
      m[i] = state.beta1 * m[i] + (1.0 - state.beta1) * g[i];
      v[i] = state.beta2 * v[i] + (1.0 - state.beta2) * g[i] * g[i];
      const double m_hat = m[i] / bias1;
      const double v_hat = v[i] / bias2;
      params[i] -= state.learning_rate * m_hat / (std::sqrt(v_hat) + state.epsilon);
    }
  };
  for_each_weight(net, state.first_moment, state.second_moment, grads,
                  /*include_trunk=*/!net.trunk_frozen, update);
}

Network transfer_init(const Network& source, std::size_t new_n_classes,
                      TransferMode mode, std::uint64_t seed) {
  if (new_n_classes < 2) {
    fail(ErrorCode::kInvalidArgument, "transfer_init: n_classes must be >= 2");
  }
  Network net = source;
  net.spec.n_classes = new_n_classes;
  net.spec.init_seed = seed;
  net.head_w = Matrix(new_n_classes, net.spec.width);
  net.head_b.assign(new_n_classes, 0.0);
  Rng rng(seed);
  init_weight(net.head_w, net.spec.width, rng);
  net.trunk_frozen = (mode == TransferMode::kFreezeFeatures);
  return net;
}

std::vector<std::int32_t> rank_scores(std::span<const double> scores,
                                      std::size_t k) {
  if (k == 0 || k > scores.size()) {
    fail(ErrorCode::kInvalidArgument, "rank_scores: k out of range");
  }
  std::vector<std::int32_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::int32_t a, std::int32_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  order.resize(k);
  return order;
}

std::vector<std::vector<std::int32_t>> predict_topk(const Network& net,
                                                    const Matrix& features,
                                                    std::size_t k) {
  if (k == 0 || k > net.spec.n_classes) {
    fail(ErrorCode::kInvalidArgument, "predict_topk: k out of range");
  }
  ForwardCache cache = forward(net, features);
  std::vector<std::vector<std::int32_t>> out;
  out.reserve(features.rows);
  for (std::size_t b = 0; b < features.rows; ++b) {
    out.push_back(rank_scores(cache.scores.row(b), k));
  }
  return out;
}

}  // namespace sartop
