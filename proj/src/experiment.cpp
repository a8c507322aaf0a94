#include "sartop/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "sartop/checkpoint.hpp"
#include "sartop/error.hpp"
#include "sartop/ingest.hpp"
#include "sartop/rng.hpp"
#include "sartop/sampler.hpp"

namespace sartop {

namespace {

using nlohmann::json;

// Stream tags for deriving independent RNG seeds from one run seed.
constexpr std::uint64_t kStreamData = 11;
constexpr std::uint64_t kStreamNoise = 12;
constexpr std::uint64_t kStreamValSplit = 13;
constexpr std::uint64_t kStreamInit = 14;
constexpr std::uint64_t kStreamBatch = 15;
constexpr std::uint64_t kStreamTransfer = 16;
constexpr std::uint64_t kStreamBootstrap = 17;
constexpr std::uint64_t kStreamSubsample = 18;

}  // namespace

const char* to_string(LossRegime regime) {
  switch (regime) {
    case LossRegime::kCrossEntropy: return "ce";
    case LossRegime::kTop2: return "top2";
    case LossRegime::kCombined: return "combined";
  }
  return "?";
}

const char* to_string(TransferRegime regime) {
  switch (regime) {
    case TransferRegime::kScratch: return "scratch";
    case TransferRegime::kDirect: return "direct";
    case TransferRegime::kTransitive: return "transitive";
  }
  return "?";
}

LossRegime loss_regime_from_string(const std::string& s) {
  if (s == "ce") return LossRegime::kCrossEntropy;
  if (s == "top2") return LossRegime::kTop2;
  if (s == "combined") return LossRegime::kCombined;
  fail(ErrorCode::kParse, "unknown loss regime '" + s + "'");
}

TransferRegime transfer_regime_from_string(const std::string& s) {
  if (s == "scratch") return TransferRegime::kScratch;
  if (s == "direct") return TransferRegime::kDirect;
  if (s == "transitive") return TransferRegime::kTransitive;
  fail(ErrorCode::kParse, "unknown transfer regime '" + s + "'");
}

double ExperimentConfig::effective_lambda() const {
  switch (loss) {
    case LossRegime::kCrossEntropy: return 0.0;
    case LossRegime::kTop2: return 1.0;
    case LossRegime::kCombined: return lambda;
  }
  return lambda;
}

double ExperimentConfig::effective_learning_rate() const {
  if (learning_rate) return *learning_rate;
  return loss == LossRegime::kCrossEntropy ? 1e-4 : 1e-5;
}

void ExperimentConfig::validate() const {
  if (run_id.empty() || run_id.find(',') != std::string::npos ||
      run_id.find('\n') != std::string::npos) {
    fail(ErrorCode::kInvalidArgument,
         "run_id must be nonempty and free of commas/newlines");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  }
  if (!(tau > 0.0)) fail(ErrorCode::kInvalidArgument, "tau must be > 0");
  if (!(mu >= 0.0)) fail(ErrorCode::kInvalidArgument, "mu must be >= 0");
  if (learning_rate && !(*learning_rate > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "learning_rate must be > 0");
  }
  if (batch_size == 0) fail(ErrorCode::kInvalidArgument, "batch_size must be >= 1");
  if (max_epochs == 0) fail(ErrorCode::kInvalidArgument, "max_epochs must be >= 1");
  if (patience == 0) fail(ErrorCode::kInvalidArgument, "patience must be >= 1");
  if (!(noise_rate >= 0.0 && noise_rate <= 1.0)) {
    fail(ErrorCode::kInvalidArgument, "noise_rate must lie in [0, 1]");
  }
  if (seeds.empty()) fail(ErrorCode::kInvalidArgument, "seeds must be nonempty");
  if (network.width == 0) {
    fail(ErrorCode::kInvalidArgument, "network width must be >= 1");
  }
  if (!(validation_fraction > 0.0 && validation_fraction < 1.0)) {
    fail(ErrorCode::kInvalidArgument, "validation_fraction must lie in (0, 1)");
  }
  if (dataset.source == DatasetConfig::Source::kSynthetic) {
    dataset.mixture.validate();
    if (!dataset.test_counts.empty()) {
      if (dataset.test_counts.size() != dataset.mixture.n_classes) {
        fail(ErrorCode::kShapeMismatch,
             "test_counts length must equal n_classes");
      }
      for (auto c : dataset.test_counts) {
        if (c <= 0) fail(ErrorCode::kInvalidArgument, "test_counts must be positive");
      }
    }
    if (!(dataset.shift_magnitude >= 0.0)) {
      fail(ErrorCode::kInvalidArgument, "shift_magnitude must be >= 0");
    }
  } else {
    if (dataset.train_manifest.empty() || dataset.test_manifest.empty()) {
      fail(ErrorCode::kInvalidArgument,
           "manifest source needs train_manifest and test_manifest");
    }
    if (transfer != TransferRegime::kScratch) {
      fail(ErrorCode::kInvalidArgument,
           "transfer regimes need a synthetic domain chain; manifest data "
           "supports only the scratch regime");
    }
  }
}

// ---------------------------------------------------------------------------
// Config JSON
// ---------------------------------------------------------------------------

namespace {

void check_keys(const json& obj, const std::vector<std::string>& allowed,
                const char* where) {
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    if (std::find(allowed.begin(), allowed.end(), it.key()) == allowed.end()) {
      fail(ErrorCode::kParse, std::string("config: unknown field '") +
                                  it.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_field(const json& obj, const char* key, T& out) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse,
         std::string("config: bad value for '") + key + "': " + e.what());
  }
}

DatasetConfig parse_dataset_config(const json& j) {
  if (!j.is_object()) {
    fail(ErrorCode::kParse, "config: 'dataset' must be an object");
  }
  check_keys(j,
             {"source", "n_classes", "feature_dim", "counts", "separation",
              "spread", "data_seed", "test_counts", "shift_magnitude",
              "target_train_per_class", "train_manifest", "test_manifest"},
             "dataset");
  DatasetConfig cfg;
  std::string source = "synthetic";
  read_field(j, "source", source);
  if (source == "synthetic") {
    cfg.source = DatasetConfig::Source::kSynthetic;
  } else if (source == "manifest") {
    cfg.source = DatasetConfig::Source::kManifest;
  } else {
    fail(ErrorCode::kParse, "config: dataset source must be 'synthetic' or 'manifest'");
  }
  read_field(j, "n_classes", cfg.mixture.n_classes);
  read_field(j, "feature_dim", cfg.mixture.feature_dim);
  read_field(j, "counts", cfg.mixture.counts);
  read_field(j, "separation", cfg.mixture.separation);
  read_field(j, "spread", cfg.mixture.spread);
  read_field(j, "data_seed", cfg.mixture.seed);
  read_field(j, "test_counts", cfg.test_counts);
  read_field(j, "shift_magnitude", cfg.shift_magnitude);
  read_field(j, "target_train_per_class", cfg.target_train_per_class);
  read_field(j, "train_manifest", cfg.train_manifest);
  read_field(j, "test_manifest", cfg.test_manifest);
  return cfg;
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object()) fail(ErrorCode::kParse, "config: top level must be an object");
  check_keys(j,
             {"run_id", "dataset", "loss", "lambda", "tau", "mu",
              "learning_rate", "batch_size", "max_epochs", "patience",
              "transfer", "balanced_sampling", "class_weighting",
              "noise_rate", "seeds", "network", "standardize",
              "validation_fraction", "checkpoint_out"},
             "config");

  ExperimentConfig cfg;
  read_field(j, "run_id", cfg.run_id);
  if (j.contains("dataset")) {
    cfg.dataset = parse_dataset_config(j.at("dataset"));
  }
  if (j.contains("loss")) {
    std::string s;
    read_field(j, "loss", s);
    cfg.loss = loss_regime_from_string(s);
  }
  read_field(j, "lambda", cfg.lambda);
  read_field(j, "tau", cfg.tau);
  read_field(j, "mu", cfg.mu);
  if (j.contains("learning_rate")) {
    double lr = 0.0;
    read_field(j, "learning_rate", lr);
    cfg.learning_rate = lr;
  }
  read_field(j, "batch_size", cfg.batch_size);
  read_field(j, "max_epochs", cfg.max_epochs);
  read_field(j, "patience", cfg.patience);
  if (j.contains("transfer")) {
    std::string s;
    read_field(j, "transfer", s);
    cfg.transfer = transfer_regime_from_string(s);
  }
  read_field(j, "balanced_sampling", cfg.balanced_sampling);
  read_field(j, "class_weighting", cfg.class_weighting);
  read_field(j, "noise_rate", cfg.noise_rate);
  read_field(j, "seeds", cfg.seeds);
  if (j.contains("network")) {
    const json& n = j.at("network");
    if (!n.is_object()) fail(ErrorCode::kParse, "config: 'network' must be an object");
    check_keys(n, {"width", "blocks"}, "network");
    read_field(n, "width", cfg.network.width);
    read_field(n, "blocks", cfg.network.n_blocks);
  }
  read_field(j, "standardize", cfg.standardize);
  read_field(j, "validation_fraction", cfg.validation_fraction);
  read_field(j, "checkpoint_out", cfg.checkpoint_out);
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open config '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_experiment_config(buf.str());
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

namespace {

struct PreparedData {
  std::vector<Dataset> pretrain;  // chain phases before the target
  Dataset train;                  // target training data, noise applied
  Dataset test;                   // clean held-out split
};

std::vector<std::int64_t> effective_test_counts(const DatasetConfig& d) {
  if (!d.test_counts.empty()) return d.test_counts;
  return std::vector<std::int64_t>(d.mixture.n_classes, 100);
}

PreparedData prepare_data(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  PreparedData out;
  if (cfg.dataset.source == DatasetConfig::Source::kManifest) {
    out.train = load_manifest(cfg.dataset.train_manifest);
    out.test = load_manifest(cfg.dataset.test_manifest);
    if (out.train.n_features() != out.test.n_features() ||
        out.train.n_classes() != out.test.n_classes()) {
      fail(ErrorCode::kShapeMismatch,
           "train and test manifests disagree on shape");
    }
  } else {
    MixtureSpec mixture = cfg.dataset.mixture;
    mixture.seed = Rng::mix(mixture.seed, Rng::mix(run_seed, kStreamData));
    MixtureSpec test_mixture = mixture;
    test_mixture.counts = effective_test_counts(cfg.dataset);

    if (cfg.transfer == TransferRegime::kScratch) {
      out.train = make_imbalanced_mixture(mixture, 0);
      out.test = make_imbalanced_mixture(test_mixture, 1);
    } else {
      DomainChainSpec chain{mixture, cfg.dataset.shift_magnitude};
      out.pretrain.push_back(make_domain_dataset(chain, 0, 0));
      if (cfg.transfer == TransferRegime::kTransitive) {
        out.pretrain.push_back(make_domain_dataset(chain, 1, 0));
      }
      out.train = make_domain_dataset(chain, 2, 0);
      DomainChainSpec test_chain{test_mixture, cfg.dataset.shift_magnitude};
      out.test = make_domain_dataset(test_chain, 2, 1);
    }
    if (cfg.dataset.target_train_per_class > 0) {
      out.train = subsample_per_class(out.train,
                                      cfg.dataset.target_train_per_class,
                                      Rng::mix(run_seed, kStreamSubsample));
    }
  }
  if (cfg.noise_rate > 0.0) {
    out.train = inject_label_noise(
        out.train, {cfg.noise_rate, Rng::mix(run_seed, kStreamNoise)});
  }
  return out;
}

struct PhaseResult {
  std::size_t epochs = 1;
  double best_val_loss = 0.0;
  double final_train_loss = 0.0;
};

double mean_data_loss(const Network& net, const Dataset& ds,
                      const ClassWeights& weights, const LossConfig& lc) {
  const Matrix scores = forward(net, ds.all_features()).scores;
  double total = 0.0;
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    total += combined_data_loss(scores.row(i),
                                static_cast<std::size_t>(ds.label(i)), weights,
                                lc)
                 .value;
  }
  return total / static_cast<double>(ds.n_rows());
}

// One training phase with early stopping on validation loss; restores the
// best parameters before returning.
PhaseResult train_phase(Network& net, const Dataset& data,
                        const ExperimentConfig& cfg, std::uint64_t run_seed,
                        std::size_t phase) {
  if (cfg.balanced_sampling && cfg.batch_size < data.n_classes()) {
    fail(ErrorCode::kInvalidArgument,
         "batch_size must be >= n_classes for balanced sampling");
  }

  SplitResult split = stratified_split(
      data, cfg.validation_fraction,
      Rng::mix(run_seed, Rng::mix(kStreamValSplit, phase)));
  const Dataset& train = split.train;
  const Dataset& val = split.test;

  const ClassWeights weights =
      cfg.class_weighting ? class_weights(train.class_stats())
                          : uniform_class_weights(train.n_classes());
  const LossConfig lc{cfg.effective_lambda(), cfg.tau, cfg.mu};

  AdamState adam = make_adam_state(net, cfg.effective_learning_rate());

  PhaseResult result;
  double best_val = std::numeric_limits<double>::infinity();
  Network best = net;
  std::size_t bad_epochs = 0;

  for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    const std::uint64_t batch_seed =
        Rng::mix(run_seed, Rng::mix(kStreamBatch, phase * 100003 + epoch));
    const std::vector<Batch> batches =
        cfg.balanced_sampling
            ? balanced_batches(train, cfg.batch_size, batch_seed)
            : shuffled_batches(train, cfg.batch_size, batch_seed);

    for (const Batch& batch : batches) {
      const Matrix x = train.gather(batch.rows);
      const ForwardCache cache = forward(net, x);
      Matrix loss_grads(batch.rows.size(), train.n_classes());
      for (std::size_t i = 0; i < batch.rows.size(); ++i) {
        const auto y = static_cast<std::size_t>(train.label(batch.rows[i]));
        LossValueGrad lv = combined_data_loss(cache.scores.row(i), y, weights, lc);
        std::copy(lv.grad.begin(), lv.grad.end(),
                  loss_grads.data.begin() +
                      static_cast<std::ptrdiff_t>(i * loss_grads.cols));
      }
      const GradientSet grads = backward(net, cache, loss_grads, cfg.mu);
      adam_step(net, grads, adam);
    }

    result.epochs = epoch;
    const double val_loss = mean_data_loss(net, val, weights, lc);
    if (val_loss < best_val) {
      best_val = val_loss;
      best = net;
      bad_epochs = 0;
    } else if (++bad_epochs >= cfg.patience) {
      break;
    }
  }

  net = best;
  result.best_val_loss = best_val;
  result.final_train_loss = mean_data_loss(net, train, weights, lc);
  return result;
}

void apply_standardizer_to_dataset(const Standardizer& s, Dataset& ds) {
  std::vector<double> features = ds.features();
  for (std::size_t r = 0; r < ds.n_rows(); ++r) {
    s.apply_row({features.data() + r * ds.n_features(), ds.n_features()});
  }
  ds = Dataset::make(ds.n_classes(), ds.n_features(), std::move(features),
                     {ds.labels().begin(), ds.labels().end()});
}

struct RunOutput {
  Network net;
  PhaseResult final_phase;
  Matrix test_scores;
  MetricsReport metrics;
  double seconds = 0.0;
};

// Full regime for one seed: optional pretraining phases, head transfer
// between phases, target training, test evaluation.
RunOutput execute_run(const ExperimentConfig& cfg, std::uint64_t run_seed) {
  const auto t0 = std::chrono::steady_clock::now();
  PreparedData data = prepare_data(cfg, run_seed);

  if (cfg.standardize) {
    for (std::size_t p = 0; p < data.pretrain.size(); ++p) {
      Standardizer s =
          fit_standardizer(data.pretrain[p].features().data(),
                           data.pretrain[p].n_rows(),
                           data.pretrain[p].n_features());
      apply_standardizer_to_dataset(s, data.pretrain[p]);
    }
    Standardizer s = fit_standardizer(data.train.features().data(),
                                      data.train.n_rows(),
                                      data.train.n_features());
    apply_standardizer_to_dataset(s, data.train);
    apply_standardizer_to_dataset(s, data.test);
  }

  NetworkSpec spec;
  spec.input_dim = data.train.n_features();
  spec.width = cfg.network.width;
  spec.n_blocks = cfg.network.n_blocks;
  spec.n_classes =
      data.pretrain.empty() ? data.train.n_classes() : data.pretrain[0].n_classes();
  spec.init_seed = Rng::mix(run_seed, kStreamInit);

  RunOutput out;
  out.net = init_network(spec);

  std::size_t phase = 0;
  for (const Dataset& stage : data.pretrain) {
    train_phase(out.net, stage, cfg, run_seed, phase);
    ++phase;
    const std::size_t next_classes = (phase < data.pretrain.size())
                                         ? data.pretrain[phase].n_classes()
                                         : data.train.n_classes();
    out.net = transfer_init(out.net, next_classes, TransferMode::kHeadOnlyReinit,
                            Rng::mix(run_seed, Rng::mix(kStreamTransfer, phase)));
  }
  out.final_phase = train_phase(out.net, data.train, cfg, run_seed, phase);

  out.test_scores = forward(out.net, data.test.all_features()).scores;
  out.metrics = evaluate(out.test_scores, data.test.labels(),
                         data.test.n_classes());
  out.seconds = std::chrono::duration<double>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

ReportRow make_row(const ExperimentConfig& cfg, const std::string& run_id,
                   std::uint64_t seed, const PhaseResult& phase,
                   const MetricsReport& metrics, double seconds) {
  ReportRow row;
  row.run_id = run_id;
  row.seed = seed;
  row.transfer_regime = to_string(cfg.transfer);
  row.loss_regime = to_string(cfg.loss);
  row.epochs = phase.epochs;
  row.train_loss = phase.final_train_loss;
  row.val_loss = phase.best_val_loss;
  row.top1 = metrics.top1_accuracy;
  row.top2 = metrics.top2_accuracy.value_or(0.0);
  row.macro_f1 = metrics.macro_f1;
  row.seconds = seconds;
  return row;
}

}  // namespace

std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  std::vector<ReportRow> rows;
  rows.reserve(cfg.seeds.size());
  for (const std::uint64_t seed : cfg.seeds) {
    RunOutput out = execute_run(cfg, seed);
    rows.push_back(make_row(cfg, cfg.run_id, seed, out.final_phase,
                            out.metrics, out.seconds));
    if (!cfg.checkpoint_out.empty()) {
      save_checkpoint(out.net, cfg.checkpoint_out + "_seed" +
                                   std::to_string(seed) + ".ckpt");
    }
  }
  return rows;
}

std::vector<std::uint64_t> derive_bagging_seeds(std::uint64_t master_seed,
                                                std::size_t n_models) {
  std::vector<std::uint64_t> seeds;
  seeds.reserve(n_models);
  for (std::size_t m = 0; m < n_models; ++m) {
    seeds.push_back(Rng::mix(master_seed, Rng::mix(kStreamBootstrap, m)));
  }
  return seeds;
}

std::vector<ReportRow> run_bagging(const ExperimentConfig& cfg,
                                   std::size_t n_models) {
  cfg.validate();
  if (n_models == 0) {
    fail(ErrorCode::kInvalidArgument, "run_bagging: n_models must be >= 1");
  }
  if (cfg.transfer != TransferRegime::kScratch) {
    fail(ErrorCode::kInvalidArgument,
         "run_bagging supports the scratch regime only");
  }
  std::vector<ReportRow> rows;

  for (const std::uint64_t seed : cfg.seeds) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto sub_seeds = derive_bagging_seeds(seed, n_models);
    const PreparedData base = prepare_data(cfg, seed);

    std::vector<ModelPredictions> predictions;
    predictions.reserve(n_models);
    std::size_t max_epochs_seen = 1;
    double train_loss_sum = 0.0;
    double val_loss_sum = 0.0;
    const std::vector<std::int32_t> test_labels(base.test.labels().begin(),
                                                base.test.labels().end());
    Matrix prob_sum(base.test.n_rows(), base.test.n_classes());

    for (std::size_t m = 0; m < n_models; ++m) {
      Dataset train = bootstrap_resample(
          base.train, Rng::mix(sub_seeds[m], kStreamBootstrap));
      Dataset test = base.test;

      if (cfg.standardize) {
        Standardizer s = fit_standardizer(train.features().data(),
                                          train.n_rows(), train.n_features());
        apply_standardizer_to_dataset(s, train);
        apply_standardizer_to_dataset(s, test);
      }

      NetworkSpec spec;
      spec.input_dim = train.n_features();
      spec.width = cfg.network.width;
      spec.n_blocks = cfg.network.n_blocks;
      spec.n_classes = train.n_classes();
      spec.init_seed = Rng::mix(sub_seeds[m], kStreamInit);
      Network net = init_network(spec);

      PhaseResult phase = train_phase(net, train, cfg, sub_seeds[m], 0);

      const Matrix scores = forward(net, test.all_features()).scores;
      MetricsReport metrics = evaluate(scores, test.labels(), test.n_classes());
      const double seconds = std::chrono::duration<double>(
                                 std::chrono::steady_clock::now() - t0)
                                 .count();
      rows.push_back(make_row(cfg, cfg.run_id + "/m" + std::to_string(m),
                              seed, phase, metrics, seconds));

      ModelPredictions pred;
      pred.ranked.reserve(scores.rows);
      pred.probs = Matrix(scores.rows, scores.cols);
      for (std::size_t i = 0; i < scores.rows; ++i) {
        pred.ranked.push_back(rank_scores(scores.row(i), scores.cols));
        const auto p = softmax(scores.row(i));
        std::copy(p.begin(), p.end(),
                  pred.probs.data.begin() +
                      static_cast<std::ptrdiff_t>(i * scores.cols));
      }
      predictions.push_back(std::move(pred));

      max_epochs_seen = std::max(max_epochs_seen, phase.epochs);
      train_loss_sum += phase.final_train_loss;
      val_loss_sum += phase.best_val_loss;
      for (std::size_t t = 0; t < prob_sum.data.size(); ++t) {
        prob_sum.data[t] += predictions.back().probs.data[t];
      }
    }

    const std::vector<std::int32_t> voted = majority_vote(predictions);
    const std::size_t n_classes = prob_sum.cols;
    MetricsReport ensemble = macro_f1(confusion(test_labels, voted, n_classes));
    for (double& v : prob_sum.data) {
      v /= static_cast<double>(n_models);
    }
    ensemble.top2_accuracy = topk_accuracy(
        prob_sum, test_labels, std::min<std::size_t>(2, n_classes));

    PhaseResult ensemble_phase;
    ensemble_phase.epochs = max_epochs_seen;
    ensemble_phase.final_train_loss =
        train_loss_sum / static_cast<double>(n_models);
    ensemble_phase.best_val_loss = val_loss_sum / static_cast<double>(n_models);
    const double seconds = std::chrono::duration<double>(
                               std::chrono::steady_clock::now() - t0)
                               .count();
    rows.push_back(make_row(cfg, cfg.run_id + "/ensemble", seed,
                            ensemble_phase, ensemble, seconds));
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kCsvHeader =
    "run_id,seed,transfer_regime,loss_regime,epochs,train_loss,val_loss,"
    "top1,top2,macro_f1,seconds";

double round6(double v) {
  if (!std::isfinite(v)) {
    fail(ErrorCode::kInvalidArgument, "report value is not finite");
  }
  return static_cast<double>(std::llround(v * 1e6)) / 1e6;
}

std::string format6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

}  // namespace

std::string report_to_csv(const std::vector<ReportRow>& rows) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const auto& r : rows) {
    out += r.run_id + "," + std::to_string(r.seed) + "," + r.transfer_regime +
           "," + r.loss_regime + "," + std::to_string(r.epochs) + "," +
           format6(r.train_loss) + "," + format6(r.val_loss) + "," +
           format6(r.top1) + "," + format6(r.top2) + "," +
           format6(r.macro_f1) + "," + format6(r.seconds) + "\n";
  }
  return out;
}

std::string report_to_json(const std::vector<ReportRow>& rows) {
  json arr = json::array();
  for (const auto& r : rows) {
    arr.push_back({{"run_id", r.run_id},
                   {"seed", r.seed},
                   {"transfer_regime", r.transfer_regime},
                   {"loss_regime", r.loss_regime},
                   {"epochs", r.epochs},
                   {"train_loss", round6(r.train_loss)},
                   {"val_loss", round6(r.val_loss)},
                   {"top1", round6(r.top1)},
                   {"top2", round6(r.top2)},
                   {"macro_f1", round6(r.macro_f1)},
                   {"seconds", round6(r.seconds)}});
  }
  return arr.dump(2) + "\n";
}

std::vector<ReportRow> report_from_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader) {
    fail(ErrorCode::kParse, "report: missing or wrong CSV header");
  }
  std::vector<ReportRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t pos = line.find(',', start);
      if (pos == std::string::npos) {
        fields.push_back(line.substr(start));
        break;
      }
      fields.push_back(line.substr(start, pos - start));
      start = pos + 1;
    }
    if (fields.size() != 11) {
      fail(ErrorCode::kParse, "report: row with wrong field count");
    }
    try {
      ReportRow r;
      r.run_id = fields[0];
      r.seed = std::stoull(fields[1]);
      r.transfer_regime = fields[2];
      r.loss_regime = fields[3];
      r.epochs = std::stoull(fields[4]);
      r.train_loss = std::stod(fields[5]);
      r.val_loss = std::stod(fields[6]);
      r.top1 = std::stod(fields[7]);
      r.top2 = std::stod(fields[8]);
      r.macro_f1 = std::stod(fields[9]);
      r.seconds = std::stod(fields[10]);
      rows.push_back(std::move(r));
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, "report: unparsable CSV row '" + line + "'");
    }
  }
  return rows;
}

std::vector<ReportRow> report_from_json(const std::string& text) {
  json arr;
  try {
    arr = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorCode::kParse, std::string("report: invalid JSON: ") + e.what());
  }
  if (!arr.is_array()) fail(ErrorCode::kParse, "report: JSON must be an array");
  std::vector<ReportRow> rows;
  for (const auto& o : arr) {
    try {
      ReportRow r;
      r.run_id = o.at("run_id").get<std::string>();
      r.seed = o.at("seed").get<std::uint64_t>();
      r.transfer_regime = o.at("transfer_regime").get<std::string>();
      r.loss_regime = o.at("loss_regime").get<std::string>();
      r.epochs = o.at("epochs").get<std::size_t>();
      r.train_loss = o.at("train_loss").get<double>();
      r.val_loss = o.at("val_loss").get<double>();
      r.top1 = o.at("top1").get<double>();
      r.top2 = o.at("top2").get<double>();
      r.macro_f1 = o.at("macro_f1").get<double>();
      r.seconds = o.at("seconds").get<double>();
      rows.push_back(std::move(r));
    } catch (const json::exception& e) {
      fail(ErrorCode::kParse, std::string("report: bad record: ") + e.what());
    }
  }
  return rows;
}

void emit_report(const std::vector<ReportRow>& rows, const std::string& path,
                 const std::string& format) {
  if (rows.empty()) {
    fail(ErrorCode::kInvalidArgument, "emit_report: no rows to write");
  }
  std::string text;
  if (format == "csv") {
    text = report_to_csv(rows);
  } else if (format == "json") {
    text = report_to_json(rows);
  } else {
    fail(ErrorCode::kInvalidArgument,
         "emit_report: format must be 'csv' or 'json'");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing report to '" + path + "'");
}

std::vector<ReportRow> load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open report '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    return report_from_json(text);
  }
  return report_from_csv(text);
}

// ---------------------------------------------------------------------------
// Checkpoint evaluation
// ---------------------------------------------------------------------------

MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::string& manifest_path) {
  const Network net = load_checkpoint(checkpoint_path);
  const Dataset ds = load_manifest(manifest_path);
  if (ds.n_features() != net.spec.input_dim) {
    fail(ErrorCode::kShapeMismatch,
         "manifest feature width does not match checkpoint input_dim");
  }
  if (ds.n_classes() != net.spec.n_classes) {
    fail(ErrorCode::kShapeMismatch,
         "manifest class count does not match checkpoint n_classes");
  }
  if (ds.n_rows() == 0) {
    fail(ErrorCode::kInvalidArgument, "manifest has no rows to evaluate");
  }
  const Matrix scores = forward(net, ds.all_features()).scores;
  return evaluate(scores, ds.labels(), ds.n_classes());
}

std::string metrics_report_to_json(const MetricsReport& report) {
  json j;
  auto arr6 = [](const std::vector<double>& v) {
    json a = json::array();
    for (double x : v) a.push_back(round6(x));
    return a;
  };
  j["precision"] = arr6(report.precision);
  j["recall"] = arr6(report.recall);
  j["f1"] = arr6(report.f1);
  j["macro_f1"] = round6(report.macro_f1);
  j["top1_accuracy"] = round6(report.top1_accuracy);
  if (report.top2_accuracy) {
    j["top2_accuracy"] = round6(*report.top2_accuracy);
  }
  return j.dump(2) + "\n";
}

}  // namespace sartop
