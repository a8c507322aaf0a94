#ifndef SARTOP_EXPERIMENT_HPP_
#define SARTOP_EXPERIMENT_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sartop/dataset.hpp"
#include "sartop/metrics.hpp"
#include "sartop/network.hpp"
#include "sartop/synth.hpp"

namespace sartop {

enum class LossRegime { kCrossEntropy, kTop2, kCombined };
enum class TransferRegime { kScratch, kDirect, kTransitive };

const char* to_string(LossRegime regime);
const char* to_string(TransferRegime regime);
LossRegime loss_regime_from_string(const std::string& s);
TransferRegime transfer_regime_from_string(const std::string& s);

struct NetworkConfig {
  std::size_t width = 16;
  std::size_t n_blocks = 1;
};

struct DatasetConfig {
  enum class Source { kSynthetic, kManifest };
  Source source = Source::kSynthetic;

  // Synthetic source. The mixture seed is combined with each run seed, so
  // every run draws its own dataset; the test split shares the run's class
  // means but uses a disjoint sample stream.
  MixtureSpec mixture;
  std::vector<std::int64_t> test_counts;  // empty -> 100 per class
  double shift_magnitude = 1.0;           // chain step for transfer regimes
  std::size_t target_train_per_class = 0; // 0 = use all target rows

  // Manifest source (scratch regime only).
  std::string train_manifest;
  std::string test_manifest;
};

/// Everything one experiment needs; parsed from a single JSON document
/// (unknown fields are rejected).
struct ExperimentConfig {
  std::string run_id = "exp";
  DatasetConfig dataset;
  LossRegime loss = LossRegime::kCombined;
  double lambda = 0.2;
  double tau = 1.0;
  double mu = 0.25;
  /// Unset: 1e-5 whenever the top-2 term is active, 1e-4 for plain
  /// cross-entropy.
  std::optional<double> learning_rate;
  std::size_t batch_size = 70;
  std::size_t max_epochs = 30;
  std::size_t patience = 3;
  TransferRegime transfer = TransferRegime::kScratch;
  bool balanced_sampling = true;
  bool class_weighting = true;
  double noise_rate = 0.0;
  std::vector<std::uint64_t> seeds;
  NetworkConfig network;
  bool standardize = false;
  double validation_fraction = 0.1;
  /// When nonempty, the final model of each run is written to
  /// "<checkpoint_out>_seed<seed>.ckpt".
  std::string checkpoint_out;

  void validate() const;
  double effective_lambda() const;
  double effective_learning_rate() const;
};

ExperimentConfig parse_experiment_config(const std::string& json_text);
ExperimentConfig load_experiment_config(const std::string& path);

struct ReportRow {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string transfer_regime;
  std::string loss_regime;
  std::size_t epochs = 1;
  double train_loss = 0.0;
  double val_loss = 0.0;
  double top1 = 0.0;
  double top2 = 0.0;
  double macro_f1 = 0.0;
  double seconds = 0.0;
};

/// Trains and evaluates one run per seed. Per run: build (or load) the
/// datasets, inject label noise into the target training labels, train
/// according to the transfer regime with early stopping on validation loss
/// (best weights restored), and evaluate on the held-out test split.
std::vector<ReportRow> run_experiment(const ExperimentConfig& cfg);

/// Per seed: trains n_models sub-models on independent bootstrap resamples
/// (seeds derived from the run seed), then votes their test predictions.
/// Emits the per-model rows followed by one "/ensemble" row.
std::vector<ReportRow> run_bagging(const ExperimentConfig& cfg,
                                   std::size_t n_models);

std::vector<std::uint64_t> derive_bagging_seeds(std::uint64_t master_seed,
                                                std::size_t n_models);

/// CSV (fixed column order, 6 fractional digits) or JSON (same field
/// names). Refuses to write an empty report.
void emit_report(const std::vector<ReportRow>& rows, const std::string& path,
                 const std::string& format);
std::vector<ReportRow> load_report(const std::string& path);

std::string report_to_csv(const std::vector<ReportRow>& rows);
std::string report_to_json(const std::vector<ReportRow>& rows);
std::vector<ReportRow> report_from_csv(const std::string& text);
std::vector<ReportRow> report_from_json(const std::string& text);

/// Loads a checkpoint and a manifest and scores the whole manifest.
MetricsReport evaluate_checkpoint(const std::string& checkpoint_path,
                                  const std::string& manifest_path);
std::string metrics_report_to_json(const MetricsReport& report);

}  // namespace sartop

#endif  // SARTOP_EXPERIMENT_HPP_
