#include "sartop.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <string>
#include <vector>

#include <json.hpp>

#include "sartop/dataset.hpp"
#include "sartop/error.hpp"
#include "sartop/experiment.hpp"
#include "sartop/ingest.hpp"
#include "sartop/synth.hpp"

struct sartop_dataset {
  sartop::Dataset impl;
};

struct sartop_report {
  std::vector<sartop::ReportRow> rows;
};

namespace {

thread_local std::string g_last_error;

int set_error(const sartop::Error& e) {
  g_last_error = e.what();
  switch (e.code()) {
    case sartop::ErrorCode::kInvalidArgument: return SARTOP_ERR_INVALID_ARGUMENT;
    case sartop::ErrorCode::kShapeMismatch: return SARTOP_ERR_SHAPE;
    case sartop::ErrorCode::kParse: return SARTOP_ERR_PARSE;
    case sartop::ErrorCode::kIo: return SARTOP_ERR_IO;
    case sartop::ErrorCode::kDomain: return SARTOP_ERR_DOMAIN;
  }
  return SARTOP_ERR_INTERNAL;
}

// Runs fn, translating exceptions into error codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return SARTOP_OK;
  } catch (const sartop::Error& e) {
    return set_error(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SARTOP_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown error";
    return SARTOP_ERR_INTERNAL;
  }
}

int require(bool ok, const char* message) {
  if (ok) return SARTOP_OK;
  g_last_error = message;
  return SARTOP_ERR_INVALID_ARGUMENT;
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* sartop_version(void) { return "0.1.0"; }

const char* sartop_last_error(void) { return g_last_error.c_str(); }

int sartop_dataset_synthesize(const char* mixture_json, sartop_dataset** out) {
  if (int rc = require(mixture_json && out, "null argument")) return rc;
  return guarded([&] {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(mixture_json);
    } catch (const nlohmann::json::exception& e) {
      sartop::fail(sartop::ErrorCode::kParse,
                   std::string("mixture spec: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) {
      sartop::fail(sartop::ErrorCode::kParse,
                   "mixture spec must be a JSON object");
    }
    static const std::vector<std::string> allowed = {
        "n_classes", "feature_dim", "counts",       "separation",
        "spread",    "seed",        "sample_stream"};
    for (auto it = j.begin(); it != j.end(); ++it) {
      if (std::find(allowed.begin(), allowed.end(), it.key()) ==
          allowed.end()) {
        sartop::fail(sartop::ErrorCode::kParse,
                     "mixture spec: unknown field '" + it.key() + "'");
      }
    }
    sartop::MixtureSpec spec;
    std::uint64_t stream = 0;
    try {
      if (j.contains("n_classes")) spec.n_classes = j.at("n_classes").get<std::size_t>();
      if (j.contains("feature_dim")) spec.feature_dim = j.at("feature_dim").get<std::size_t>();
      if (j.contains("counts")) spec.counts = j.at("counts").get<std::vector<std::int64_t>>();
      if (j.contains("separation")) spec.separation = j.at("separation").get<double>();
      if (j.contains("spread")) spec.spread = j.at("spread").get<double>();
      if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
      if (j.contains("sample_stream")) stream = j.at("sample_stream").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
      sartop::fail(sartop::ErrorCode::kParse,
                   std::string("mixture spec: bad field: ") + e.what());
    }
    auto* handle = new sartop_dataset{sartop::make_imbalanced_mixture(spec, stream)};
    *out = handle;
  });
}

int sartop_dataset_load_manifest(const char* path, sartop_dataset** out) {
  if (int rc = require(path && out, "null argument")) return rc;
  return guarded([&] { *out = new sartop_dataset{sartop::load_manifest(path)}; });
}

int sartop_dataset_save_manifest(const sartop_dataset* ds, const char* path) {
  if (int rc = require(ds && path, "null argument")) return rc;
  return guarded([&] { sartop::save_manifest(ds->impl, path); });
}

int sartop_dataset_info(const sartop_dataset* ds, uint32_t* n_rows,
                        uint32_t* n_features, uint32_t* n_classes) {
  if (int rc = require(ds != nullptr, "null dataset")) return rc;
  if (n_rows) *n_rows = static_cast<uint32_t>(ds->impl.n_rows());
  if (n_features) *n_features = static_cast<uint32_t>(ds->impl.n_features());
  if (n_classes) *n_classes = static_cast<uint32_t>(ds->impl.n_classes());
  return SARTOP_OK;
}

void sartop_dataset_free(sartop_dataset* ds) { delete ds; }

int sartop_ingest_pgm(const char* const* image_paths,
                      const char* const* sidecar_paths, size_t n_images,
                      uint32_t patch_size, int apply_log_transform,
                      int32_t n_classes, sartop_dataset** out) {
  if (int rc = require(image_paths && sidecar_paths && out && n_images > 0,
                       "null argument or zero images")) {
    return rc;
  }
  return guarded([&] {
    std::vector<double> features;
    std::vector<std::int32_t> labels;
    std::size_t n_features = 0;
    std::int32_t max_label = -1;
    for (size_t i = 0; i < n_images; ++i) {
      const sartop::ImageGrid img = sartop::read_pgm16(image_paths[i]);
      sartop::PatchSet patches;
      if (apply_log_transform != 0) {
        patches = sartop::tile(sartop::log_transform(img), patch_size);
      } else {
        patches = sartop::tile(img, patch_size);
      }
      const auto sidecar = sartop::read_patch_labels(sidecar_paths[i]);
      // Join per image; class count is resolved over the whole batch below.
      const sartop::Dataset part =
          sartop::patches_to_dataset(patches, sidecar, 0);
      if (n_features == 0) {
        n_features = part.n_features();
      } else if (part.n_features() != n_features) {
        sartop::fail(sartop::ErrorCode::kShapeMismatch,
                     "images produce differing patch sizes");
      }
      features.insert(features.end(), part.features().begin(),
                      part.features().end());
      for (std::int32_t y : part.labels()) {
        labels.push_back(y);
        max_label = std::max(max_label, y);
      }
    }
    std::size_t classes =
        n_classes > 0 ? static_cast<std::size_t>(n_classes)
                      : static_cast<std::size_t>(std::max(max_label + 1, 2));
    *out = new sartop_dataset{sartop::Dataset::make(
        classes, n_features, std::move(features), std::move(labels))};
  });
}

int sartop_run_experiment(const char* config_json, sartop_report** out) {
  if (int rc = require(config_json && out, "null argument")) return rc;
  return guarded([&] {
    const auto cfg = sartop::parse_experiment_config(config_json);
    *out = new sartop_report{sartop::run_experiment(cfg)};
  });
}

int sartop_run_bagging(const char* config_json, uint32_t n_models,
                       sartop_report** out) {
  if (int rc = require(config_json && out, "null argument")) return rc;
  return guarded([&] {
    const auto cfg = sartop::parse_experiment_config(config_json);
    *out = new sartop_report{sartop::run_bagging(cfg, n_models)};
  });
}

int sartop_evaluate_checkpoint(const char* checkpoint_path,
                               const char* manifest_path,
                               char** metrics_json_out) {
  if (int rc = require(checkpoint_path && manifest_path && metrics_json_out,
                       "null argument")) {
    return rc;
  }
  return guarded([&] {
    const auto report =
        sartop::evaluate_checkpoint(checkpoint_path, manifest_path);
    *metrics_json_out = dup_string(sartop::metrics_report_to_json(report));
    if (*metrics_json_out == nullptr) {
      sartop::fail(sartop::ErrorCode::kInvalidArgument, "out of memory");
    }
  });
}

void sartop_string_free(char* s) { std::free(s); }

int sartop_report_load(const char* path, sartop_report** out) {
  if (int rc = require(path && out, "null argument")) return rc;
  return guarded([&] { *out = new sartop_report{sartop::load_report(path)}; });
}

int sartop_report_append(sartop_report* dst, const sartop_report* src) {
  if (int rc = require(dst && src, "null argument")) return rc;
  dst->rows.insert(dst->rows.end(), src->rows.begin(), src->rows.end());
  return SARTOP_OK;
}

int sartop_report_write(const sartop_report* report, const char* path,
                        const char* format) {
  if (int rc = require(report && path && format, "null argument")) return rc;
  return guarded([&] { sartop::emit_report(report->rows, path, format); });
}

int sartop_report_row_count(const sartop_report* report, size_t* out) {
  if (int rc = require(report && out, "null argument")) return rc;
  *out = report->rows.size();
  return SARTOP_OK;
}

int sartop_report_row_json(const sartop_report* report, size_t index,
                           char** json_out) {
  if (int rc = require(report && json_out, "null argument")) return rc;
  if (index >= report->rows.size()) {
    return require(false, "report row index out of range");
  }
  return guarded([&] {
    const std::string text =
        sartop::report_to_json({report->rows[index]});
    // report_to_json wraps in an array; unwrap to the single object.
    nlohmann::json arr = nlohmann::json::parse(text);
    *json_out = dup_string(arr.at(0).dump());
    if (*json_out == nullptr) {
      sartop::fail(sartop::ErrorCode::kInvalidArgument, "out of memory");
    }
  });
}

void sartop_report_free(sartop_report* report) { delete report; }

}  // extern "C"
