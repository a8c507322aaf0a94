#include "sartop/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sartop/error.hpp"

namespace sartop {

Dataset Dataset::make(std::size_t n_classes, std::size_t n_features,
                      std::vector<double> features,
                      std::vector<std::int32_t> labels) {
  if (n_classes < 2) {
    fail(ErrorCode::kInvalidArgument, "dataset needs at least 2 classes");
  }
  if (n_features == 0) {
    fail(ErrorCode::kInvalidArgument, "dataset needs at least 1 feature");
  }
  if (features.size() != labels.size() * n_features) {
    fail(ErrorCode::kShapeMismatch,
         "feature buffer size does not match label count");
  }
  for (double v : features) {
    if (!std::isfinite(v)) {
      fail(ErrorCode::kDomain, "dataset contains a non-finite feature");
    }
  }
  Dataset ds;
  ds.n_classes_ = n_classes;
  ds.n_features_ = n_features;
  ds.features_ = std::move(features);
  ds.labels_ = std::move(labels);
  ds.class_index_.assign(n_classes, {});
  for (std::size_t i = 0; i < ds.labels_.size(); ++i) {
    const std::int32_t y = ds.labels_[i];
    if (y < 0 || static_cast<std::size_t>(y) >= n_classes) {
      fail(ErrorCode::kInvalidArgument,
           "label " + std::to_string(y) + " out of range at row " +
               std::to_string(i));
    }
    ds.class_index_[static_cast<std::size_t>(y)].push_back(i);
  }
  return ds;
}

ClassStats Dataset::class_stats() const {
  ClassStats stats;
  stats.counts.reserve(n_classes_);
  for (const auto& rows : class_index_) {
    stats.counts.push_back(static_cast<std::int64_t>(rows.size()));
  }
  return stats;
}

Matrix Dataset::gather(std::span<const std::size_t> rows) const {
  Matrix out(rows.size(), n_features_);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r] >= n_rows()) {
      fail(ErrorCode::kInvalidArgument, "gather: row id out of range");
    }
    auto src = row(rows[r]);
    std::copy(src.begin(), src.end(), out.data.begin() + r * n_features_);
  }
  return out;
}

Matrix Dataset::all_features() const {
  Matrix out(n_rows(), n_features_);
  out.data = features_;
  return out;
}

Dataset Dataset::select(std::span<const std::size_t> rows) const {
  std::vector<double> features;
  features.reserve(rows.size() * n_features_);
  std::vector<std::int32_t> labels;
  labels.reserve(rows.size());
  for (std::size_t id : rows) {
    if (id >= n_rows()) {
      fail(ErrorCode::kInvalidArgument, "select: row id out of range");
    }
    auto src = row(id);
    features.insert(features.end(), src.begin(), src.end());
    labels.push_back(labels_[id]);
  }
  return make(n_classes_, n_features_, std::move(features), std::move(labels));
}

Dataset Dataset::with_labels(std::vector<std::int32_t> labels) const {
  if (labels.size() != labels_.size()) {
    fail(ErrorCode::kShapeMismatch, "with_labels: label count mismatch");
  }
  return make(n_classes_, n_features_, features_, std::move(labels));
}

namespace {

// Splits on commas; no quoting (the formats here never need it).
std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::int64_t parse_int(const std::string& tok, const char* what) {
  try {
    std::size_t used = 0;
    std::int64_t v = std::stoll(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    fail(ErrorCode::kParse,
         std::string("manifest: bad ") + what + " '" + tok + "'");
  }
}

double parse_double(const std::string& tok) {
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (tok.empty() || end != tok.c_str() + tok.size()) {
    fail(ErrorCode::kParse, "manifest: bad number '" + tok + "'");
  }
  return v;
}

}  // namespace

Dataset parse_manifest(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) {
    fail(ErrorCode::kParse, "manifest: empty input");
  }
  auto header = split_csv(line);
  if (header.size() != 3) {
    fail(ErrorCode::kParse,
         "manifest: header must be n_classes,n_features,n_rows");
  }
  const std::int64_t n_classes = parse_int(header[0], "class count");
  const std::int64_t n_features = parse_int(header[1], "feature count");
  const std::int64_t n_rows = parse_int(header[2], "row count");
  if (n_classes < 2 || n_features < 1 || n_rows < 0) {
    fail(ErrorCode::kParse, "manifest: invalid header values");
  }

  std::vector<double> features;
  features.reserve(static_cast<std::size_t>(n_rows * n_features));
  std::vector<std::int32_t> labels;
  labels.reserve(static_cast<std::size_t>(n_rows));

  std::int64_t row_number = 0;
  while (std::getline(in, line)) {
    if (line.empty() && in.eof()) break;  // trailing newline
    ++row_number;
    auto fields = split_csv(line);
    if (static_cast<std::int64_t>(fields.size()) != n_features + 1) {
      fail(ErrorCode::kParse,
           "manifest: row " + std::to_string(row_number) + " has " +
               std::to_string(fields.size()) + " fields, expected " +
               std::to_string(n_features + 1));
    }
    const std::int64_t label = parse_int(fields[0], "label");
    if (label < 0 || label >= n_classes) {
      fail(ErrorCode::kParse, "manifest: row " + std::to_string(row_number) +
                                  " label out of range");
    }
    labels.push_back(static_cast<std::int32_t>(label));
    for (std::size_t f = 1; f < fields.size(); ++f) {
      features.push_back(parse_double(fields[f]));
    }
  }
  if (row_number != n_rows) {
    fail(ErrorCode::kParse, "manifest: header promises " +
                                std::to_string(n_rows) + " rows, found " +
                                std::to_string(row_number));
  }
  return Dataset::make(static_cast<std::size_t>(n_classes),
                       static_cast<std::size_t>(n_features),
                       std::move(features), std::move(labels));
}

std::string manifest_to_string(const Dataset& ds) {
  std::string out = std::to_string(ds.n_classes()) + "," +
                    std::to_string(ds.n_features()) + "," +
                    std::to_string(ds.n_rows()) + "\n";
  char buf[40];
  for (std::size_t i = 0; i < ds.n_rows(); ++i) {
    out += std::to_string(ds.label(i));
    for (double v : ds.row(i)) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out += ',';
      out += buf;
    }
    out += '\n';
  }
  return out;
}

Dataset load_manifest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open manifest '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

void save_manifest(const Dataset& ds, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  const std::string text = manifest_to_string(ds);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing manifest to '" + path + "'");
}

}  // namespace sartop
