#ifndef SARTOP_DATASET_HPP_
#define SARTOP_DATASET_HPP_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "sartop/loss.hpp"
#include "sartop/matrix.hpp"

namespace sartop {

/// Immutable feature/label container with a per-class row index.
/// Construct through make() so the index and the invariants (labels in
/// range, consistent row widths) are always in force.
class Dataset {
 public:
  Dataset() = default;

  static Dataset make(std::size_t n_classes, std::size_t n_features,
                      std::vector<double> features,
                      std::vector<std::int32_t> labels);

  std::size_t n_rows() const { return labels_.size(); }
  std::size_t n_features() const { return n_features_; }
  std::size_t n_classes() const { return n_classes_; }

  std::span<const double> row(std::size_t i) const {
    return {features_.data() + i * n_features_, n_features_};
  }
  std::int32_t label(std::size_t i) const { return labels_[i]; }
  std::span<const std::int32_t> labels() const { return labels_; }
  const std::vector<double>& features() const { return features_; }

  const std::vector<std::size_t>& class_rows(std::size_t c) const {
    return class_index_[c];
  }
  ClassStats class_stats() const;

  /// Copies the selected rows into a feature matrix.
  Matrix gather(std::span<const std::size_t> rows) const;
  Matrix all_features() const;

  /// New dataset holding copies of the selected rows, in order.
  Dataset select(std::span<const std::size_t> rows) const;

  /// Same features, new labels (index rebuilt).
  Dataset with_labels(std::vector<std::int32_t> labels) const;

 private:
  std::size_t n_classes_ = 0;
  std::size_t n_features_ = 0;
  std::vector<double> features_;  // n_rows x n_features, row-major
  std::vector<std::int32_t> labels_;
  std::vector<std::vector<std::size_t>> class_index_;
};

/// Text manifest: header "n_classes,n_features,n_rows", then one line per
/// sample "label,f1,...,fk". The loader rejects inconsistent rows.
Dataset load_manifest(const std::string& path);
void save_manifest(const Dataset& ds, const std::string& path);

Dataset parse_manifest(const std::string& text);
std::string manifest_to_string(const Dataset& ds);

}  // namespace sartop

#endif  // SARTOP_DATASET_HPP_
