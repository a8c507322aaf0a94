#ifndef SARTOP_INGEST_HPP_
#define SARTOP_INGEST_HPP_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sartop/dataset.hpp"

namespace sartop {

/// 16-bit grayscale raster, row-major.
struct ImageGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint16_t> values;
};

/// Real-valued raster produced by the log transform.
struct RealGrid {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> values;
};

struct Patch {
  std::size_t origin_x = 0;
  std::size_t origin_y = 0;
  std::vector<double> values;  // patch_size * patch_size, row-major
};

struct PatchSet {
  std::size_t patch_size = 0;
  std::vector<Patch> patches;
  /// Set when the source image was smaller than one patch in either
  /// dimension (the set is then empty).
  bool undersized = false;
};

// Source pixels are spaced 1.25 m; the default 160 px patch covers a
// 200 x 200 m ground footprint.
inline constexpr double kPixelSpacingMeters = 1.25;
inline constexpr std::size_t kDefaultPatchSize = 160;

inline constexpr double patch_footprint_meters(std::size_t patch_size) {
  return kPixelSpacingMeters * static_cast<double>(patch_size);
}

/// Binary PGM (`P5`) reader. Header: ASCII width/height/maxval with `#`
/// comments; maxval > 255 means two bytes per sample, most significant
/// first; maxval <= 255 means one byte, widened to 16 bits.
ImageGrid read_pgm16(const std::string& path);
ImageGrid parse_pgm16(const std::vector<std::uint8_t>& bytes);

/// Writer (two-byte samples, maxval 65535); round-trips an ImageGrid
/// bit-exactly.
void write_pgm16(const ImageGrid& img, const std::string& path);
std::vector<std::uint8_t> pgm16_to_bytes(const ImageGrid& img);

/// Elementwise v -> ln(1 + v); strictly monotone, finite, >= 0.
RealGrid log_transform(const ImageGrid& img);

/// Non-overlapping row-major tiling; right/bottom remainders are dropped.
PatchSet tile(const ImageGrid& img, std::size_t patch_size = kDefaultPatchSize);
PatchSet tile(const RealGrid& img, std::size_t patch_size = kDefaultPatchSize);

/// Per-feature affine transform fitted on training rows: zero mean, unit
/// (population) variance; constant features map to zero.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  // 1/stddev, or 0 for constant features

  void apply_row(std::span<double> row) const;
};

Standardizer fit_standardizer(const double* rows, std::size_t n_rows,
                              std::size_t n_features);

/// Fits on the given patches and returns (parameters, transformed copy).
std::pair<Standardizer, PatchSet> standardize(const PatchSet& train_patches);

/// Label sidecar: one line per patch, "origin_x,origin_y,label".
struct PatchLabel {
  std::size_t origin_x = 0;
  std::size_t origin_y = 0;
  std::int32_t label = 0;
};

std::vector<PatchLabel> read_patch_labels(const std::string& path);
std::vector<PatchLabel> parse_patch_labels(const std::string& text);

/// Joins patches with their sidecar labels into a Dataset. Every patch must
/// have exactly one label entry. n_classes 0 means infer (max label + 1,
/// at least 2).
Dataset patches_to_dataset(const PatchSet& patches,
                           const std::vector<PatchLabel>& labels,
                           std::size_t n_classes = 0);

}  // namespace sartop

#endif  // SARTOP_INGEST_HPP_
