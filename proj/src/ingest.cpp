#include "sartop/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "sartop/error.hpp"

namespace sartop {

namespace {

class PgmHeaderReader {
 public:
  explicit PgmHeaderReader(const std::vector<std::uint8_t>& bytes)
      : bytes_(bytes) {}

  // Next header token, skipping whitespace and '#' comments.
  std::string token() {
    while (pos_ < bytes_.size()) {
      const char c = static_cast<char>(bytes_[pos_]);
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        break;
      }
    }
    std::size_t start = pos_;
    while (pos_ < bytes_.size() &&
           !std::isspace(static_cast<unsigned char>(bytes_[pos_])) &&
           bytes_[pos_] != '#') {
      ++pos_;
    }
    if (start == pos_) {
      fail(ErrorCode::kParse, "pgm: truncated header");
    }
    return std::string(bytes_.begin() + static_cast<std::ptrdiff_t>(start),
                       bytes_.begin() + static_cast<std::ptrdiff_t>(pos_));
  }

  std::uint64_t number(const char* what) {
    const std::string tok = token();
    std::uint64_t v = 0;
    for (char c : tok) {
      if (c < '0' || c > '9') {
        fail(ErrorCode::kParse,
             std::string("pgm: bad ") + what + " '" + tok + "'");
      }
      v = v * 10 + static_cast<std::uint64_t>(c - '0');
      if (v > 0xFFFFFFFFull) {
        fail(ErrorCode::kParse, std::string("pgm: ") + what + " too large");
      }
    }
    return v;
  }

  // Payload starts after exactly one whitespace byte following maxval.
  std::size_t payload_offset() {
    if (pos_ >= bytes_.size() ||
        !std::isspace(static_cast<unsigned char>(bytes_[pos_]))) {
      fail(ErrorCode::kParse, "pgm: missing whitespace before payload");
    }
    return pos_ + 1;
  }

 private:
  const std::vector<std::uint8_t>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

ImageGrid parse_pgm16(const std::vector<std::uint8_t>& bytes) {
  PgmHeaderReader header(bytes);
  const std::string magic = header.token();
  if (magic != "P5") {
    fail(ErrorCode::kParse, "pgm: unsupported format '" + magic + "'");
  }
  const std::uint64_t width = header.number("width");
  const std::uint64_t height = header.number("height");
  const std::uint64_t maxval = header.number("maxval");
  if (width == 0 || height == 0) {
    fail(ErrorCode::kParse, "pgm: zero image dimension");
  }
  if (maxval < 1 || maxval > 65535) {
    fail(ErrorCode::kParse,
         "pgm: maxval " + std::to_string(maxval) + " outside [1, 65535]");
  }
  const std::size_t offset = header.payload_offset();
  const std::size_t n_samples = static_cast<std::size_t>(width * height);
  const std::size_t bytes_per_sample = maxval > 255 ? 2 : 1;
  if (bytes.size() < offset + n_samples * bytes_per_sample) {
    fail(ErrorCode::kParse, "pgm: truncated payload");
  }

  ImageGrid img;
  img.width = static_cast<std::size_t>(width);
  img.height = static_cast<std::size_t>(height);
  img.values.resize(n_samples);
  const std::uint8_t* p = bytes.data() + offset;
  if (bytes_per_sample == 2) {
    for (std::size_t i = 0; i < n_samples; ++i) {
      img.values[i] = static_cast<std::uint16_t>((p[2 * i] << 8) | p[2 * i + 1]);
    }
  } else {
    for (std::size_t i = 0; i < n_samples; ++i) img.values[i] = p[i];
  }
  return img;
}

ImageGrid read_pgm16(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open image '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return parse_pgm16(bytes);
}

std::vector<std::uint8_t> pgm16_to_bytes(const ImageGrid& img) {
  if (img.values.size() != img.width * img.height) {
    fail(ErrorCode::kShapeMismatch, "pgm: value buffer does not match size");
  }
  std::string header = "P5\n" + std::to_string(img.width) + " " +
                       std::to_string(img.height) + "\n65535\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.reserve(out.size() + img.values.size() * 2);
  for (std::uint16_t v : img.values) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  }
  return out;
}

void write_pgm16(const ImageGrid& img, const std::string& path) {
  const auto bytes = pgm16_to_bytes(img);
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing image to '" + path + "'");
}

RealGrid log_transform(const ImageGrid& img) {
  RealGrid out;
  out.width = img.width;
  out.height = img.height;
  out.values.resize(img.values.size());
  for (std::size_t i = 0; i < img.values.size(); ++i) {
    out.values[i] = std::log1p(static_cast<double>(img.values[i]));
  }
  return out;
}

namespace {

template <typename Grid>
PatchSet tile_grid(const Grid& img, std::size_t patch_size) {
  if (patch_size == 0) {
    fail(ErrorCode::kInvalidArgument, "tile: patch_size must be >= 1");
  }
  if (img.values.size() != img.width * img.height) {
    fail(ErrorCode::kShapeMismatch, "tile: value buffer does not match size");
  }
  PatchSet set;
  set.patch_size = patch_size;
  const std::size_t nx = img.width / patch_size;
  const std::size_t ny = img.height / patch_size;
  if (nx == 0 || ny == 0) {
    set.undersized = true;
    return set;
  }
  set.patches.reserve(nx * ny);
  for (std::size_t py = 0; py < ny; ++py) {
    for (std::size_t px = 0; px < nx; ++px) {
      Patch patch;
      patch.origin_x = px * patch_size;
      patch.origin_y = py * patch_size;
      patch.values.reserve(patch_size * patch_size);
      for (std::size_t r = 0; r < patch_size; ++r) {
        const std::size_t row = patch.origin_y + r;
        const std::size_t base = row * img.width + patch.origin_x;
        for (std::size_t c = 0; c < patch_size; ++c) {
          patch.values.push_back(static_cast<double>(img.values[base + c]));
        }
      }
      set.patches.push_back(std::move(patch));
    }
  }
  return set;
}

}  // namespace

PatchSet tile(const ImageGrid& img, std::size_t patch_size) {
  return tile_grid(img, patch_size);
}

PatchSet tile(const RealGrid& img, std::size_t patch_size) {
  return tile_grid(img, patch_size);
}

void Standardizer::apply_row(std::span<double> row) const {
  if (row.size() != mean.size()) {
    fail(ErrorCode::kShapeMismatch, "standardizer: feature width mismatch");
  }
  for (std::size_t f = 0; f < row.size(); ++f) {
    row[f] = (row[f] - mean[f]) * scale[f];
  }
}

Standardizer fit_standardizer(const double* rows, std::size_t n_rows,
                              std::size_t n_features) {
  if (n_rows < 2) {
    fail(ErrorCode::kInvalidArgument,
         "standardizer needs at least 2 training rows");
  }
  Standardizer s;
  s.mean.assign(n_features, 0.0);
  s.scale.assign(n_features, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t f = 0; f < n_features; ++f) {
      s.mean[f] += rows[r * n_features + f];
    }
  }
  for (double& m : s.mean) m /= static_cast<double>(n_rows);
  std::vector<double> var(n_features, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t f = 0; f < n_features; ++f) {
      const double d = rows[r * n_features + f] - s.mean[f];
      var[f] += d * d;
    }
  }
  for (std::size_t f = 0; f < n_features; ++f) {
    var[f] /= static_cast<double>(n_rows);
    s.scale[f] = var[f] > 0.0 ? 1.0 / std::sqrt(var[f]) : 0.0;
  }
  return s;
}

std::pair<Standardizer, PatchSet> standardize(const PatchSet& train_patches) {
  if (train_patches.patches.size() < 2) {
    fail(ErrorCode::kInvalidArgument, "standardize needs at least 2 patches");
  }
  const std::size_t n_features = train_patches.patches.front().values.size();
  std::vector<double> rows;
  rows.reserve(train_patches.patches.size() * n_features);
  for (const auto& p : train_patches.patches) {
    if (p.values.size() != n_features) {
      fail(ErrorCode::kShapeMismatch, "standardize: ragged patch set");
    }
    rows.insert(rows.end(), p.values.begin(), p.values.end());
  }
  Standardizer s =
      fit_standardizer(rows.data(), train_patches.patches.size(), n_features);
  PatchSet out = train_patches;
  for (auto& p : out.patches) s.apply_row(p.values);
  return {std::move(s), std::move(out)};
}

std::vector<PatchLabel> parse_patch_labels(const std::string& text) {
  std::vector<PatchLabel> out;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream row(line);
    PatchLabel entry;
    char c1 = 0, c2 = 0;
    long long x = -1, y = -1, label = -1;
    if (!(row >> x >> c1 >> y >> c2 >> label) || c1 != ',' || c2 != ',' ||
        x < 0 || y < 0 || label < 0 || (row >> std::ws, !row.eof())) {
      fail(ErrorCode::kParse, "patch labels: bad line " +
                                  std::to_string(line_no) + ": '" + line + "'");
    }
    entry.origin_x = static_cast<std::size_t>(x);
    entry.origin_y = static_cast<std::size_t>(y);
    entry.label = static_cast<std::int32_t>(label);
    out.push_back(entry);
  }
  return out;
}

std::vector<PatchLabel> read_patch_labels(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open patch labels '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_patch_labels(buf.str());
}

Dataset patches_to_dataset(const PatchSet& patches,
                           const std::vector<PatchLabel>& labels,
                           std::size_t n_classes) {
  std::map<std::pair<std::size_t, std::size_t>, std::int32_t> by_origin;
  for (const auto& e : labels) {
    auto [it, inserted] = by_origin.emplace(
        std::make_pair(e.origin_x, e.origin_y), e.label);
    if (!inserted) {
      fail(ErrorCode::kInvalidArgument,
           "patch labels: duplicate entry for origin (" +
               std::to_string(e.origin_x) + "," + std::to_string(e.origin_y) +
               ")");
    }
  }
  if (by_origin.size() != patches.patches.size()) {
    fail(ErrorCode::kInvalidArgument,
         "patch labels: " + std::to_string(by_origin.size()) +
             " entries for " + std::to_string(patches.patches.size()) +
             " patches");
  }

  std::vector<double> features;
  std::vector<std::int32_t> row_labels;
  std::int32_t max_label = -1;
  for (const auto& p : patches.patches) {
    auto it = by_origin.find({p.origin_x, p.origin_y});
    if (it == by_origin.end()) {
      fail(ErrorCode::kInvalidArgument,
           "patch labels: no entry for origin (" + std::to_string(p.origin_x) +
               "," + std::to_string(p.origin_y) + ")");
    }
    features.insert(features.end(), p.values.begin(), p.values.end());
    row_labels.push_back(it->second);
    max_label = std::max(max_label, it->second);
  }
  if (n_classes == 0) {
    n_classes = static_cast<std::size_t>(std::max(max_label + 1, 2));
  }
  const std::size_t n_features =
      patches.patches.empty() ? 1 : patches.patches.front().values.size();
  return Dataset::make(n_classes, n_features, std::move(features),
                       std::move(row_labels));
}

}  // namespace sartop
