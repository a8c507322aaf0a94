#include "sartop/checkpoint.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "sartop/error.hpp"

namespace sartop {

namespace {

void append_array(std::string& out, const char* name,
                  const std::vector<double>& values) {
  out += name;
  out += ' ';
  out += std::to_string(values.size());
  out += '\n';
  char buf[40];
  for (std::size_t i = 0; i < values.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", values[i]);
    out += buf;
    out += (i + 1 == values.size()) ? '\n' : ' ';
  }
  if (values.empty()) out += '\n';
}

class TokenReader {
 public:
  explicit TokenReader(const std::string& text) : in_(text) {}

  std::string word() {
    std::string tok;
    if (!(in_ >> tok)) {
      fail(ErrorCode::kParse, "checkpoint: unexpected end of input");
    }
    return tok;
  }

  void expect(const std::string& literal) {
    std::string tok = word();
    if (tok != literal) {
      fail(ErrorCode::kParse,
           "checkpoint: expected '" + literal + "', found '" + tok + "'");
    }
  }

  std::uint64_t integer() {
    std::string tok = word();
    try {
      std::size_t used = 0;
      std::uint64_t v = std::stoull(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      fail(ErrorCode::kParse, "checkpoint: bad integer '" + tok + "'");
    }
  }

  double real() {
    std::string tok = word();
    char* end = nullptr;
    double v = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size()) {
      fail(ErrorCode::kParse, "checkpoint: bad number '" + tok + "'");
    }
    return v;
  }

  std::vector<double> array(const std::string& name,
                            std::size_t expected_size) {
    expect(name);
    std::uint64_t n = integer();
    if (n != expected_size) {
      fail(ErrorCode::kParse, "checkpoint: array '" + name + "' has " +
                                  std::to_string(n) + " entries, expected " +
                                  std::to_string(expected_size));
    }
    std::vector<double> out(expected_size);
    for (auto& v : out) {
      v = real();
      if (!std::isfinite(v)) {
        fail(ErrorCode::kParse,
             "checkpoint: non-finite parameter in '" + name + "'");
      }
    }
    return out;
  }

 private:
  std::istringstream in_;
};

}  // namespace

std::string checkpoint_to_string(const Network& net) {
  std::string out;
  out += "sartop-checkpoint " + std::to_string(kCheckpointFormatVersion) + "\n";
  out += "input_dim " + std::to_string(net.spec.input_dim) + "\n";
  out += "width " + std::to_string(net.spec.width) + "\n";
  out += "n_blocks " + std::to_string(net.spec.n_blocks) + "\n";
  out += "n_classes " + std::to_string(net.spec.n_classes) + "\n";
  out += "init_seed " + std::to_string(net.spec.init_seed) + "\n";
  append_array(out, "stem_w", net.stem_w.data);
  append_array(out, "stem_b", net.stem_b);
  for (std::size_t k = 0; k < net.blocks.size(); ++k) {
    const std::string tag = "block" + std::to_string(k) + "_";
    append_array(out, (tag + "w1").c_str(), net.blocks[k].w1.data);
    append_array(out, (tag + "b1").c_str(), net.blocks[k].b1);
    append_array(out, (tag + "w2").c_str(), net.blocks[k].w2.data);
    append_array(out, (tag + "b2").c_str(), net.blocks[k].b2);
  }
  append_array(out, "head_w", net.head_w.data);
  append_array(out, "head_b", net.head_b);
  return out;
}

Network checkpoint_from_string(const std::string& text) {
  TokenReader reader(text);
  reader.expect("sartop-checkpoint");
  std::uint64_t version = reader.integer();
  if (version != static_cast<std::uint64_t>(kCheckpointFormatVersion)) {
    fail(ErrorCode::kParse,
         "checkpoint: unsupported format version " + std::to_string(version));
  }
  NetworkSpec spec;
  reader.expect("input_dim");
  spec.input_dim = reader.integer();
  reader.expect("width");
  spec.width = reader.integer();
  reader.expect("n_blocks");
  spec.n_blocks = reader.integer();
  reader.expect("n_classes");
  spec.n_classes = reader.integer();
  reader.expect("init_seed");
  spec.init_seed = reader.integer();
  spec.validate();

  Network net;
  net.spec = spec;
  net.stem_w = Matrix(spec.width, spec.input_dim);
  net.stem_w.data = reader.array("stem_w", spec.width * spec.input_dim);
  net.stem_b = reader.array("stem_b", spec.width);
  net.blocks.resize(spec.n_blocks);
  for (std::size_t k = 0; k < spec.n_blocks; ++k) {
    const std::string tag = "block" + std::to_string(k) + "_";
    net.blocks[k].w1 = Matrix(spec.width, spec.width);
    net.blocks[k].w1.data = reader.array(tag + "w1", spec.width * spec.width);
    net.blocks[k].b1 = reader.array(tag + "b1", spec.width);
    net.blocks[k].w2 = Matrix(spec.width, spec.width);
    net.blocks[k].w2.data = reader.array(tag + "w2", spec.width * spec.width);
    net.blocks[k].b2 = reader.array(tag + "b2", spec.width);
  }
  net.head_w = Matrix(spec.n_classes, spec.width);
  net.head_w.data = reader.array("head_w", spec.n_classes * spec.width);
  net.head_b = reader.array("head_b", spec.n_classes);
  return net;
}

void save_checkpoint(const Network& net, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::kIo, "cannot open '" + path + "' for writing");
  const std::string text = checkpoint_to_string(net);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorCode::kIo, "failed writing checkpoint to '" + path + "'");
}

Network load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::kIo, "cannot open checkpoint '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return checkpoint_from_string(buf.str());
}

}  // namespace sartop
