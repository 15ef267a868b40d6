#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include <zlib.h>

#include "core/errors.hpp"
#include "core/nn.hpp"

namespace ordmtl {

static_assert(std::endian::native == std::endian::little,
              "checkpoint numbers are written in the native byte order");

namespace {

constexpr const char* kMagic = "ORDMTL-NET v1";

std::string layers_to_string(const std::vector<LayerSpec>& layers) {
  std::string out;
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (i) out += ',';
    out += layers[i].to_string();
  }
  return out;
}

std::vector<LayerSpec> layers_from_string(const std::string& text) {
  std::vector<LayerSpec> layers;
  if (text.empty()) return layers;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::size_t end = comma == std::string::npos ? text.size() : comma;
    layers.push_back(LayerSpec::parse(text.substr(pos, end - pos)));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  return layers;
}

struct Reader {
  const std::string& buf;
  std::size_t pos = 0;

  std::string take_line(const std::string& what) {
    if (pos >= buf.size()) {
      throw ParseError("unexpected end of file before " + what, pos);
    }
    std::size_t nl = buf.find('\n', pos);
    if (nl == std::string::npos) {
      throw ParseError("unterminated line holding " + what, pos);
    }
    std::string line = buf.substr(pos, nl - pos);
    pos = nl + 1;
    return line;
  }

  std::string take_value(const std::string& key) {
    std::size_t line_start = pos;
    std::string line = take_line("'" + key + "'");
    std::string prefix = key + "=";
    if (line.compare(0, prefix.size(), prefix) != 0) {
      throw ParseError("expected '" + key + "=', found '" + line + "'", line_start);
    }
    return line.substr(prefix.size());
  }

  const char* take_bytes(std::size_t n, const std::string& what) {
    if (buf.size() - pos < n) {
      throw ParseError("unexpected end of file inside " + what, pos);
    }
    const char* p = buf.data() + pos;
    pos += n;
    return p;
  }
};

}  // namespace

void Network::save(const std::string& path) const {
  std::ostringstream head;
  char num[64];
  head << kMagic << "\n";
  head << "input=" << config_.input.to_string() << "\n";
  head << "layers=" << layers_to_string(config_.layers) << "\n";
  std::snprintf(num, sizeof(num), "%.17g", config_.width_scale);
  head << "width_scale=" << num << "\n";
  head << "head_outputs=" << config_.head.num_outputs << "\n";
  head << "seed=" << seed_ << "\n";

  std::vector<const ParamTensor*> tensors = parameters();
  head << "tensors=" << tensors.size() << "\n";

  std::string body;
  for (const ParamTensor* t : tensors) {
    std::uint64_t count = t->value.size();
    body.append(reinterpret_cast<const char*>(&count), sizeof(count));
    body.append(reinterpret_cast<const char*>(t->value.data()), count * sizeof(double));
  }
  unsigned long crc = ::crc32(0UL, reinterpret_cast<const Bytef*>(body.data()),
                              static_cast<uInt>(body.size()));
  char trailer[24];
  std::snprintf(trailer, sizeof(trailer), "CRC32=%08lx\n", crc);

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << head.str() << body << trailer;
  if (!out) throw IoError("write to '" + path + "' failed");
}

Network Network::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream slurp;
  slurp << in.rdbuf();
  if (in.bad()) throw IoError("read from '" + path + "' failed");
  std::string buf = slurp.str();

  Reader r{buf};
  std::size_t magic_at = r.pos;
  if (buf.empty()) throw ParseError("missing header", 0);
  if (r.take_line("the header") != kMagic) {
    throw ParseError(std::string("expected header '") + kMagic + "'", magic_at);
  }

  NetworkConfig cfg;
  std::size_t value_at = r.pos;
  cfg.input = InputShape::parse(r.take_value("input"));
  cfg.layers = layers_from_string(r.take_value("layers"));

  value_at = r.pos;
  std::string ws = r.take_value("width_scale");
  char* end = nullptr;
  cfg.width_scale = std::strtod(ws.c_str(), &end);
  if (ws.empty() || *end != '\0' || !(cfg.width_scale > 0.0)) {
    throw ParseError("invalid width_scale '" + ws + "'", value_at);
  }

  value_at = r.pos;
  std::string ho = r.take_value("head_outputs");
  long outputs = std::strtol(ho.c_str(), &end, 10);
  if (ho.empty() || *end != '\0' || outputs < 1) {
    throw ParseError("invalid head_outputs '" + ho + "'", value_at);
  }
  cfg.head.num_outputs = static_cast<int>(outputs);

  value_at = r.pos;
  std::string sd = r.take_value("seed");
  std::uint64_t seed = std::strtoull(sd.c_str(), &end, 10);
  if (sd.empty() || *end != '\0') throw ParseError("invalid seed '" + sd + "'", value_at);

  value_at = r.pos;
  std::string tc = r.take_value("tensors");
  long tensor_count = std::strtol(tc.c_str(), &end, 10);
  if (tc.empty() || *end != '\0' || tensor_count < 0) {
    throw ParseError("invalid tensor count '" + tc + "'", value_at);
  }

  Network net(cfg, seed);
  std::vector<ParamTensor*> tensors = net.parameters();
  if (static_cast<long>(tensors.size()) != tensor_count) {
    throw ParseError("file declares " + std::to_string(tensor_count) + " tensors, config builds " +
                         std::to_string(tensors.size()),
                     value_at);
  }

  std::size_t body_start = r.pos;
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    std::size_t prefix_at = r.pos;
    std::uint64_t count;
    std::memcpy(&count, r.take_bytes(sizeof(count), "tensor " + tensors[i]->name), sizeof(count));
    if (count != tensors[i]->value.size()) {
      throw ParseError("tensor " + tensors[i]->name + " holds " + std::to_string(count) +
                           " values, expected " + std::to_string(tensors[i]->value.size()),
                       prefix_at);
    }
    const char* bytes =
        r.take_bytes(count * sizeof(double), "tensor " + tensors[i]->name);
    std::memcpy(tensors[i]->value.data(), bytes, count * sizeof(double));
  }
  std::size_t body_end = r.pos;

  std::size_t trailer_at = r.pos;
  std::string trailer = r.take_line("the CRC32 trailer");
  unsigned long stated = 0;
  if (std::sscanf(trailer.c_str(), "CRC32=%8lx", &stated) != 1 || trailer.size() != 14) {
    throw ParseError("expected 'CRC32=<8 hex digits>', found '" + trailer + "'", trailer_at);
  }
  if (r.pos != buf.size()) {
    throw ParseError("trailing bytes after the CRC32 trailer", r.pos);
  }
  unsigned long actual = ::crc32(0UL, reinterpret_cast<const Bytef*>(buf.data() + body_start),
                                 static_cast<uInt>(body_end - body_start));
  if (actual != stated) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "checksum mismatch: file says %08lx, tensors hash to %08lx",
                  stated, actual);
    throw ParseError(msg, trailer_at);
  }

  for (ParamTensor* t : tensors) {
    for (double v : t->value) {
      if (!std::isfinite(v)) {
        throw ParseError("tensor " + t->name + " holds a non-finite value", body_start);
      }
    }
  }
  return net;
}

}  // namespace ordmtl
