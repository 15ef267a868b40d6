#include <zlib.h>

#include <cerrno>
#include <cinttypes>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "core/dataset.hpp"
#include "core/errors.hpp"

namespace ordmtl {

namespace {

constexpr const char* kMagic = "ORDMTL-DS v1";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "': " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading '" + path + "'");
  return ss.str();
}

// One text line and the byte offset where it starts. `pos` is left after the
// terminating newline.
struct LineCursor {
  const std::string& text;
  std::size_t pos = 0;

  bool next(std::string_view& line, std::size_t& offset) {
    if (pos >= text.size()) return false;
    offset = pos;
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) {
      line = std::string_view(text).substr(pos);
      pos = text.size();
    } else {
      line = std::string_view(text).substr(pos, nl - pos);
      pos = nl + 1;
    }
    return true;
  }
};

std::int64_t parse_int(std::string_view field, std::size_t offset, const char* what) {
  std::string s(field);
  char* end = nullptr;
  errno = 0;
  long long v = std::strtoll(s.c_str(), &end, 10);
  if (errno != 0 || end == s.c_str() || *end != '\0') {
    throw ParseError(std::string("invalid ") + what + " '" + s + "'", offset);
  }
  return v;
}

double parse_real(std::string_view field, std::size_t offset) {
  std::string s(field);
  char* end = nullptr;
  errno = 0;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') {
    throw ParseError("invalid feature value '" + s + "'", offset);
  }
  return v;
}

}  // namespace

void save_dataset(const Dataset& dataset, const std::string& path) {
  if (dataset.samples.empty()) throw ValidationError("refusing to save an empty dataset");
  std::ostringstream records;
  const int d = dataset.feature_count();
  for (const Sample& s : dataset.samples) {
    records << s.sample_id << ',' << s.patient_id << ',' << s.rank << ',' << s.clean_rank;
    for (int j = 0; j < d; ++j) records << ',' << format_double(s.features[j]);
    records << '\n';
  }
  std::string body = records.str();
  std::uint32_t crc = static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(body.data()), static_cast<uInt>(body.size())));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing: " + std::strerror(errno));
  out << kMagic << " n=" << dataset.size() << " k=" << dataset.scale.num_ranks
      << " mode=" << (dataset.mode == FeatureMode::Vector ? "vector" : "image")
      << " dim=" << dataset.feature_dim << '\n';
  out << body;
  char crc_buf[16];
  std::snprintf(crc_buf, sizeof(crc_buf), "%08x", crc);
  out << "CRC32=" << crc_buf << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

Dataset load_dataset(const std::string& path) {
  std::string text = read_file(path);
  if (text.empty()) throw ParseError("missing header", 0);

  LineCursor cursor{text};
  std::string_view line;
  std::size_t offset = 0;
  cursor.next(line, offset);

  std::int64_t n = 0;
  int k = 0, dim = 0;
  char mode_buf[16] = {0};
  std::string header(line);
  int matched = std::sscanf(header.c_str(), "ORDMTL-DS v1 n=%" SCNd64 " k=%d mode=%15[a-z] dim=%d",
                            &n, &k, mode_buf, &dim);
  if (matched != 4) throw ParseError("missing header", 0);
  std::string mode_str(mode_buf);
  if (mode_str != "vector" && mode_str != "image") {
    throw ParseError("unknown feature mode '" + mode_str + "'", 0);
  }
  if (n < 1 || k < 2 || dim < 1) throw ParseError("implausible header fields", 0);

  Dataset ds;
  ds.scale = k == 4 ? OrdinalScale{} : OrdinalScale::make(k);
  ds.mode = mode_str == "vector" ? FeatureMode::Vector : FeatureMode::Image;
  ds.feature_dim = dim;
  const int d = ds.feature_count();
  ds.samples.reserve(static_cast<std::size_t>(n));

  std::size_t body_begin = cursor.pos;
  std::size_t body_end = body_begin;
  std::string crc_field;

  while (true) {
    if (!cursor.next(line, offset)) {
      throw ParseError("file truncated: missing checksum trailer", text.size());
    }
    if (line.rfind("CRC32=", 0) == 0) {
      body_end = offset;
      crc_field = std::string(line.substr(6));
      break;
    }
    if (ds.size() == n) {
      throw ParseError("more records than header count n=" + std::to_string(n), offset);
    }

    // Split into fields, remembering where each starts within the file.
    std::vector<std::pair<std::string_view, std::size_t>> fields;
    std::size_t field_start = 0;
    while (true) {
      std::size_t comma = line.find(',', field_start);
      std::size_t len =
          (comma == std::string_view::npos ? line.size() : comma) - field_start;
      fields.emplace_back(line.substr(field_start, len), offset + field_start);
      if (comma == std::string_view::npos) break;
      field_start = comma + 1;
    }
    const std::size_t expected_fields = 4 + static_cast<std::size_t>(d);
    if (fields.size() != expected_fields) {
      throw ParseError("record has " + std::to_string(fields.size()) + " fields, expected " +
                           std::to_string(expected_fields),
                       offset + line.size());
    }

    Sample s;
    s.sample_id = parse_int(fields[0].first, fields[0].second, "sample_id");
    s.patient_id = parse_int(fields[1].first, fields[1].second, "patient_id");
    s.rank = static_cast<int>(parse_int(fields[2].first, fields[2].second, "rank"));
    s.clean_rank = static_cast<int>(parse_int(fields[3].first, fields[3].second, "clean_rank"));
    s.features.resize(d);
    for (int j = 0; j < d; ++j) {
      s.features[j] = parse_real(fields[4 + j].first, fields[4 + j].second);
    }
    if (s.rank < 1 || s.rank > k || s.clean_rank < 1 || s.clean_rank > k) {
      throw ParseError("rank outside [1, " + std::to_string(k) + "]", offset);
    }
    ds.samples.push_back(std::move(s));
  }

  if (ds.size() != n) {
    throw ParseError("file truncated: " + std::to_string(ds.size()) + " records, header says " +
                         std::to_string(n),
                     body_end);
  }

  std::uint32_t actual = static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(text.data() + body_begin),
              static_cast<uInt>(body_end - body_begin)));
  char* end = nullptr;
  unsigned long expected = std::strtoul(crc_field.c_str(), &end, 16);
  if (end == crc_field.c_str() || *end != '\0') {
    throw ParseError("malformed checksum trailer", body_end);
  }
  if (static_cast<std::uint32_t>(expected) != actual) {
    char msg[96];
    std::snprintf(msg, sizeof(msg), "checksum mismatch: file says %08lx, records hash to %08x",
                  expected, actual);
    throw ParseError(msg, body_end);
  }
  return ds;
}

}  // namespace ordmtl
