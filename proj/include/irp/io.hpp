#pragma once

// Flat-file formats.
//
// Embedding file (".irp"), little-endian:
//   offset 0   magic "IRP1"
//   offset 4   version u16 (= 1)
//   offset 6   n u32 (rows)
//   offset 10  d u32 (columns)
//   offset 14  flags u16 (bit 0: rows are unit-normalized)
//   offset 16  n*d float32, row-major
//
// CSV embeddings: header "c0,c1,...,c{d-1}" then one numeric row per sample.
// Both readers quantize to float32, the storage precision, so the same data
// yields identical matrices whichever format carried it.
//
// Labels: one decimal integer per line. Anchor indices: one row index per line.

#include <openssl/evp.h>

#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "irp/binary.hpp"
#include "irp/metrics.hpp"
#include "irp/spaces.hpp"

namespace irp {

inline constexpr std::uint16_t kEmbeddingVersion = 1;
inline constexpr std::uint16_t kFlagUnitNormalized = 1;
inline constexpr std::size_t kEmbeddingHeaderBytes = 16;

struct EmbeddingHeader {
  std::uint16_t version = kEmbeddingVersion;
  std::uint32_t n = 0;
  std::uint32_t d = 0;
  std::uint16_t flags = 0;
};

inline void write_embeddings(std::ostream& out, const Matrix& m, std::uint16_t flags = 0) {
  if (!m.allFinite()) throw InvalidArgument("refusing to store non-finite embeddings");
  le::write_magic(out, "IRP1");
  le::write_uint<std::uint16_t>(out, kEmbeddingVersion);
  le::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  le::write_uint<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  le::write_uint<std::uint16_t>(out, flags);
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) le::write_f32(out, static_cast<float>(m(i, j)));
}

inline EmbeddingHeader read_embedding_header(std::istream& in) {
  le::expect_magic(in, "IRP1");
  EmbeddingHeader h;
  h.version = le::read_uint<std::uint16_t>(in, "version");
  if (h.version != kEmbeddingVersion) throw FormatError("unsupported embedding file version " + std::to_string(h.version));
  h.n = le::read_uint<std::uint32_t>(in, "row count");
  h.d = le::read_uint<std::uint32_t>(in, "column count");
  h.flags = le::read_uint<std::uint16_t>(in, "flags");
  return h;
}

inline Matrix read_embeddings(std::istream& in, EmbeddingHeader* header_out = nullptr) {
  const EmbeddingHeader h = read_embedding_header(in);
  const std::uint64_t count = static_cast<std::uint64_t>(h.n) * h.d;
  std::vector<char> payload;
  const auto here = in.tellg();
  if (here != std::streampos(-1)) {  // seekable: reject before allocating a bogus size
    in.seekg(0, std::ios::end);
    const auto remaining = static_cast<std::uint64_t>(in.tellg() - here);
    in.seekg(here);
    if (remaining != count * 4) {
      throw FormatError("payload has " + std::to_string(remaining) + " bytes, header declares " + std::to_string(h.n) +
                        "x" + std::to_string(h.d) + " floats");
    }
  }
  if (count > 0) {
    payload.resize(count * 4);
    in.read(payload.data(), static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::uint64_t>(in.gcount()) != count * 4) {
      throw FormatError("payload shorter than declared " + std::to_string(h.n) + "x" + std::to_string(h.d));
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw FormatError("payload longer than declared " + std::to_string(h.n) + "x" + std::to_string(h.d));
  }
  Matrix m(h.n, h.d);
  const auto* bytes = reinterpret_cast<const unsigned char*>(payload.data());
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j, bytes += 4) {
      const std::uint32_t bits = static_cast<std::uint32_t>(bytes[0]) | static_cast<std::uint32_t>(bytes[1]) << 8 |
                                 static_cast<std::uint32_t>(bytes[2]) << 16 | static_cast<std::uint32_t>(bytes[3]) << 24;
      m(i, j) = std::bit_cast<float>(bits);
    }
  }
  if (!m.allFinite()) throw FormatError("payload contains non-finite values");
  if (header_out != nullptr) *header_out = h;
  return m;
}

inline Matrix read_embeddings_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  Index d = 0;
  {
    std::stringstream header(line);
    std::string cell;
    while (std::getline(header, cell, ',')) {
      if (cell != "c" + std::to_string(d)) throw FormatError("CSV header column " + std::to_string(d) + " is '" + cell + "'");
      ++d;
    }
  }
  if (d == 0) throw FormatError("CSV header has no columns");

  std::vector<double> values;
  Index rows = 0;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Index cols = 0;
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (true) {
      float v = 0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || !std::isfinite(v)) {
        throw FormatError("CSV row " + std::to_string(rows + 1) + " column " + std::to_string(cols) + " is not a finite number");
      }
      values.push_back(static_cast<double>(v));
      ++cols;
      if (next == end) break;
      if (*next != ',') throw FormatError("CSV row " + std::to_string(rows + 1) + " has a malformed separator");
      p = next + 1;
    }
    if (cols != d) {
      throw FormatError("CSV row " + std::to_string(rows + 1) + " has " + std::to_string(cols) + " values, header has " +
                        std::to_string(d));
    }
    ++rows;
  }
  Matrix m(rows, d);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < d; ++j) m(i, j) = values[static_cast<std::size_t>(i * d + j)];
  return m;
}

inline void write_embeddings_csv(std::ostream& out, const Matrix& m) {
  for (Index j = 0; j < m.cols(); ++j) out << (j ? "," : "") << 'c' << j;
  out << '\n';
  std::array<char, 32> buf{};
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), static_cast<float>(m(i, j)));
      (void)ec;
      if (j) out << ',';
      out.write(buf.data(), end - buf.data());
    }
    out << '\n';
  }
}

inline bool has_csv_extension(const std::string& path) {
  return std::filesystem::path(path).extension() == ".csv";
}

inline std::ifstream open_input(const std::string& path, std::ios::openmode mode = std::ios::in) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path + "'");
  return in;
}

inline std::ofstream open_output(const std::string& path, std::ios::openmode mode = std::ios::out) {
  std::ofstream out(path, mode | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  return out;
}

/// Reads a binary or (by ".csv" extension) CSV embedding file.
inline Matrix load_embeddings(const std::string& path) {
  try {
    if (has_csv_extension(path)) {
      auto in = open_input(path);
      return read_embeddings_csv(in);
    }
    auto in = open_input(path, std::ios::binary);
    return read_embeddings(in);
  } catch (const FormatError& e) {
    throw ContextError("'" + path + "'", e);
  }
}

inline void save_embeddings(const std::string& path, const Matrix& m, std::uint16_t flags = 0) {
  if (has_csv_extension(path)) {
    auto out = open_output(path);
    write_embeddings_csv(out, m);
    if (!out) throw IoError("failed writing '" + path + "'");
    return;
  }
  auto out = open_output(path, std::ios::binary);
  write_embeddings(out, m, flags);
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace detail {

template <typename Int>
std::vector<Int> read_int_lines(const std::string& path, const char* what) {
  auto in = open_input(path);
  std::vector<Int> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    Int v{};
    auto [end, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc() || end != line.data() + line.size()) {
      throw FormatError("'" + path + "' line " + std::to_string(lineno) + ": not a " + what);
    }
    out.push_back(v);
  }
  return out;
}

template <typename Int>
void write_int_lines(const std::string& path, const std::vector<Int>& values) {
  auto out = open_output(path);
  for (auto v : values) out << v << '\n';
  if (!out) throw IoError("failed writing '" + path + "'");
}

}  // namespace detail

inline Labels load_labels(const std::string& path) { return detail::read_int_lines<Label>(path, "label"); }
inline void save_labels(const std::string& path, const Labels& labels) { detail::write_int_lines(path, labels); }

inline std::vector<Index> load_indices(const std::string& path) {
  auto v = detail::read_int_lines<Index>(path, "row index");
  for (auto i : v) {
    if (i < 0) throw FormatError("'" + path + "': negative row index");
  }
  return v;
}
inline void save_indices(const std::string& path, const std::vector<Index>& idx) { detail::write_int_lines(path, idx); }

/// Hex SHA-256 of a file's bytes.
inline std::string sha256_file(const std::string& path) {
  auto in = open_input(path, std::ios::binary);
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (ctx == nullptr || EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) != 1) {
    EVP_MD_CTX_free(ctx);
    throw IoError("cannot initialize SHA-256");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf.data(), static_cast<std::size_t>(in.gcount()));
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md.data(), &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

/// Formats a double so that it reads back to the same value.
inline std::string format_double(double v) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  (void)ec;
  return std::string(buf.data(), end);
}

/// Ordered "key = value" record of a CLI run: configuration, input digests
/// and output metrics. Contains no timestamps, so equal runs give equal
/// manifests.
class RunManifest {
 public:
  void set(const std::string& key, const std::string& value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = value;
        return;
      }
    }
    entries_.emplace_back(key, value);
  }
  void set(const std::string& key, const char* value) { set(key, std::string(value)); }
  void set(const std::string& key, double value) { set(key, format_double(value)); }
  void set(const std::string& key, std::int64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, std::uint64_t value) { set(key, std::to_string(value)); }
  void set(const std::string& key, bool value) { set(key, std::string(value ? "true" : "false")); }

  void add_input(const std::string& role, const std::string& path) {
    set("input." + role, path);
    set("input." + role + ".sha256", sha256_file(path));
  }

  const std::string* get(const std::string& key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return &v;
    }
    return nullptr;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    out << "# irp run manifest\n";
    for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
  }

  void save(const std::string& path) const {
    auto out = open_output(path);
    write(out);
    if (!out) throw IoError("failed writing '" + path + "'");
  }

  static RunManifest parse(std::istream& in) {
    RunManifest m;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto eq = line.find(" = ");
      if (eq == std::string::npos) throw FormatError("manifest line without ' = ': " + line);
      m.entries_.emplace_back(line.substr(0, eq), line.substr(eq + 3));
    }
    return m;
  }

  static RunManifest load(const std::string& path) {
    auto in = open_input(path);
    return parse(in);
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

}  // namespace irp
