#pragma once

// Little-endian scalar encoding, independent of host byte order.

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "irp/error.hpp"

namespace irp::le {

template <typename UInt>
void write_uint(std::ostream& out, UInt v) {
  std::array<char, sizeof(UInt)> bytes{};
  for (std::size_t i = 0; i < sizeof(UInt); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
UInt read_uint(std::istream& in, const char* what) {
  std::array<unsigned char, sizeof(UInt)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError(std::string("truncated input while reading ") + what);
  }
  UInt v = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) v |= static_cast<UInt>(bytes[i]) << (8 * i);
  return v;
}

inline void write_f32(std::ostream& out, float v) { write_uint(out, std::bit_cast<std::uint32_t>(v)); }
inline void write_f64(std::ostream& out, double v) { write_uint(out, std::bit_cast<std::uint64_t>(v)); }

inline float read_f32(std::istream& in, const char* what) { return std::bit_cast<float>(read_uint<std::uint32_t>(in, what)); }
inline double read_f64(std::istream& in, const char* what) { return std::bit_cast<double>(read_uint<std::uint64_t>(in, what)); }

inline void write_magic(std::ostream& out, const char (&magic)[5]) { out.write(magic, 4); }

inline void expect_magic(std::istream& in, const char (&magic)[5]) {
  std::array<char, 4> got{};
  in.read(got.data(), 4);
  if (in.gcount() != 4 || std::string(got.data(), 4) != std::string(magic, 4)) {
    throw FormatError(std::string("bad magic, expected ") + magic);
  }
}

}  // namespace irp::le
