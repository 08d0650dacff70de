// Copyright 2026 faceanim authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "faceanim/common/error.hpp"

namespace faceanim {

// All binary file formats in this project are little-endian. The helpers
// below serialize through explicit byte shuffling so the code is correct
// on any host order.

inline void write_bytes(std::ostream& os, const void* p, size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!os) throw IoError("write failed");
}

inline void write_u16(std::ostream& os, uint16_t v) {
  unsigned char b[2] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>(v >> 8)};
  write_bytes(os, b, 2);
}

inline void write_u32(std::ostream& os, uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  write_bytes(os, b, 4);
}

inline void write_f32(std::ostream& os, float v) {
  uint32_t u = std::bit_cast<uint32_t>(v);
  write_u32(os, u);
}

inline void write_u8(std::ostream& os, uint8_t v) { write_bytes(os, &v, 1); }

/// Reads exactly n bytes; throws FormatError naming the stream offset on
/// a short read.
inline void read_exact(std::istream& is, void* p, size_t n,
                       const char* what = "data") {
  std::streampos at = is.tellg();
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<size_t>(is.gcount()) != n) {
    throw FormatError(std::string("truncated ") + what + " at byte offset " +
                      std::to_string(static_cast<long long>(at)));
  }
}

inline uint16_t read_u16(std::istream& is, const char* what = "u16") {
  unsigned char b[2];
  read_exact(is, b, 2, what);
  return static_cast<uint16_t>(b[0] | (b[1] << 8));
}

inline uint32_t read_u32(std::istream& is, const char* what = "u32") {
  unsigned char b[4];
  read_exact(is, b, 4, what);
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

inline float read_f32(std::istream& is, const char* what = "f32") {
  return std::bit_cast<float>(read_u32(is, what));
}

inline uint8_t read_u8(std::istream& is, const char* what = "u8") {
  unsigned char b;
  read_exact(is, &b, 1, what);
  return b;
}

/// FNV-1a 64-bit over a byte buffer. Used for config/manifest fingerprints
/// and for deriving per-word and per-utterance seeds.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t seed = 0xcbf29ce484222325ull) {
  const unsigned char* p = static_cast<const unsigned char*>(data);
  uint64_t h = seed;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t seed = 0xcbf29ce484222325ull) {
  return fnv1a64(s.data(), s.size(), seed);
}

}  // namespace faceanim
