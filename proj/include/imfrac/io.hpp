#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "imfrac/types.hpp"

namespace imfrac::io {

// Error taxonomy surfaced as CLI exit codes: configuration problems exit 2,
// unreadable or missing data exits 3.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// 64-bit FNV-1a over a byte string; used for config/spec fingerprints.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Binary primitives, host byte order (little-endian platforms assumed).

inline void write_bytes(std::ostream& os, const void* p, std::size_t n) {
  os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

inline void read_bytes(std::istream& is, void* p, std::size_t n) {
  is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (!is) throw std::runtime_error("io: truncated read");
}

template <typename T>
void write_pod(std::ostream& os, const T& v) {
  write_bytes(os, &v, sizeof(T));
}

template <typename T>
T read_pod(std::istream& is) {
  T v;
  read_bytes(is, &v, sizeof(T));
  return v;
}

inline void write_magic(std::ostream& os, const char m[4]) { write_bytes(os, m, 4); }

inline void expect_magic(std::istream& is, const char m[4], const std::string& what) {
  char got[4];
  read_bytes(is, got, 4);
  if (got[0] != m[0] || got[1] != m[1] || got[2] != m[2] || got[3] != m[3])
    throw std::runtime_error("io: bad magic for " + what);
}

// Write via temp file + rename so concurrent readers never see a partial file.
void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body);

// ---- RCUB cube container --------------------------------------------------
//
// Binary layout: magic "RCUB", u32 version (1), u32 rows (fast time / range),
// u32 cols (ramps / Doppler), u8 dtype (0 real, 1 complex), float64 payload
// in column-major order (complex cells interleave re, im), then a u64 byte
// count followed by a structured-text metadata block.

struct RcubFile {
  std::uint32_t version = 1;
  bool is_complex = false;
  RMat real;       // filled when dtype = 0
  CMat complex;    // filled when dtype = 1
  std::string metadata;

  int rows() const {
    return static_cast<int>(is_complex ? complex.rows() : real.rows());
  }
  int cols() const {
    return static_cast<int>(is_complex ? complex.cols() : real.cols());
  }
};

void write_rcub(const std::filesystem::path& path, const RMat& cube,
                const std::string& metadata);
void write_rcub(const std::filesystem::path& path, const CMat& cube,
                const std::string& metadata);

// Throws DataError on missing files, bad magic, or truncation.
RcubFile read_rcub(const std::filesystem::path& path);

}  // namespace imfrac::io
