#include "imfrac/io.hpp"

#include <random>

namespace imfrac::io {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'U', 'B'};
constexpr std::uint32_t kVersion = 1;

void write_header(std::ostream& os, std::uint32_t rows, std::uint32_t cols,
                  std::uint8_t dtype) {
  write_magic(os, kMagic);
  write_pod(os, kVersion);
  write_pod(os, rows);
  write_pod(os, cols);
  write_pod(os, dtype);
}

void write_metadata(std::ostream& os, const std::string& metadata) {
  write_pod(os, static_cast<std::uint64_t>(metadata.size()));
  write_bytes(os, metadata.data(), metadata.size());
}

}  // namespace

void atomic_write(const std::filesystem::path& path,
                  const std::function<void(std::ostream&)>& body) {
  namespace fs = std::filesystem;
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  const fs::path tmp =
      path.string() + ".tmp." + std::to_string(std::random_device{}());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("io: cannot open " + tmp.string());
    body(os);
    os.flush();
    if (!os) throw std::runtime_error("io: write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

void write_rcub(const std::filesystem::path& path, const RMat& cube,
                const std::string& metadata) {
  atomic_write(path, [&](std::ostream& os) {
    write_header(os, static_cast<std::uint32_t>(cube.rows()),
                 static_cast<std::uint32_t>(cube.cols()), 0);
    write_bytes(os, cube.data(), sizeof(double) * static_cast<std::size_t>(cube.size()));
    write_metadata(os, metadata);
  });
}

void write_rcub(const std::filesystem::path& path, const CMat& cube,
                const std::string& metadata) {
  atomic_write(path, [&](std::ostream& os) {
    write_header(os, static_cast<std::uint32_t>(cube.rows()),
                 static_cast<std::uint32_t>(cube.cols()), 1);
    write_bytes(os, cube.data(),
                sizeof(cplx) * static_cast<std::size_t>(cube.size()));
    write_metadata(os, metadata);
  });
}

RcubFile read_rcub(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw DataError("rcub: cannot open " + path.string());
  try {
    expect_magic(is, kMagic, path.string());
    RcubFile f;
    f.version = read_pod<std::uint32_t>(is);
    if (f.version != kVersion)
      throw DataError("rcub: unsupported version in " + path.string());
    const auto rows = read_pod<std::uint32_t>(is);
    const auto cols = read_pod<std::uint32_t>(is);
    const auto dtype = read_pod<std::uint8_t>(is);
    if (dtype > 1) throw DataError("rcub: unknown dtype in " + path.string());
    f.is_complex = dtype == 1;
    const std::size_t n = static_cast<std::size_t>(rows) * cols;
    if (f.is_complex) {
      f.complex.resize(rows, cols);
      read_bytes(is, f.complex.data(), sizeof(cplx) * n);
    } else {
      f.real.resize(rows, cols);
      read_bytes(is, f.real.data(), sizeof(double) * n);
    }
    const auto meta_len = read_pod<std::uint64_t>(is);
    f.metadata.resize(meta_len);
    if (meta_len > 0) read_bytes(is, f.metadata.data(), meta_len);
    return f;
  } catch (const std::runtime_error& e) {
    throw DataError(e.what());
  }
}

}  // namespace imfrac::io
