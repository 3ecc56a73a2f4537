// io.hpp - persistence for cubes, endmember libraries and run traces.
//
// HSIC cube container (band-sequential, little-endian):
//   magic "HSIC" | u32 version = 1 | u32 rows | u32 cols | u32 bands |
//   bands*rows*cols f64 values, band-major then row-major spatial order.
// Abundance ground truth reuses the container with bands = endmember count.
#pragma once

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "pnmf/types.hpp"
#include "pnmf/version.hpp"

namespace pnmf {

namespace detail {

inline void put_u32le(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>((v >> 8) & 0xff));
  out.push_back(static_cast<char>((v >> 16) & 0xff));
  out.push_back(static_cast<char>((v >> 24) & 0xff));
}

inline std::uint32_t get_u32le(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline void put_f64le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64le(const unsigned char* p) {
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(bits);
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return bytes;
}

inline void write_file_bytes(const std::filesystem::path& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to " + path.string());
}

// Shortest representation that round-trips the double exactly.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace detail

inline void store_cube(const SpectralCube& cube, const std::filesystem::path& path) {
  if (cube.rows < 1 || cube.cols < 1 || cube.bands() < 1)
    throw std::invalid_argument("store_cube: degenerate dimensions");
  if (!all_finite(cube.data)) throw std::invalid_argument("store_cube: non-finite values");
  std::string bytes;
  bytes.reserve(20 + static_cast<std::size_t>(cube.data.size()) * 8);
  bytes += "HSIC";
  detail::put_u32le(bytes, kCubeFormatVersion);
  detail::put_u32le(bytes, static_cast<std::uint32_t>(cube.rows));
  detail::put_u32le(bytes, static_cast<std::uint32_t>(cube.cols));
  detail::put_u32le(bytes, static_cast<std::uint32_t>(cube.bands()));
  for (int b = 0; b < cube.bands(); ++b)
    for (int j = 0; j < cube.pixels(); ++j) detail::put_f64le(bytes, cube.data(b, j));
  detail::write_file_bytes(path, bytes);
}

inline SpectralCube load_cube(const std::filesystem::path& path) {
  const std::string bytes = detail::read_file_bytes(path);
  if (bytes.size() < 20) throw std::runtime_error(path.string() + ": truncated HSIC header");
  if (std::memcmp(bytes.data(), "HSIC", 4) != 0)
    throw std::runtime_error(path.string() + ": bad magic, not an HSIC file");
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t version = detail::get_u32le(p + 4);
  if (version != kCubeFormatVersion)
    throw std::runtime_error(path.string() + ": unsupported HSIC version " + std::to_string(version));
  const std::uint32_t rows = detail::get_u32le(p + 8);
  const std::uint32_t cols = detail::get_u32le(p + 12);
  const std::uint32_t bands = detail::get_u32le(p + 16);
  if (rows < 1 || cols < 1 || bands < 1)
    throw std::runtime_error(path.string() + ": degenerate dimensions in header");
  const std::uint64_t count = static_cast<std::uint64_t>(rows) * cols * bands;
  if (count > (1ULL << 32))
    throw std::runtime_error(path.string() + ": implausible payload size");
  const std::uint64_t expected = 20 + count * 8;
  if (bytes.size() < expected) throw std::runtime_error(path.string() + ": truncated payload");
  if (bytes.size() > expected) throw std::runtime_error(path.string() + ": trailing bytes after payload");

  SpectralCube cube;
  cube.rows = static_cast<int>(rows);
  cube.cols = static_cast<int>(cols);
  cube.data.resize(bands, static_cast<Eigen::Index>(rows) * cols);
  const unsigned char* q = p + 20;
  for (std::uint32_t b = 0; b < bands; ++b)
    for (std::uint32_t j = 0; j < rows * cols; ++j, q += 8) cube.data(b, j) = detail::get_f64le(q);
  if (!all_finite(cube.data)) throw std::runtime_error(path.string() + ": non-finite values in payload");
  cube.allow_negative = cube.data.minCoeff() < 0.0;
  return cube;
}

// Abundances travel as HSIC with bands = endmember count.
inline void store_abundances(const AbundanceMatrix& a, int rows, int cols,
                             const std::filesystem::path& path) {
  SpectralCube c;
  c.rows = rows;
  c.cols = cols;
  c.data = a.data;
  c.allow_negative = a.data.minCoeff() < 0.0;
  store_cube(c, path);
}

inline AbundanceMatrix load_abundances(const std::filesystem::path& path, int* rows = nullptr,
                                       int* cols = nullptr) {
  const SpectralCube c = load_cube(path);
  if (rows) *rows = c.rows;
  if (cols) *cols = c.cols;
  AbundanceMatrix a;
  a.data = c.data;
  return a;
}

// Endmember library: one line per band, one numeric column per endmember,
// optional single header line. Negative entries are rejected (ENC).
inline EndmemberMatrix load_endmember_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  bool header_allowed = true;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    bool numeric = true;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t comma = line.find(',', pos);
      std::string cell = line.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
      // trim
      while (!cell.empty() && (cell.front() == ' ' || cell.front() == '\t')) cell.erase(cell.begin());
      while (!cell.empty() && (cell.back() == ' ' || cell.back() == '\t')) cell.pop_back();
      if (!cell.empty() && cell.front() == '"' && cell.back() == '"' && cell.size() >= 2)
        cell = cell.substr(1, cell.size() - 2);
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        numeric = false;
        break;
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (!numeric) {
      if (header_allowed && rows.empty()) {
        header_allowed = false;  // one header line is tolerated, anything further is an error
        continue;
      }
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": non-numeric cell");
    }
    for (double v : row) {
      if (!std::isfinite(v))
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": non-finite value");
      if (v < 0.0)
        throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": negative entry");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error(path.string() + ":" + std::to_string(lineno) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(path.string() + ": no numeric rows");
  EndmemberMatrix e;
  e.data.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows.front().size(); ++j) e.data(i, j) = rows[i][j];
  return e;
}

inline void store_endmember_csv(const EndmemberMatrix& e, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (int i = 0; i < e.bands(); ++i) {
    for (int j = 0; j < e.count(); ++j) {
      if (j) out << ',';
      out << detail::format_double(e.data(i, j));
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("short write to " + path.string());
}

}  // namespace pnmf
