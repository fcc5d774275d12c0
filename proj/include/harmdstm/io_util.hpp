#pragma once

#include <bit>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "harmdstm/errors.hpp"

namespace harmdstm {

static_assert(std::endian::native == std::endian::little,
              "binary formats are little-endian; big-endian hosts are not supported");

/// FNV-1a 64-bit hash of a byte range.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::uint64_t fnv1a64(const std::string& s);

/// Hex string (16 chars) of a 64-bit hash.
std::string hex64(std::uint64_t v);

// Append-style binary writer for 64-bit little-endian floats.
class DoubleWriter {
 public:
  explicit DoubleWriter(const std::filesystem::path& path);
  ~DoubleWriter();
  DoubleWriter(const DoubleWriter&) = delete;
  DoubleWriter& operator=(const DoubleWriter&) = delete;

  void write(const double* values, std::size_t count);
  void write(const Eigen::VectorXd& v) { write(v.data(), static_cast<std::size_t>(v.size())); }
  /// Row-major write of a (column-major) Eigen matrix.
  void write_row_major(const Eigen::MatrixXd& m);

  std::size_t count() const { return count_; }
  std::uint64_t checksum() const { return hash_; }
  void close();

 private:
  void* file_ = nullptr;
  std::size_t count_ = 0;
  std::uint64_t hash_;
};

/// Reads a whole file of 64-bit little-endian floats.
std::vector<double> read_doubles(const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace harmdstm
