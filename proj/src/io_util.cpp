#include "harmdstm/io_util.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace harmdstm {

namespace {
constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;
}  // namespace

std::uint64_t fnv1a64(const void* data, std::size_t size) {
  const auto* p = static_cast<const unsigned char*>(data);
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = 0; i < size; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

std::uint64_t fnv1a64(const std::string& s) { return fnv1a64(s.data(), s.size()); }

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

DoubleWriter::DoubleWriter(const std::filesystem::path& path) : hash_(kFnvOffset) {
  std::FILE* f = std::fopen(path.string().c_str(), "wb");
  if (!f) throw io_error("cannot open for writing: " + path.string());
  file_ = f;
}

DoubleWriter::~DoubleWriter() { close(); }

void DoubleWriter::close() {
  if (file_) {
    std::fclose(static_cast<std::FILE*>(file_));
    file_ = nullptr;
  }
}

void DoubleWriter::write(const double* values, std::size_t count) {
  if (!file_) throw io_error("DoubleWriter: writer already closed");
  const std::size_t written =
      std::fwrite(values, sizeof(double), count, static_cast<std::FILE*>(file_));
  if (written != count) throw io_error("DoubleWriter: short write");
  const auto* bytes = reinterpret_cast<const unsigned char*>(values);
  for (std::size_t i = 0; i < count * sizeof(double); ++i) {
    hash_ ^= bytes[i];
    hash_ *= kFnvPrime;
  }
  count_ += count;
}

void DoubleWriter::write_row_major(const Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Eigen::VectorXd row = m.row(r);
    write(row.data(), static_cast<std::size_t>(row.size()));
  }
}

std::vector<double> read_doubles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  in.seekg(0, std::ios::end);
  const std::streamoff bytes = in.tellg();
  in.seekg(0, std::ios::beg);
  if (bytes < 0 || bytes % sizeof(double) != 0)
    throw io_error("binary file size is not a multiple of 8: " + path.string());
  std::vector<double> out(static_cast<std::size_t>(bytes) / sizeof(double));
  if (!out.empty()) {
    in.read(reinterpret_cast<char*>(out.data()), bytes);
    if (!in) throw io_error("short read: " + path.string());
  }
  return out;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open for reading: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open for writing: " + path.string());
  out << content;
  if (!out) throw io_error("short write: " + path.string());
}

}  // namespace harmdstm
