#include "core/io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace ays {

namespace fs = std::filesystem;

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_bytes_atomic(const std::string& path, const void* data, size_t size) {
  fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec)
      throw io_error("cannot create " + target.parent_path().string() + ": " +
                     ec.message());
  }
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw io_error("cannot write " + tmp.string());
    out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
    if (!out) throw io_error("short write to " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec)
    throw io_error("cannot move " + tmp.string() + " into place: " +
                   ec.message());
}

void write_text_atomic(const std::string& path, const std::string& content) {
  write_bytes_atomic(path, content.data(), content.size());
}

void write_samples_csv(const std::string& path, std::span<const double> xs,
                       int64_t n, int d) {
  if (static_cast<int64_t>(xs.size()) != n * d)
    throw std::invalid_argument("sample buffer size does not match n*d");
  std::ostringstream ss;
  char buf[64];
  for (int64_t i = 0; i < n; i++) {
    for (int j = 0; j < d; j++) {
      std::snprintf(buf, sizeof buf, "%.17g", xs[i * d + j]);
      if (j) ss << ',';
      ss << buf;
    }
    ss << '\n';
  }
  write_text_atomic(path, ss.str());
}

void write_samples_f64(const std::string& path, std::span<const double> xs) {
  // raw doubles; this code targets little-endian hosts
  write_bytes_atomic(path, xs.data(), xs.size() * sizeof(double));
}

std::vector<double> read_samples_csv(const std::string& path, int* d_out) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open " + path);
  std::vector<double> xs;
  std::string line;
  int d = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    int cols = 0;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) {
      try {
        xs.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw parse_error("bad numeric cell in " + path + ": '" + cell + "'");
      }
      cols++;
    }
    if (d < 0)
      d = cols;
    else if (cols != d)
      throw parse_error("ragged CSV row in " + path);
  }
  if (d <= 0) throw parse_error("no data rows in " + path);
  if (d_out) *d_out = d;
  return xs;
}

std::vector<double> read_samples_f64(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw io_error("cannot open " + path);
  std::streamsize size = in.tellg();
  if (size % sizeof(double) != 0)
    throw parse_error(path + " is not a whole number of float64 values");
  std::vector<double> xs(static_cast<size_t>(size) / sizeof(double));
  in.seekg(0);
  in.read(reinterpret_cast<char*>(xs.data()), size);
  if (!in) throw io_error("short read from " + path);
  return xs;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io_error("cannot open " + path);
  uint64_t h = 0xCBF29CE484222325ull;
  char buf[1 << 16];
  for (;;) {
    in.read(buf, sizeof buf);
    std::streamsize got = in.gcount();
    for (std::streamsize i = 0; i < got; i++) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001B3ull;
    }
    if (got < static_cast<std::streamsize>(sizeof buf)) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

std::vector<int64_t> histogram2d(std::span<const double> xs, int64_t n,
                                 const double box[4], int bins) {
  if (bins < 1) throw std::invalid_argument("need at least one bin");
  if (static_cast<int64_t>(xs.size()) != 2 * n)
    throw std::invalid_argument("histogram2d expects 2-d points");
  if (!(box[0] < box[1]) || !(box[2] < box[3]))
    throw std::invalid_argument("degenerate histogram box");
  std::vector<int64_t> counts(static_cast<size_t>(bins) * bins, 0);
  double wx = bins / (box[1] - box[0]);
  double wy = bins / (box[3] - box[2]);
  for (int64_t i = 0; i < n; i++) {
    int ix = static_cast<int>((xs[2 * i] - box[0]) * wx);
    int iy = static_cast<int>((xs[2 * i + 1] - box[2]) * wy);
    ix = std::clamp(ix, 0, bins - 1);
    iy = std::clamp(iy, 0, bins - 1);
    counts[static_cast<size_t>(ix) * bins + iy]++;
  }
  return counts;
}

}  // namespace ays
