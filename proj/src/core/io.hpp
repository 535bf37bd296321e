#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ays {

// filesystem failures (open, write, rename)
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// malformed file contents (CSV shape, JSON fields)
struct parse_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text(const std::string& path);

// write via temp file + rename so readers never see partial output
void write_text_atomic(const std::string& path, const std::string& content);
void write_bytes_atomic(const std::string& path, const void* data, size_t size);

// sample dumps: CSV with d columns / raw little-endian float64
void write_samples_csv(const std::string& path, std::span<const double> xs,
                       int64_t n, int d);
void write_samples_f64(const std::string& path, std::span<const double> xs);
std::vector<double> read_samples_csv(const std::string& path, int* d_out);
std::vector<double> read_samples_f64(const std::string& path);

// 64-bit FNV-1a over file bytes, as a 16-hex-digit digest
std::string file_digest(const std::string& path);

// counts of n 2-d points on a bins x bins grid over
// [box[0], box[1]] x [box[2], box[3]]; out-of-box points are clamped into the
// edge bins so the counts always sum to n
std::vector<int64_t> histogram2d(std::span<const double> xs, int64_t n,
                                 const double box[4], int bins);

}  // namespace ays
