#include <doctest.h>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "core/io.hpp"
#include "helpers.hpp"

using namespace ays;
namespace fs = std::filesystem;

TEST_CASE("text round trip and atomicity") {
  TempDir tmp;
  std::string path = tmp.file("a.txt");
  write_text_atomic(path, "hello\nworld\n");
  CHECK(read_text(path) == "hello\nworld\n");
  // overwrite replaces the whole file
  write_text_atomic(path, "x");
  CHECK(read_text(path) == "x");
  // no temp files left behind
  int entries = 0;
  for ([[maybe_unused]] auto& e : fs::directory_iterator(tmp.path)) entries++;
  CHECK(entries == 1);
  CHECK_THROWS_AS(read_text(tmp.file("missing.txt")), io_error);
  // parent directories appear on demand
  std::string nested = tmp.file("made/on/demand/f.txt");
  write_text_atomic(nested, "y");
  CHECK(read_text(nested) == "y");
  // a regular file squatting on the parent path makes the write fail
  write_text_atomic(tmp.file("blocker"), "z");
  CHECK_THROWS_AS(write_text_atomic(tmp.file("blocker/f.txt"), "x"), io_error);
}

TEST_CASE("csv samples round trip at full precision") {
  TempDir tmp;
  std::string path = tmp.file("s.csv");
  std::vector<double> xs{0.1, -2.5e-17, 3.0, 1e300, -4.25, 0.0};
  write_samples_csv(path, xs, 3, 2);
  int d = 0;
  std::vector<double> back = read_samples_csv(path, &d);
  CHECK(d == 2);
  CHECK(back == xs);
  // no header line: the first row is data
  std::ifstream in(path);
  std::string first;
  std::getline(in, first);
  CHECK(first.find("sigma") == std::string::npos);
  CHECK(first.find(',') != std::string::npos);
}

TEST_CASE("csv reader rejects malformed input") {
  TempDir tmp;
  std::string path = tmp.file("bad.csv");
  int d = 0;
  write_text_atomic(path, "1.0,2.0\n3.0\n");
  CHECK_THROWS_AS(read_samples_csv(path, &d), parse_error);
  write_text_atomic(path, "1.0,abc\n");
  CHECK_THROWS_AS(read_samples_csv(path, &d), parse_error);
  write_text_atomic(path, "");
  CHECK_THROWS_AS(read_samples_csv(path, &d), parse_error);
}

TEST_CASE("raw f64 samples round trip bit for bit") {
  TempDir tmp;
  std::string path = tmp.file("s.f64");
  std::vector<double> xs{1.0, -0.0, 5e-324, 1.7976931348623157e308};
  write_samples_f64(path, xs);
  CHECK(fs::file_size(path) == xs.size() * 8);
  std::vector<double> back = read_samples_f64(path);
  REQUIRE(back.size() == xs.size());
  for (size_t i = 0; i < xs.size(); i++) CHECK(back[i] == xs[i]);

  std::ofstream(path, std::ios::binary) << "12345";  // not a multiple of 8
  CHECK_THROWS_AS(read_samples_f64(path), parse_error);
}

TEST_CASE("file digest is the fnv-1a of the bytes") {
  TempDir tmp;
  std::string path = tmp.file("d.bin");
  write_text_atomic(path, "abc");
  // 64-bit FNV-1a of "abc", computed here from the published constants
  uint64_t h = 14695981039346656037ull;
  for (char ch : std::string("abc")) {
    h ^= static_cast<unsigned char>(ch);
    h *= 1099511628211ull;
  }
  char want[17];
  std::snprintf(want, sizeof want, "%016llx", static_cast<unsigned long long>(h));
  CHECK(file_digest(path) == want);
  CHECK(file_digest(path).size() == 16);
  write_text_atomic(path, "abd");
  CHECK(file_digest(path) != want);
  CHECK_THROWS_AS(file_digest(tmp.file("nope")), io_error);
}

TEST_CASE("2-d histogram clamps strays into edge bins") {
  // four in-box points land in their cells; two far-away points clamp
  std::vector<double> xs{
      -0.9, -0.9,  // bin (0, 0)
      0.9,  0.9,   // bin (last, last)
      0.05, 0.05,  // center-ish
      -50.0, 0.0,  // clamps to column 0
      0.0,  50.0,  // clamps to top row
      0.05, 0.05,
  };
  double box[4] = {-1.0, 1.0, -1.0, 1.0};
  int bins = 4;
  std::vector<int64_t> h = histogram2d(xs, 6, box, bins);
  REQUIRE(static_cast<int>(h.size()) == bins * bins);
  CHECK(std::accumulate(h.begin(), h.end(), int64_t{0}) == 6);
  auto at = [&](int ix, int iy) { return h[ix * bins + iy]; };
  CHECK(at(0, 0) == 1);
  CHECK(at(3, 3) == 1);
  CHECK(at(2, 2) == 2);  // 0.05 falls just above the midline in both axes
  CHECK(at(0, 2) == 1);  // x clamped left, y mid
  CHECK(at(2, 3) == 1);  // y clamped up
}
