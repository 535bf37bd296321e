#include "core/util.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>
#include <vector>

namespace ays {

uint64_t mix_seed(uint64_t a, uint64_t b) {
  uint64_t z = a + 0x9E3779B97F4A7C15ull * (b + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

int worker_count() {
  static const int n = [] {
    if (const char* env = std::getenv("AYS_WORKERS")) {
      int v = std::atoi(env);
      if (v > 0) return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
  }();
  return n;
}

void parallel_for(int64_t n, int64_t chunk_size,
                  const std::function<void(int64_t, int64_t)>& fn) {
  if (n <= 0) return;
  if (chunk_size <= 0) chunk_size = 1;
  int64_t n_chunks = (n + chunk_size - 1) / chunk_size;
  int workers = std::min<int64_t>(worker_count(), n_chunks);
  if (workers <= 1) {
    for (int64_t c = 0; c < n_chunks; c++)
      fn(c * chunk_size, std::min(n, (c + 1) * chunk_size));
    return;
  }
  std::atomic<int64_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; w++) {
    pool.emplace_back([&] {
      for (;;) {
        int64_t c = next.fetch_add(1);
        if (c >= n_chunks) return;
        fn(c * chunk_size, std::min(n, (c + 1) * chunk_size));
      }
    });
  }
  for (auto& t : pool) t.join();
}

double log_sum_exp(std::span<const double> v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  double s = 0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace ays
