#pragma once

#include <cstdint>
#include <functional>
#include <span>

namespace ays {

// splitmix64-style finalizer; used to derive independent child seeds
uint64_t mix_seed(uint64_t a, uint64_t b);

// number of worker threads; honors the AYS_WORKERS environment variable
int worker_count();

// Runs fn(begin, end) over [0, n) split into fixed-size chunks. Chunk
// boundaries depend only on chunk_size, not on the worker count, so
// per-chunk reductions combined in chunk order stay deterministic.
void parallel_for(int64_t n, int64_t chunk_size,
                  const std::function<void(int64_t, int64_t)>& fn);

double log_sum_exp(std::span<const double> v);

}  // namespace ays
