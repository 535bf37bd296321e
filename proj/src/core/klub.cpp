#include "core/klub.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "core/io.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace ays {

namespace {

constexpr uint64_t kPoolTag = 0x504F4F4Cull;
constexpr uint64_t kDrawTag = 0x4B4C5542ull;

double branch_density(double t, double t_up, double c) {
  return (1.0 / (t * t * t)) *
         (1.0 / (t * t + c * c) - 1.0 / (t_up * t_up + c * c));
}

void check_triple(const IntervalTriple& tr) {
  if (!(tr.t_lo > 0) || !(tr.t_lo < tr.t_mid) || !(tr.t_mid < tr.t_hi))
    throw std::invalid_argument("need 0 < t_lo < t_mid < t_hi");
}

}  // namespace

double importance_density(double t, const IntervalTriple& tr, double c_imp) {
  check_triple(tr);
  if (!(c_imp > 0)) throw std::invalid_argument("c_imp must be positive");
  if (t < tr.t_lo || t > tr.t_hi) return 0.0;
  double t_up = t <= tr.t_mid ? tr.t_mid : tr.t_hi;
  return branch_density(t, t_up, c_imp);
}

ImportanceSampler::ImportanceSampler(const IntervalTriple& tr, double c_imp,
                                     int grid) {
  check_triple(tr);
  if (!(c_imp > 0)) throw std::invalid_argument("c_imp must be positive");
  if (grid < 2) throw std::invalid_argument("grid too small");
  two_branch_ = true;
  build(left_, tr.t_lo, tr.t_mid, tr.t_mid, c_imp, grid);
  build(right_, tr.t_mid, tr.t_hi, tr.t_hi, c_imp, grid);
  z_left_ = left_.cdf.back();
  z_right_ = right_.cdf.back();
}

ImportanceSampler::ImportanceSampler(double t_lo, double t_hi, double c_imp,
                                     int grid) {
  if (!(t_lo > 0) || !(t_lo < t_hi))
    throw std::invalid_argument("need 0 < t_lo < t_hi");
  if (!(c_imp > 0)) throw std::invalid_argument("c_imp must be positive");
  if (grid < 2) throw std::invalid_argument("grid too small");
  two_branch_ = false;
  build(left_, t_lo, t_hi, t_hi, c_imp, grid);
  z_left_ = left_.cdf.back();
}

void ImportanceSampler::build(Branch& br, double t0, double t1, double t_up,
                              double c, int grid) {
  br.t_up = t_up;
  br.t.resize(grid);
  br.cdf.resize(grid);
  double l0 = std::log(t0), l1 = std::log(t1);
  double h = (l1 - l0) / (grid - 1);
  // trapezoid accumulation of pi(t) dt = pi(t) t dlog t on the log grid
  double prev_f = 0, acc = 0;
  for (int i = 0; i < grid; i++) {
    double t = std::exp(l0 + h * i);
    double f = branch_density(t, t_up, c) * t;
    if (i > 0) acc += 0.5 * (prev_f + f) * h;
    br.t[i] = t;
    br.cdf[i] = acc;
    prev_f = f;
  }
}

double ImportanceSampler::invert(const Branch& br, double target) const {
  auto it = std::upper_bound(br.cdf.begin(), br.cdf.end(), target);
  size_t i = std::min<size_t>(it - br.cdf.begin(), br.cdf.size() - 1);
  if (i == 0) return br.t.front();
  double c0 = br.cdf[i - 1], c1 = br.cdf[i];
  double f = c1 > c0 ? (target - c0) / (c1 - c0) : 0.0;
  double t = br.t[i - 1] + f * (br.t[i] - br.t[i - 1]);
  // keep strictly below t_up so the estimator weight denominator stays positive
  return std::min(t, br.t_up * (1.0 - 1e-12));
}

std::pair<double, double> ImportanceSampler::sample(double u) const {
  if (!(u >= 0) || !(u < 1)) throw std::invalid_argument("u must be in [0,1)");
  double target = u * z();
  if (!two_branch_ || target < z_left_)
    return {invert(left_, target), left_.t_up};
  return {invert(right_, target - z_left_), right_.t_up};
}

SamplePool make_pool(const DataModel& model, int64_t size, uint64_t seed) {
  if (size < 1) throw std::invalid_argument("pool needs at least one sample");
  SamplePool pool;
  pool.d = model.dim();
  pool.xs.resize(static_cast<size_t>(size) * pool.d);
  model.sample(size, mix_seed(seed, kPoolTag), pool.xs);
  return pool;
}

namespace {

// t_mid = 0 means a single interval with t_up = t_hi everywhere
KlubEstimate estimate(const DenoiserFn& denoise, const SamplePool& pool,
                      const ImportanceSampler& sampler, double t_lo, double t_mid,
                      double t_hi, uint64_t seed, const KlubOptions& opts) {
  if (pool.size() < 1 || pool.d < 1) throw std::invalid_argument("empty pool");
  if (opts.n_mc < 1) throw std::invalid_argument("n_mc must be positive");
  int d = pool.d;
  int64_t n = opts.n_mc;
  double pool_n = static_cast<double>(pool.size());
  bool log_uniform = opts.sampling == TimeSampling::log_uniform;
  double log_span = std::log(t_hi) - std::log(t_lo);

  const int64_t chunk = 2048;
  int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);
  std::vector<double> diag;
  if (!opts.diag_path.empty()) diag.resize(static_cast<size_t>(n) * 3);

  parallel_for(n, chunk, [&](int64_t lo, int64_t hi) {
    std::vector<double> xt(d), xup(d), da(d), db(d);
    double s = 0, q = 0;
    for (int64_t i = lo; i < hi; i++) {
      RngStream rng(mix_seed(seed, kDrawTag), static_cast<uint64_t>(i));
      // fixed draw order: pool index, time uniform, two noise vectors
      int64_t pi = std::min<int64_t>(static_cast<int64_t>(rng.uniform() * pool_n),
                                     pool.size() - 1);
      double ut = rng.uniform();
      double t, t_up;
      if (log_uniform) {
        t = std::exp(std::log(t_lo) + ut * log_span);
        t_up = (t_mid > 0 && t <= t_mid) ? t_mid : t_hi;
        t = std::min(t, t_up * (1.0 - 1e-12));
      } else {
        auto [tt, uu] = sampler.sample(ut);
        t = tt;
        t_up = uu;
      }
      const double* x0 = pool.xs.data() + pi * d;
      for (int a = 0; a < d; a++) xt[a] = x0[a] + t * rng.normal();
      double bridge = std::sqrt(t_up * t_up - t * t);
      for (int a = 0; a < d; a++) xup[a] = xt[a] + bridge * rng.normal();
      denoise(xt, t, da);
      denoise(xup, t_up, db);
      double dd = 0;
      for (int a = 0; a < d; a++) {
        double diff = da[a] - db[a];
        dd += diff * diff;
      }
      double w;
      if (log_uniform) {
        w = dd / (t * t) * log_span;
      } else {
        double ci = opts.c_imp;
        double g = 1.0 / (t * t + ci * ci) - 1.0 / (t_up * t_up + ci * ci);
        w = dd / g;
      }
      s += w;
      q += w * w;
      if (!diag.empty()) {
        diag[i * 3] = t;
        diag[i * 3 + 1] = t_up;
        diag[i * 3 + 2] = w;
      }
    }
    sums[lo / chunk] = s;
    sqs[lo / chunk] = q;
  });

  double s = 0, q = 0;
  for (int64_t c = 0; c < n_chunks; c++) {
    s += sums[c];
    q += sqs[c];
  }
  double mean = s / n;
  double var = n > 1 ? std::max(0.0, (q - n * mean * mean) / (n - 1)) : 0.0;
  double scale = log_uniform ? 1.0 : sampler.z();
  KlubEstimate est;
  est.value = scale * mean;
  est.std_error = scale * std::sqrt(var / n);
  est.n_samples = n;

  if (!opts.diag_path.empty()) {
    std::ostringstream ss;
    ss << "t,t_up,w\n";
    char buf[96];
    for (int64_t i = 0; i < n; i++) {
      std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", diag[i * 3],
                    diag[i * 3 + 1], diag[i * 3 + 2]);
      ss << buf;
    }
    write_text_atomic(opts.diag_path, ss.str());
  }
  return est;
}

}  // namespace

KlubEstimate klub_pair_estimate(const DenoiserFn& denoise, const SamplePool& pool,
                                const IntervalTriple& tr, uint64_t seed,
                                const KlubOptions& opts) {
  check_triple(tr);
  ImportanceSampler sampler(tr, opts.c_imp);
  return estimate(denoise, pool, sampler, tr.t_lo, tr.t_mid, tr.t_hi, seed, opts);
}

KlubEstimate klub_interval_estimate(const DenoiserFn& denoise,
                                    const SamplePool& pool, double t_lo,
                                    double t_hi, uint64_t seed,
                                    const KlubOptions& opts) {
  ImportanceSampler sampler(t_lo, t_hi, opts.c_imp);
  return estimate(denoise, pool, sampler, t_lo, 0.0, t_hi, seed, opts);
}

KlubEstimate klub_schedule_total(const DenoiserFn& denoise, const SamplePool& pool,
                                 const Schedule& s, uint64_t seed,
                                 const KlubOptions& opts) {
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument("klub_schedule_total: " + bad.front());
  KlubEstimate total;
  double var = 0;
  for (int i = 0; i < s.steps(); i++) {
    double t_hi = s.sigmas[i], t_lo = s.sigmas[i + 1];
    KlubOptions o = opts;
    o.diag_path.clear();
    KlubEstimate e = klub_interval_estimate(denoise, pool, t_lo, t_hi,
                                            mix_seed(seed, i), o);
    total.value += e.value;
    var += e.std_error * e.std_error;
    total.n_samples += e.n_samples;
  }
  total.std_error = std::sqrt(var);
  return total;
}

}  // namespace ays
