#include "core/gaussian.hpp"

#include <cmath>
#include <stdexcept>

namespace ays {

namespace {

void check_c(double c) {
  if (!(c > 0)) throw std::invalid_argument("data std c must be positive");
}

// ascending view over a descending schedule: t(0) = sigma_min
struct Ascending {
  const std::vector<double>& s;
  double operator()(int i) const { return s[s.size() - 1 - i]; }
  int n() const { return static_cast<int>(s.size()) - 1; }
};

}  // namespace

void gaussian_score(std::span<const double> x, double t, double c,
                    std::span<double> out) {
  check_c(c);
  if (t < 0) throw std::invalid_argument("noise level must be nonnegative");
  if (out.size() != x.size()) throw std::invalid_argument("size mismatch");
  double inv = -1.0 / (c * c + t * t);
  for (size_t i = 0; i < x.size(); i++) out[i] = inv * x[i];
}

Schedule gaussian_optimal_schedule(int n, NoiseSpec spec, double c) {
  check_c(c);
  if (n < 1) throw std::invalid_argument("schedule needs at least one step");
  if (!(spec.sigma_min > 0) || !(spec.sigma_min < spec.sigma_max))
    throw std::invalid_argument("need 0 < sigma_min < sigma_max");
  // interior points interpolate uniformly in alpha = arctan(t/c)
  double a_lo = std::atan(spec.sigma_min / c);
  double a_hi = std::atan(spec.sigma_max / c);
  Schedule s;
  s.name = "gaussian-optimal";
  s.sigmas.resize(n + 1);
  for (int i = 1; i < n; i++) {
    double u = static_cast<double>(i) / n;
    s.sigmas[n - i] = c * std::tan((1.0 - u) * a_lo + u * a_hi);
  }
  s.sigmas[0] = spec.sigma_max;
  s.sigmas[n] = spec.sigma_min;
  return s;
}

EulerKl gaussian_euler_kl(const Schedule& s, double c, int d) {
  check_c(c);
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  Ascending t{s.sigmas};
  int n = t.n();
  double c2 = c * c;
  // log f = log(t_0^2+c^2) + log(t_n^2+c^2) + 2 sum_int log(t_i^2+c^2)
  //         - 2 sum log(t_{i-1} t_i + c^2), evaluated in log space
  double logf = std::log(t(0) * t(0) + c2) + std::log(t(n) * t(n) + c2);
  for (int i = 1; i < n; i++) logf += 2.0 * std::log(t(i) * t(i) + c2);
  for (int i = 1; i <= n; i++) logf -= 2.0 * std::log(t(i - 1) * t(i) + c2);
  EulerKl out;
  out.f = std::exp(logf);
  out.kl = 0.5 * d * (std::expm1(logf) - logf);
  return out;
}

double gaussian_euler_output_variance(const Schedule& s, double c) {
  check_c(c);
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  Ascending t{s.sigmas};
  int n = t.n();
  double c2 = c * c;
  double v = t(n) * t(n) + c2;
  for (int i = 1; i <= n; i++) {
    double r = (t(i - 1) * t(i) + c2) / (t(i) * t(i) + c2);
    v *= r * r;
  }
  return v;
}

double gaussian_klub_closed_form(const Schedule& s, double c) {
  check_c(c);
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  Ascending t{s.sigmas};
  int n = t.n();
  double c2 = c * c;
  double a = t(0), b = t(n);
  double v = std::log((b * b + c2) / (a * a + c2)) - std::log((b * b) / (a * a));
  for (int i = 1; i <= n; i++) {
    double lo = t(i - 1), hi = t(i);
    v += c2 * (hi * hi - lo * lo) / ((c2 + hi * hi) * (lo * lo));
  }
  return v;
}

Schedule gaussian_klub_optimal_schedule(int n, NoiseSpec spec, double c) {
  check_c(c);
  // Gauss-Seidel fixed-point iteration of the interior stationarity relation,
  // starting from the edm curve
  Schedule s = edm_schedule(n, spec, 7.0);
  s.name = "gaussian-klub-optimal";
  if (n < 2) return s;
  double c2 = c * c;
  auto stationary = [&](double lo, double hi) {
    // t = c sqrt(lo hi / (sqrt((lo^2+c^2)(hi^2+c^2)) - lo hi)), rewritten to
    // avoid the cancellation in the denominator when lo, hi >> c
    double e = c2 / (lo * lo) + c2 / (hi * hi) + c2 * c2 / (lo * lo * hi * hi);
    return c * std::sqrt((std::sqrt(1.0 + e) + 1.0) / e);
  };
  const int max_iters = 10000;
  for (int it = 0; it < max_iters; it++) {
    double max_change = 0;
    // storage is descending; neighbors of index i are [i-1] (larger) and [i+1]
    for (int i = n - 1; i >= 1; i--) {
      double next = stationary(s.sigmas[i + 1], s.sigmas[i - 1]);
      max_change = std::max(max_change, std::abs(next - s.sigmas[i]));
      s.sigmas[i] = next;
    }
    if (max_change < 1e-12) return s;
  }
  throw std::runtime_error("klub-optimal fixed point did not converge");
}

double gaussian_denoiser_gap(double t, double t_i, double c) {
  check_c(c);
  if (!(t >= 0) || !(t <= t_i))
    throw std::invalid_argument("need 0 <= t <= t_i");
  double c2 = c * c;
  return c2 * c2 * (1.0 / (t * t + c2) - 1.0 / (t_i * t_i + c2));
}

}  // namespace ays
