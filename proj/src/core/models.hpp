#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace ays {

// Mixture of axis-aligned Gaussians. Components are isotropic as configured;
// per-axis stds exist internally so grid mixtures can be standardized to unit
// variance on every axis even when the grid is not square.
struct GaussianMixture {
  std::vector<double> weights;  // K, normalized
  std::vector<double> means;    // K * d, row-major
  std::vector<double> stds;     // K * d, all positive
  int d = 0;

  int components() const { return static_cast<int>(weights.size()); }
};

// the only interface solvers and the KLUB estimator see
using DenoiserFn =
    std::function<void(std::span<const double> x, double sigma, std::span<double> out)>;

class DataModel {
 public:
  static DataModel isotropic_gaussian(double c, int d);
  static DataModel mixture(GaussianMixture gm);
  // centered rows x cols grid of isotropic bumps, standardized to zero mean
  // and unit per-axis variance
  static DataModel grid_mixture(int rows, int cols, double spacing = 2.0,
                                double gamma = 0.1);

  int dim() const { return gm_.d; }
  bool is_gaussian() const { return gaussian_; }
  double gaussian_c() const;
  const GaussianMixture& components() const { return gm_; }

  // log density of the data convolved with N(0, sigma^2 I); sigma = 0 gives
  // the data density itself
  double noised_log_density(std::span<const double> x, double sigma) const;

  // posterior mean E[x0 | x_sigma]; undefined at sigma = 0
  void ideal_denoiser(std::span<const double> x, double sigma,
                      std::span<double> out) const;
  DenoiserFn denoiser() const;

  // n samples from the data distribution, written row-major into out (n * d)
  void sample(int64_t n, uint64_t seed, std::span<double> out) const;

  // negative mean log density of the given points under the data density
  double nll(std::span<const double> xs, int64_t n,
             double* std_error = nullptr) const;

  void axis_moments(std::span<double> mean_out, std::span<double> std_out) const;

  static DataModel from_json(const std::string& text);
  static DataModel load(const std::string& path);
  std::string to_json() const;

 private:
  DataModel() = default;
  bool gaussian_ = false;
  double c_ = 0;
  GaussianMixture gm_;
  std::vector<double> log_w_;
  std::vector<double> cum_w_;
  void finish_init();
};

}  // namespace ays
