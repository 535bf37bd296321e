#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "core/models.hpp"
#include "core/schedule.hpp"

namespace ays {

// two adjacent schedule intervals sharing the movable midpoint
struct IntervalTriple {
  double t_lo, t_mid, t_hi;
};

struct KlubEstimate {
  double value = 0;
  double std_error = 0;
  int64_t n_samples = 0;
};

// the proposal density is built from the Gaussian closed form at this width,
// independent of the data model under evaluation
inline constexpr double kImportanceC = 0.5;

// unnormalized proposal (1/t^3)(1/(t^2+c^2) - 1/(t_up^2+c^2)) where t_up is
// t_mid on (t_lo, t_mid] and t_hi above; zero outside (t_lo, t_hi)
double importance_density(double t, const IntervalTriple& tr,
                          double c_imp = kImportanceC);

// Tabulated inverse-CDF sampler for the proposal over one or both branches.
// CDF is accumulated on a log-uniform grid per branch and inverted by binary
// search plus linear interpolation.
class ImportanceSampler {
 public:
  ImportanceSampler(const IntervalTriple& tr, double c_imp = kImportanceC,
                    int grid = 4096);
  // single-branch form for a plain interval (t_up = t_hi everywhere)
  ImportanceSampler(double t_lo, double t_hi, double c_imp = kImportanceC,
                    int grid = 4096);

  double z() const { return z_left_ + z_right_; }
  double z_left() const { return z_left_; }

  // maps u in [0, 1) to (t, t_up); strictly inside the chosen branch
  std::pair<double, double> sample(double u) const;

 private:
  struct Branch {
    double t_up = 0;
    std::vector<double> t, cdf;
  };
  void build(Branch& br, double t0, double t1, double t_up, double c, int grid);
  double invert(const Branch& br, double target) const;
  Branch left_, right_;
  double z_left_ = 0, z_right_ = 0;
  bool two_branch_ = false;
};

// fixed set of data samples the estimators resample from
struct SamplePool {
  int d = 0;
  std::vector<double> xs;
  int64_t size() const { return d ? static_cast<int64_t>(xs.size()) / d : 0; }
};

SamplePool make_pool(const DataModel& model, int64_t size, uint64_t seed);

enum class TimeSampling { importance, log_uniform };

struct KlubOptions {
  int64_t n_mc = 4096;
  double c_imp = kImportanceC;
  TimeSampling sampling = TimeSampling::importance;
  std::string diag_path;  // optional per-sample (t, t_up, w) CSV
};

// Monte-Carlo estimate of the summed bound over the triple's two intervals.
// Draws are keyed on (seed, sample index), so equal seeds reuse identical
// (x0, noise, uniform-for-t) streams across candidate midpoints.
KlubEstimate klub_pair_estimate(const DenoiserFn& denoise, const SamplePool& pool,
                                const IntervalTriple& tr, uint64_t seed,
                                const KlubOptions& opts = {});

KlubEstimate klub_interval_estimate(const DenoiserFn& denoise,
                                    const SamplePool& pool, double t_lo,
                                    double t_hi, uint64_t seed,
                                    const KlubOptions& opts = {});

// sum of single-interval estimates over the whole schedule, n_mc per interval
KlubEstimate klub_schedule_total(const DenoiserFn& denoise, const SamplePool& pool,
                                 const Schedule& s, uint64_t seed,
                                 const KlubOptions& opts = {});

}  // namespace ays
