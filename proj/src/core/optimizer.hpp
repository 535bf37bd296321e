#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "core/klub.hpp"
#include "core/models.hpp"
#include "core/schedule.hpp"
#include "core/solvers.hpp"

namespace ays {

// Pair objective evaluated when moving one interior point; lower is better.
// Implementations must return identical values for identical (triple, key)
// so candidates compared under one key share their random draws.
class KlubObjective {
 public:
  virtual ~KlubObjective() = default;
  virtual double pair_value(const IntervalTriple& tr, uint64_t key) = 0;
  virtual KlubEstimate schedule_total(const Schedule& s, uint64_t key) = 0;
  virtual int64_t denoiser_evals() const { return 0; }
};

// Monte-Carlo objective over a fixed data pool (common random numbers per key)
class MonteCarloKlub : public KlubObjective {
 public:
  MonteCarloKlub(const DataModel& model, int64_t pool_size, int64_t n_mc,
                 uint64_t seed);
  double pair_value(const IntervalTriple& tr, uint64_t key) override;
  KlubEstimate schedule_total(const Schedule& s, uint64_t key) override;
  int64_t denoiser_evals() const override { return evals_; }

 private:
  DenoiserFn denoise_;
  SamplePool pool_;
  KlubOptions opts_;
  int64_t evals_ = 0;
};

// exact closed form for isotropic Gaussian data; keys are ignored
class GaussianClosedFormKlub : public KlubObjective {
 public:
  explicit GaussianClosedFormKlub(double c) : c_(c) {}
  double pair_value(const IntervalTriple& tr, uint64_t key) override;
  KlubEstimate schedule_total(const Schedule& s, uint64_t key) override;

 private:
  double c_;
};

using MonitorFn = std::function<double(const Schedule&)>;

enum class SweepOrder { odd_even, sequential };

struct OptimizerConfig {
  int n_candidates = 11;   // odd, current value included
  double span = 0.9;       // fraction of the log-gap to each neighbor
  int64_t n_mc = 4096;     // per pair estimate
  int64_t pool_size = 8192;
  int stage1_max_sweeps = 30;
  int refine_max_sweeps = 5;
  int early_stop_cadence = 1;       // sweeps between monitor evaluations
  int64_t monitor_samples = 20000;  // sampler draws per monitor evaluation
  SolverSpec monitor_solver{SolverKind::sde_dpmpp_2m, 1.0};
  SweepOrder order = SweepOrder::odd_even;
  NoiseSpec noise;
  std::string init_kind = "edm";  // edm | logsnr | time-uniform | time-quadratic
  double init_rho = 7.0;
  uint64_t seed = 0;
};

struct SweepRecord {
  int stage = 1;          // 1..3
  int sweep = 0;          // 0 is the stage's starting schedule
  double klub_total = 0;
  double klub_std_error = 0;
  double monitor = 0;
  bool has_monitor = false;
  int attempted = 0;  // optimize_index calls in this sweep
  int moved = 0;      // indices whose value changed
};

struct OptimizationReport {
  std::vector<SweepRecord> sweeps;
  std::string stop_reason;  // no_change | max_sweeps
  int stage1_index_updates = 0;
  int total_index_updates = 0;
  int64_t denoiser_evals = 0;
  double wall_seconds = 0;
  std::string to_json() const;
};

struct OptimizationResult {
  Schedule s10, s20, s40;
  OptimizationReport report;
};

// moves one interior point to the best of cfg.n_candidates values (the
// current one included); returns whether it moved
bool optimize_index(Schedule& s, int i, const OptimizerConfig& cfg,
                    KlubObjective& obj, uint64_t key);

// one pass over the given interior indices; with odd_even order the two
// parity classes are evaluated against the schedule as left by the previous
// phase, so non-adjacent indices can run concurrently
bool sweep(Schedule& s, const std::vector<int>& indices,
           const OptimizerConfig& cfg, KlubObjective& obj, uint64_t sweep_key);

// stage-1 loop: sweeps all interior points, tracks the monitor, and returns
// the schedule at the best monitor value seen (initial schedule included)
Schedule optimize_with_early_stop(const Schedule& start,
                                  const OptimizerConfig& cfg, KlubObjective& obj,
                                  const MonitorFn& monitor,
                                  OptimizationReport* report = nullptr);

// full pipeline: heuristic init at 10 steps, early-stopped stage 1, two
// subdivision stages fine-tuning only the inserted points
OptimizationResult hierarchical_optimize(const DataModel& model,
                                         const OptimizerConfig& cfg);
OptimizationResult hierarchical_optimize(const DataModel& model,
                                         const OptimizerConfig& cfg,
                                         KlubObjective& obj,
                                         const MonitorFn& monitor);

// stage outputs for m in {10, 20, 40}; anything else interpolates the
// 40-step schedule
Schedule schedule_for_steps(const OptimizationResult& result, int m);

// default monitor: closed-form KL for Gaussian models, otherwise sampler NLL
MonitorFn default_monitor(const DataModel& model, const OptimizerConfig& cfg);

}  // namespace ays
