#include "core/optimizer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "core/gaussian.hpp"
#include "core/util.hpp"

namespace ays {

namespace {

constexpr uint64_t kSweepTag = 0x53574545ull;
constexpr uint64_t kTotalTag = 0x544F5441ull;
constexpr uint64_t kMonitorTag = 0x4D4F4Eull;
constexpr uint64_t kPoolSeedTag = 0x504Cull;

void check_config(const OptimizerConfig& cfg) {
  if (cfg.n_candidates < 3 || cfg.n_candidates % 2 == 0)
    throw std::invalid_argument("n_candidates must be odd and >= 3");
  if (!(cfg.span > 0) || !(cfg.span < 1))
    throw std::invalid_argument("span must be in (0, 1)");
}

std::vector<int> interior_indices(const Schedule& s) {
  std::vector<int> idx;
  for (int i = 1; i < static_cast<int>(s.sigmas.size()) - 1; i++)
    idx.push_back(i);
  return idx;
}

}  // namespace

MonteCarloKlub::MonteCarloKlub(const DataModel& model, int64_t pool_size,
                               int64_t n_mc, uint64_t seed)
    : denoise_(model.denoiser()),
      pool_(make_pool(model, pool_size, mix_seed(seed, kPoolSeedTag))) {
  opts_.n_mc = n_mc;
}

double MonteCarloKlub::pair_value(const IntervalTriple& tr, uint64_t key) {
  KlubEstimate e = klub_pair_estimate(denoise_, pool_, tr, key, opts_);
  evals_ += 2 * e.n_samples;
  return e.value;
}

KlubEstimate MonteCarloKlub::schedule_total(const Schedule& s, uint64_t key) {
  KlubEstimate e = klub_schedule_total(denoise_, pool_, s, key, opts_);
  evals_ += 2 * e.n_samples;
  return e;
}

double GaussianClosedFormKlub::pair_value(const IntervalTriple& tr, uint64_t) {
  Schedule s;
  s.sigmas = {tr.t_hi, tr.t_mid, tr.t_lo};
  return gaussian_klub_closed_form(s, c_);
}

KlubEstimate GaussianClosedFormKlub::schedule_total(const Schedule& s, uint64_t) {
  KlubEstimate e;
  e.value = gaussian_klub_closed_form(s, c_);
  return e;
}

bool optimize_index(Schedule& s, int i, const OptimizerConfig& cfg,
                    KlubObjective& obj, uint64_t key) {
  check_config(cfg);
  if (i < 1 || i > static_cast<int>(s.sigmas.size()) - 2)
    throw std::out_of_range("interior index out of range");
  // storage is descending: s.sigmas[i-1] is the upper neighbor
  double hi = s.sigmas[i - 1], cur = s.sigmas[i], lo = s.sigmas[i + 1];
  double log_cur = std::log(cur);
  // candidate window leaves a (1 - span) log-fraction of the gap untouched
  // next to each neighbor
  double log_l = cfg.span * std::log(lo) + (1.0 - cfg.span) * log_cur;
  double log_u = cfg.span * std::log(hi) + (1.0 - cfg.span) * log_cur;
  int grid = cfg.n_candidates - 1;

  double best = obj.pair_value({lo, cur, hi}, key);
  double best_t = cur;
  bool moved = false;
  for (int k = 0; k < grid; k++) {
    double t = std::exp(log_l + (log_u - log_l) * k / (grid - 1));
    if (!(t > lo && t < hi)) continue;
    double v = obj.pair_value({lo, t, hi}, key);
    if (v < best) {
      best = v;
      best_t = t;
      moved = true;
    }
  }
  if (moved) s.sigmas[i] = best_t;
  return moved;
}

bool sweep(Schedule& s, const std::vector<int>& indices,
           const OptimizerConfig& cfg, KlubObjective& obj, uint64_t sweep_key) {
  bool changed = false;
  if (cfg.order == SweepOrder::sequential) {
    for (int i : indices)
      changed |= optimize_index(s, i, cfg, obj, mix_seed(sweep_key, i));
    return changed;
  }
  // odd then even: indices within one phase never share an interval, so each
  // phase evaluates against a fixed schedule
  for (int phase : {1, 0}) {
    std::vector<std::pair<int, double>> moves;
    for (int i : indices) {
      if (i % 2 != phase) continue;
      Schedule probe = s;
      if (optimize_index(probe, i, cfg, obj, mix_seed(sweep_key, i)))
        moves.emplace_back(i, probe.sigmas[i]);
    }
    for (auto& [i, t] : moves) {
      s.sigmas[i] = t;
      changed = true;
    }
  }
  return changed;
}

namespace {

// shared stage loop; monitor may be null (no early stopping)
Schedule run_stage(Schedule s, const std::vector<int>& indices, int stage,
                   int max_sweeps, const OptimizerConfig& cfg, KlubObjective& obj,
                   const MonitorFn* monitor, OptimizationReport* report) {
  uint64_t stage_seed = mix_seed(cfg.seed, kSweepTag + stage);
  uint64_t total_key = mix_seed(cfg.seed, kTotalTag + stage);

  auto record = [&](int sweep_no, int attempted, int moved, bool with_monitor,
                    double mon_value) {
    if (!report) return;
    SweepRecord r;
    r.stage = stage;
    r.sweep = sweep_no;
    KlubEstimate e = obj.schedule_total(s, total_key);
    r.klub_total = e.value;
    r.klub_std_error = e.std_error;
    r.has_monitor = with_monitor;
    r.monitor = mon_value;
    r.attempted = attempted;
    r.moved = moved;
    report->sweeps.push_back(r);
  };

  double best_mon = 0;
  Schedule best = s;
  if (monitor) {
    best_mon = (*monitor)(s);
    record(0, 0, 0, true, best_mon);
  } else {
    record(0, 0, 0, false, 0);
  }

  std::string reason = "max_sweeps";
  for (int sw = 1; sw <= max_sweeps; sw++) {
    Schedule before = s;
    bool changed = sweep(s, indices, cfg, obj, mix_seed(stage_seed, sw));
    int moved = 0;
    for (size_t j = 0; j < s.sigmas.size(); j++)
      if (s.sigmas[j] != before.sigmas[j]) moved++;
    int attempted = static_cast<int>(indices.size());
    if (report) {
      report->total_index_updates += attempted;
      if (stage == 1) report->stage1_index_updates += attempted;
    }
    bool last = !changed || sw == max_sweeps;
    bool eval_monitor = monitor && (sw % cfg.early_stop_cadence == 0 || last);
    double mon_value = 0;
    if (eval_monitor) {
      mon_value = (*monitor)(s);
      if (mon_value < best_mon) {
        best_mon = mon_value;
        best = s;
      }
    }
    record(sw, attempted, moved, eval_monitor, mon_value);
    if (!changed) {
      reason = "no_change";
      break;
    }
  }
  if (report && stage == 1) report->stop_reason = reason;
  return monitor ? best : s;
}

}  // namespace

Schedule optimize_with_early_stop(const Schedule& start,
                                  const OptimizerConfig& cfg, KlubObjective& obj,
                                  const MonitorFn& monitor,
                                  OptimizationReport* report) {
  check_config(cfg);
  auto bad = validate(start);
  if (!bad.empty()) throw std::invalid_argument(bad.front());
  Schedule s = run_stage(start, interior_indices(start), 1,
                         cfg.stage1_max_sweeps, cfg, obj, &monitor, report);
  s.name = "ays-optimized";
  return s;
}

MonitorFn default_monitor(const DataModel& model, const OptimizerConfig& cfg) {
  uint64_t mon_seed = mix_seed(cfg.seed, kMonitorTag);
  if (model.is_gaussian()) {
    double c = model.gaussian_c();
    int d = model.dim();
    return [c, d](const Schedule& s) { return gaussian_euler_kl(s, c, d).kl; };
  }
  DataModel copy = model;
  SolverSpec solver = cfg.monitor_solver;
  int64_t n = cfg.monitor_samples;
  return [copy, solver, n, mon_seed](const Schedule& s) {
    std::vector<double> xs = run_sampler(copy, solver, s, n, mon_seed);
    return copy.nll(xs, n);
  };
}

OptimizationResult hierarchical_optimize(const DataModel& model,
                                         const OptimizerConfig& cfg) {
  MonteCarloKlub obj(model, cfg.pool_size, cfg.n_mc, cfg.seed);
  MonitorFn monitor = default_monitor(model, cfg);
  return hierarchical_optimize(model, cfg, obj, monitor);
}

OptimizationResult hierarchical_optimize(const DataModel& model,
                                         const OptimizerConfig& cfg,
                                         KlubObjective& obj,
                                         const MonitorFn& monitor) {
  check_config(cfg);
  auto t0 = std::chrono::steady_clock::now();
  OptimizationResult out;

  Schedule init;
  if (cfg.init_kind == "edm")
    init = edm_schedule(10, cfg.noise, cfg.init_rho);
  else if (cfg.init_kind == "logsnr")
    init = logsnr_schedule(10, cfg.noise);
  else if (cfg.init_kind == "time-uniform")
    init = time_uniform_schedule(10, cfg.noise);
  else if (cfg.init_kind == "time-quadratic")
    init = time_quadratic_schedule(10, cfg.noise);
  else
    throw std::invalid_argument("unknown init kind: " + cfg.init_kind);

  out.s10 = run_stage(init, interior_indices(init), 1, cfg.stage1_max_sweeps,
                      cfg, obj, &monitor, &out.report);
  out.s10.name = "ays-optimized";

  // refinement stages tune only the inserted odd indices; previous points
  // stay frozen
  Schedule s = out.s10;
  for (int stage = 2; stage <= 3; stage++) {
    s = subdivide(s);
    std::vector<int> inserted;
    for (int i = 1; i < static_cast<int>(s.sigmas.size()) - 1; i += 2)
      inserted.push_back(i);
    s = run_stage(s, inserted, stage, cfg.refine_max_sweeps, cfg, obj, nullptr,
                  &out.report);
    s.name = "ays-optimized";
    if (stage == 2) out.s20 = s;
  }
  out.s40 = s;

  out.report.denoiser_evals = obj.denoiser_evals();
  out.report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

Schedule schedule_for_steps(const OptimizationResult& result, int m) {
  if (m < 1) throw std::invalid_argument("need at least one step");
  if (m == 10) return result.s10;
  if (m == 20) return result.s20;
  if (m == 40) return result.s40;
  return interpolate(result.s40, m);
}

std::string OptimizationReport::to_json() const {
  nlohmann::ordered_json j;
  j["stop_reason"] = stop_reason;
  j["stage1_index_updates"] = stage1_index_updates;
  j["total_index_updates"] = total_index_updates;
  j["denoiser_evals"] = denoiser_evals;
  j["wall_seconds"] = wall_seconds;
  j["sweeps"] = nlohmann::ordered_json::array();
  for (const auto& r : sweeps) {
    nlohmann::ordered_json row;
    row["stage"] = r.stage;
    row["sweep"] = r.sweep;
    row["klub_total"] = r.klub_total;
    row["klub_std_error"] = r.klub_std_error;
    if (r.has_monitor) row["monitor"] = r.monitor;
    row["attempted"] = r.attempted;
    row["moved"] = r.moved;
    j["sweeps"].push_back(row);
  }
  return j.dump(2) + "\n";
}

}  // namespace ays
