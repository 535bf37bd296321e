#include "ays.h"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

#include "core/gaussian.hpp"
#include "core/io.hpp"
#include "core/klub.hpp"
#include "core/models.hpp"
#include "core/optimizer.hpp"
#include "core/schedule.hpp"
#include "core/solvers.hpp"

namespace {

thread_local std::string g_last_error;

int fail(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

// Maps C++ exceptions at the boundary onto stable error codes.
template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return AYS_OK;
  } catch (const std::invalid_argument& e) {
    return fail(AYS_ERR_INVALID_ARGUMENT, e.what());
  } catch (const ays::io_error& e) {
    return fail(AYS_ERR_IO, e.what());
  } catch (const ays::parse_error& e) {
    return fail(AYS_ERR_PARSE, e.what());
  } catch (const std::exception& e) {
    return fail(AYS_ERR_RUNTIME, e.what());
  } catch (...) {
    return fail(AYS_ERR_RUNTIME, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <typename T>
void require(const T* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

}  // namespace

struct ays_schedule {
  ays::Schedule s;
};

struct ays_model {
  ays::DataModel m;
};

struct ays_opt_result {
  ays::OptimizationResult r;
};

extern "C" {

const char* ays_version(void) { return "1.0.0"; }

const char* ays_last_error(void) { return g_last_error.c_str(); }

void ays_string_free(char* s) { std::free(s); }

int ays_schedule_create(const char* kind, int steps, double sigma_min,
                        double sigma_max, double rho, double c,
                        ays_schedule** out) {
  return guarded([&] {
    require(kind, "kind");
    require(out, "out");
    ays::NoiseSpec spec{sigma_min, sigma_max};
    std::string k = kind;
    ays::Schedule s;
    if (k == "edm") {
      s = ays::edm_schedule(steps, spec, rho);
    } else if (k == "logsnr") {
      s = ays::logsnr_schedule(steps, spec);
    } else if (k == "time-uniform") {
      s = ays::time_uniform_schedule(steps, spec);
    } else if (k == "time-quadratic") {
      s = ays::time_quadratic_schedule(steps, spec);
    } else if (k == "gaussian-optimal") {
      s = ays::gaussian_optimal_schedule(steps, spec, c);
    } else if (k == "gaussian-klub-optimal") {
      s = ays::gaussian_klub_optimal_schedule(steps, spec, c);
    } else {
      throw std::invalid_argument("unknown schedule kind: " + k);
    }
    *out = new ays_schedule{std::move(s)};
  });
}

int ays_schedule_from_values(const double* sigmas, int count, const char* name,
                             ays_schedule** out) {
  return guarded([&] {
    require(sigmas, "sigmas");
    require(out, "out");
    ays::Schedule s;
    s.sigmas.assign(sigmas, sigmas + count);
    s.name = name ? name : "custom";
    auto bad = ays::validate(s);
    if (!bad.empty()) throw std::invalid_argument(bad.front());
    *out = new ays_schedule{std::move(s)};
  });
}

int ays_schedule_load(const char* path, ays_schedule** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ays_schedule{ays::load_schedule(path)};
  });
}

int ays_schedule_save(const ays_schedule* s, const char* path) {
  return guarded([&] {
    require(s, "schedule");
    require(path, "path");
    ays::save_schedule(s->s, path);
  });
}

int ays_schedule_to_json(const ays_schedule* s, char** json_out) {
  return guarded([&] {
    require(s, "schedule");
    require(json_out, "json_out");
    *json_out = dup_string(ays::schedule_to_json(s->s));
  });
}

int ays_schedule_steps(const ays_schedule* s) {
  if (!s) return -1;
  return static_cast<int>(s->s.steps());
}

int ays_schedule_values(const ays_schedule* s, double* out, int capacity) {
  if (!s || !out) {
    fail(AYS_ERR_INVALID_ARGUMENT, "null argument");
    return -1;
  }
  int n = static_cast<int>(s->s.sigmas.size());
  if (capacity < n) {
    fail(AYS_ERR_INVALID_ARGUMENT, "capacity too small");
    return -1;
  }
  std::memcpy(out, s->s.sigmas.data(), sizeof(double) * n);
  return n;
}

int ays_schedule_name(const ays_schedule* s, char** name_out) {
  return guarded([&] {
    require(s, "schedule");
    require(name_out, "name_out");
    *name_out = dup_string(s->s.name);
  });
}

int ays_schedule_subdivide(const ays_schedule* s, ays_schedule** out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = new ays_schedule{ays::subdivide(s->s)};
  });
}

int ays_schedule_interpolate(const ays_schedule* s, int steps,
                             ays_schedule** out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = new ays_schedule{ays::interpolate(s->s, steps)};
  });
}

int ays_schedule_validate(const ays_schedule* s, char** message_out) {
  return guarded([&] {
    require(s, "schedule");
    require(message_out, "message_out");
    std::string msg;
    for (const std::string& v : ays::validate(s->s)) {
      if (!msg.empty()) msg += "; ";
      msg += v;
    }
    *message_out = dup_string(msg);
  });
}

void ays_schedule_free(ays_schedule* s) { delete s; }

int ays_model_gaussian(double c, int d, ays_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ays_model{ays::DataModel::isotropic_gaussian(c, d)};
  });
}

int ays_model_grid(int rows, int cols, double spacing, double gamma,
                   ays_model** out) {
  return guarded([&] {
    require(out, "out");
    *out = new ays_model{ays::DataModel::grid_mixture(rows, cols, spacing, gamma)};
  });
}

int ays_model_from_json(const char* json, ays_model** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new ays_model{ays::DataModel::from_json(json)};
  });
}

int ays_model_load(const char* path, ays_model** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new ays_model{ays::DataModel::load(path)};
  });
}

int ays_model_to_json(const ays_model* m, char** json_out) {
  return guarded([&] {
    require(m, "model");
    require(json_out, "json_out");
    *json_out = dup_string(m->m.to_json());
  });
}

int ays_model_dim(const ays_model* m) {
  if (!m) return -1;
  return m->m.dim();
}

int ays_model_is_gaussian(const ays_model* m) {
  if (!m) return -1;
  return m->m.is_gaussian() ? 1 : 0;
}

int ays_model_gaussian_c(const ays_model* m, double* c_out) {
  return guarded([&] {
    require(m, "model");
    require(c_out, "c_out");
    *c_out = m->m.gaussian_c();
  });
}

int ays_model_log_density(const ays_model* m, const double* x, double sigma,
                          double* out) {
  return guarded([&] {
    require(m, "model");
    require(x, "x");
    require(out, "out");
    *out = m->m.noised_log_density({x, static_cast<size_t>(m->m.dim())}, sigma);
  });
}

int ays_model_denoise(const ays_model* m, const double* x, double sigma,
                      double* out) {
  return guarded([&] {
    require(m, "model");
    require(x, "x");
    require(out, "out");
    size_t d = static_cast<size_t>(m->m.dim());
    m->m.ideal_denoiser({x, d}, sigma, {out, d});
  });
}

int ays_model_sample(const ays_model* m, int64_t n, uint64_t seed,
                     double* out) {
  return guarded([&] {
    require(m, "model");
    require(out, "out");
    if (n <= 0) throw std::invalid_argument("n must be positive");
    m->m.sample(n, seed, {out, static_cast<size_t>(n * m->m.dim())});
  });
}

int ays_model_nll(const ays_model* m, const double* xs, int64_t n, double* nll,
                  double* std_error) {
  return guarded([&] {
    require(m, "model");
    require(xs, "xs");
    require(nll, "nll");
    if (n <= 0) throw std::invalid_argument("n must be positive");
    *nll = m->m.nll({xs, static_cast<size_t>(n * m->m.dim())}, n, std_error);
  });
}

int ays_model_axis_moments(const ays_model* m, double* mean_out,
                           double* std_out) {
  return guarded([&] {
    require(m, "model");
    require(mean_out, "mean_out");
    require(std_out, "std_out");
    size_t d = static_cast<size_t>(m->m.dim());
    m->m.axis_moments({mean_out, d}, {std_out, d});
  });
}

void ays_model_free(ays_model* m) { delete m; }

int ays_sampler_run(const ays_model* m, const char* solver, double lambda,
                    const ays_schedule* s, int64_t n, uint64_t seed,
                    int from_marginal, double* out,
                    const char* trace_csv_path) {
  return guarded([&] {
    require(m, "model");
    require(solver, "solver");
    require(s, "schedule");
    require(out, "out");
    if (n <= 0) throw std::invalid_argument("n must be positive");
    ays::SolverSpec spec{ays::solver_from_string(solver), lambda};
    ays::SamplerOptions opts;
    opts.start_from_marginal = from_marginal != 0;
    std::vector<ays::TraceRow> trace;
    std::vector<ays::TraceRow>* trace_ptr = trace_csv_path ? &trace : nullptr;
    std::vector<double> xs =
        ays::run_sampler(m->m, spec, s->s, n, seed, opts, trace_ptr);
    std::memcpy(out, xs.data(), xs.size() * sizeof(double));
    if (trace_csv_path) ays::write_trace_csv(trace_csv_path, trace);
  });
}

int ays_gaussian_euler_kl(const ays_schedule* s, double c, int d, double* f_out,
                          double* kl_out) {
  return guarded([&] {
    require(s, "schedule");
    require(f_out, "f_out");
    require(kl_out, "kl_out");
    ays::EulerKl r = ays::gaussian_euler_kl(s->s, c, d);
    *f_out = r.f;
    *kl_out = r.kl;
  });
}

int ays_gaussian_euler_output_variance(const ays_schedule* s, double c,
                                       double* out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = ays::gaussian_euler_output_variance(s->s, c);
  });
}

int ays_gaussian_klub_closed_form(const ays_schedule* s, double c,
                                  double* out) {
  return guarded([&] {
    require(s, "schedule");
    require(out, "out");
    *out = ays::gaussian_klub_closed_form(s->s, c);
  });
}

int ays_gaussian_denoiser_gap(double t, double t_i, double c, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = ays::gaussian_denoiser_gap(t, t_i, c);
  });
}

int ays_klub_schedule_total(const ays_model* m, const ays_schedule* s,
                            int64_t n_mc, int64_t pool_size, uint64_t seed,
                            double* value, double* std_error) {
  return guarded([&] {
    require(m, "model");
    require(s, "schedule");
    require(value, "value");
    ays::KlubOptions opts;
    opts.n_mc = n_mc;
    ays::SamplePool pool = ays::make_pool(m->m, pool_size, seed);
    ays::KlubEstimate est =
        ays::klub_schedule_total(m->m.denoiser(), pool, s->s, seed, opts);
    *value = est.value;
    if (std_error) *std_error = est.std_error;
  });
}

int ays_write_text(const char* path, const char* text) {
  return guarded([&] {
    require(path, "path");
    require(text, "text");
    ays::write_text_atomic(path, text);
  });
}

int ays_write_samples_csv(const char* path, const double* xs, int64_t n,
                          int d) {
  return guarded([&] {
    require(path, "path");
    require(xs, "xs");
    ays::write_samples_csv(path, {xs, static_cast<size_t>(n * d)}, n, d);
  });
}

int ays_write_samples_f64(const char* path, const double* xs, int64_t n,
                          int d) {
  return guarded([&] {
    require(path, "path");
    require(xs, "xs");
    if (n <= 0 || d <= 0) throw std::invalid_argument("need n, d > 0");
    ays::write_samples_f64(path, {xs, static_cast<size_t>(n * d)});
  });
}

int ays_read_samples_csv(const char* path, double** xs_out, int64_t* n_out,
                         int* d_out) {
  return guarded([&] {
    require(path, "path");
    require(xs_out, "xs_out");
    require(n_out, "n_out");
    require(d_out, "d_out");
    int d = 0;
    std::vector<double> xs = ays::read_samples_csv(path, &d);
    double* buf = static_cast<double*>(std::malloc(xs.size() * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, xs.data(), xs.size() * sizeof(double));
    *xs_out = buf;
    *n_out = static_cast<int64_t>(xs.size()) / d;
    *d_out = d;
  });
}

int ays_read_samples_f64(const char* path, int d, double** xs_out,
                         int64_t* n_out) {
  return guarded([&] {
    require(path, "path");
    require(xs_out, "xs_out");
    require(n_out, "n_out");
    if (d <= 0) throw std::invalid_argument("d must be positive");
    std::vector<double> xs = ays::read_samples_f64(path);
    if (xs.size() % static_cast<size_t>(d) != 0)
      throw ays::parse_error("file length is not a multiple of d");
    double* buf = static_cast<double*>(std::malloc(xs.size() * sizeof(double)));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, xs.data(), xs.size() * sizeof(double));
    *xs_out = buf;
    *n_out = static_cast<int64_t>(xs.size()) / d;
  });
}

void ays_buffer_free(double* p) { std::free(p); }

int ays_file_digest(const char* path, char** hex_out) {
  return guarded([&] {
    require(path, "path");
    require(hex_out, "hex_out");
    *hex_out = dup_string(ays::file_digest(path));
  });
}

int ays_histogram2d(const double* xs, int64_t n, const double* box, int bins,
                    int64_t* counts) {
  return guarded([&] {
    require(xs, "xs");
    require(box, "box");
    require(counts, "counts");
    std::vector<int64_t> c =
        ays::histogram2d({xs, static_cast<size_t>(2 * n)}, n, box, bins);
    std::memcpy(counts, c.data(), c.size() * sizeof(int64_t));
  });
}

void ays_opt_options_defaults(ays_opt_options* opts) {
  if (!opts) return;
  static const char* kMonitorSolver = "sde-dpmpp-2m";
  static const char* kInitKind = "edm";
  opts->n_candidates = 11;
  opts->span = 0.9;
  opts->n_mc = 4096;
  opts->pool_size = 8192;
  opts->stage1_max_sweeps = 30;
  opts->refine_max_sweeps = 5;
  opts->early_stop_cadence = 1;
  opts->monitor_samples = 20000;
  opts->monitor_solver = kMonitorSolver;
  opts->monitor_lambda = 1.0;
  opts->init_kind = kInitKind;
  opts->init_rho = 7.0;
  opts->sigma_min = 0.002;
  opts->sigma_max = 80.0;
  opts->seed = 0;
}

int ays_optimize(const ays_model* m, const ays_opt_options* opts,
                 ays_opt_result** out) {
  return guarded([&] {
    require(m, "model");
    require(opts, "options");
    require(out, "out");
    ays::OptimizerConfig cfg;
    cfg.n_candidates = opts->n_candidates;
    cfg.span = opts->span;
    cfg.n_mc = opts->n_mc;
    cfg.pool_size = opts->pool_size;
    cfg.stage1_max_sweeps = opts->stage1_max_sweeps;
    cfg.refine_max_sweeps = opts->refine_max_sweeps;
    cfg.early_stop_cadence = opts->early_stop_cadence;
    cfg.monitor_samples = opts->monitor_samples;
    if (opts->monitor_solver) {
      cfg.monitor_solver.kind = ays::solver_from_string(opts->monitor_solver);
      cfg.monitor_solver.lambda = opts->monitor_lambda;
    }
    if (opts->init_kind) cfg.init_kind = opts->init_kind;
    cfg.init_rho = opts->init_rho;
    cfg.noise = ays::NoiseSpec{opts->sigma_min, opts->sigma_max};
    cfg.seed = opts->seed;
    *out = new ays_opt_result{ays::hierarchical_optimize(m->m, cfg)};
  });
}

int ays_opt_result_schedule(const ays_opt_result* r, int steps,
                            ays_schedule** out) {
  return guarded([&] {
    require(r, "result");
    require(out, "out");
    *out = new ays_schedule{ays::schedule_for_steps(r->r, steps)};
  });
}

int ays_opt_result_report_json(const ays_opt_result* r, char** json_out) {
  return guarded([&] {
    require(r, "result");
    require(json_out, "json_out");
    *json_out = dup_string(r->r.report.to_json());
  });
}

void ays_opt_result_free(ays_opt_result* r) { delete r; }

}  // extern "C"
