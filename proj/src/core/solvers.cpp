#include "core/solvers.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "core/io.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace ays {

namespace {

constexpr uint64_t kPriorTag = 0x5052494Full;
constexpr uint64_t kStepTag = 0x53544550ull;

void check_step(std::span<const double> x, double b, double a,
                std::span<const double> denoised, std::span<double> out) {
  if (!(a > 0) || !(a < b)) throw std::invalid_argument("need 0 < a < b");
  if (denoised.size() != x.size() || out.size() != x.size())
    throw std::invalid_argument("size mismatch");
}

}  // namespace

SolverKind solver_from_string(const std::string& tag) {
  if (tag == "ddim") return SolverKind::ddim;
  if (tag == "stochastic-ddim") return SolverKind::stochastic_ddim;
  if (tag == "er-sde") return SolverKind::er_sde;
  if (tag == "dpmpp-2m") return SolverKind::dpmpp_2m;
  if (tag == "sde-dpmpp-2m") return SolverKind::sde_dpmpp_2m;
  throw std::invalid_argument("unknown solver: " + tag);
}

std::string solver_to_string(SolverKind kind) {
  switch (kind) {
    case SolverKind::ddim: return "ddim";
    case SolverKind::stochastic_ddim: return "stochastic-ddim";
    case SolverKind::er_sde: return "er-sde";
    case SolverKind::dpmpp_2m: return "dpmpp-2m";
    case SolverKind::sde_dpmpp_2m: return "sde-dpmpp-2m";
  }
  throw std::invalid_argument("unknown solver kind");
}

void step_ddim(std::span<const double> x, double b, double a,
               std::span<const double> denoised, std::span<double> out) {
  check_step(x, b, a, denoised, out);
  double r = a / b;
  for (size_t i = 0; i < x.size(); i++)
    out[i] = r * x[i] + (1.0 - r) * denoised[i];
}

void step_er_sde(std::span<const double> x, double b, double a,
                 std::span<const double> denoised, double lambda,
                 std::span<const double> z, std::span<double> out) {
  check_step(x, b, a, denoised, out);
  if (z.size() != x.size()) throw std::invalid_argument("size mismatch");
  if (!(lambda >= 0)) throw std::invalid_argument("lambda must be nonnegative");
  double r = std::pow(a / b, lambda * lambda + 1.0);
  // noise scale a sqrt(1 - (a/b)^(2 lambda^2)); -expm1 keeps it accurate as
  // lambda -> 0
  double noise = a * std::sqrt(-std::expm1(2.0 * lambda * lambda * std::log(a / b)));
  for (size_t i = 0; i < x.size(); i++)
    out[i] = r * x[i] + (1.0 - r) * denoised[i] + noise * z[i];
}

void step_stochastic_ddim(std::span<const double> x, double b, double a,
                          std::span<const double> denoised,
                          std::span<const double> z, std::span<double> out) {
  step_er_sde(x, b, a, denoised, 1.0, z, out);
}

void extrapolated_denoised(std::span<const double> denoised_b,
                           std::span<const double> denoised_prev,
                           double sigma_prev, double b, double a,
                           std::span<double> out) {
  if (!(a > 0) || !(a < b) || !(b < sigma_prev))
    throw std::invalid_argument("need 0 < a < b < sigma_prev");
  if (denoised_prev.size() != denoised_b.size() || out.size() != denoised_b.size())
    throw std::invalid_argument("size mismatch");
  double r = (std::log(sigma_prev) - std::log(b)) / (std::log(b) - std::log(a));
  double w = 1.0 / (2.0 * r);
  for (size_t i = 0; i < denoised_b.size(); i++)
    out[i] = (1.0 + w) * denoised_b[i] - w * denoised_prev[i];
}

std::vector<double> run_sampler(const DataModel& model, SolverSpec solver,
                                const Schedule& s, int64_t n, uint64_t seed,
                                const SamplerOptions& opts,
                                std::vector<TraceRow>* trace) {
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument("run_sampler: " + bad.front());
  if (n < 1) throw std::invalid_argument("need at least one sample");
  int d = model.dim();
  int steps = s.steps();
  std::vector<double> out(static_cast<size_t>(n) * d);

  if (opts.start_from_marginal) {
    // x0 + sigma_max * eps has exactly the noised-data law at sigma_max
    model.sample(n, mix_seed(seed, kPriorTag), out);
    parallel_for(n, 8192, [&](int64_t lo, int64_t hi) {
      for (int64_t i = lo; i < hi; i++) {
        RngStream rng(mix_seed(seed, kPriorTag + 1), static_cast<uint64_t>(i));
        for (int a = 0; a < d; a++)
          out[i * d + a] += s.sigma_max() * rng.normal();
      }
    });
  } else {
    parallel_for(n, 8192, [&](int64_t lo, int64_t hi) {
      for (int64_t i = lo; i < hi; i++) {
        RngStream rng(mix_seed(seed, kPriorTag), static_cast<uint64_t>(i));
        for (int a = 0; a < d; a++)
          out[i * d + a] = s.sigma_max() * rng.normal();
      }
    });
  }

  bool multistep = solver.kind == SolverKind::dpmpp_2m ||
                   solver.kind == SolverKind::sde_dpmpp_2m;
  bool stochastic = solver.kind != SolverKind::ddim &&
                    solver.kind != SolverKind::dpmpp_2m;

  const int64_t chunk = 4096;
  int64_t n_chunks = (n + chunk - 1) / chunk;
  // per-chunk trace accumulators, reduced in chunk order
  std::vector<double> acc_x, acc_d;
  if (trace) {
    acc_x.assign(static_cast<size_t>(steps) * n_chunks, 0.0);
    acc_d.assign(static_cast<size_t>(steps) * n_chunks, 0.0);
  }

  parallel_for(n, chunk, [&](int64_t lo, int64_t hi) {
    int64_t ci = lo / chunk;
    std::vector<double> denoised(d), prev(d), dhat(d), z(d);
    for (int64_t i = lo; i < hi; i++) {
      std::span<double> x(out.data() + i * d, static_cast<size_t>(d));
      double sigma_prev = 0;
      for (int k = 0; k < steps; k++) {
        double b = s.sigmas[k], a = s.sigmas[k + 1];
        model.ideal_denoiser(x, b, denoised);
        if (trace) {
          double sx = 0, sd = 0;
          for (int j = 0; j < d; j++) {
            sx += std::abs(x[j]);
            sd += std::abs(denoised[j]);
          }
          acc_x[static_cast<size_t>(k) * n_chunks + ci] += sx / d;
          acc_d[static_cast<size_t>(k) * n_chunks + ci] += sd / d;
        }
        std::span<const double> use = denoised;
        if (multistep && k > 0) {
          extrapolated_denoised(denoised, prev, sigma_prev, b, a, dhat);
          use = dhat;
        }
        if (stochastic) {
          RngStream rng(mix_seed(seed, kStepTag + k), static_cast<uint64_t>(i));
          rng.fill_normal(z);
        }
        switch (solver.kind) {
          case SolverKind::ddim:
          case SolverKind::dpmpp_2m:
            step_ddim(x, b, a, use, x);
            break;
          case SolverKind::stochastic_ddim:
            step_stochastic_ddim(x, b, a, use, z, x);
            break;
          case SolverKind::er_sde:
            step_er_sde(x, b, a, use, solver.lambda, z, x);
            break;
          case SolverKind::sde_dpmpp_2m:
            step_stochastic_ddim(x, b, a, use, z, x);
            break;
        }
        if (multistep) {
          prev.assign(denoised.begin(), denoised.end());
          sigma_prev = b;
        }
      }
    }
  });

  if (trace) {
    trace->clear();
    for (int k = 0; k < steps; k++) {
      double sx = 0, sd = 0;
      for (int64_t ci = 0; ci < n_chunks; ci++) {
        sx += acc_x[static_cast<size_t>(k) * n_chunks + ci];
        sd += acc_d[static_cast<size_t>(k) * n_chunks + ci];
      }
      trace->push_back({k, s.sigmas[k], s.sigmas[k + 1], sx / n, sd / n});
    }
  }
  return out;
}

void write_trace_csv(const std::string& path, std::span<const TraceRow> trace) {
  std::string text = "step,sigma_from,sigma_to,mean_abs_x,mean_abs_denoised\n";
  char buf[160];
  for (const TraceRow& r : trace) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g,%.17g\n", r.step,
                  r.sigma_from, r.sigma_to, r.mean_abs_x, r.mean_abs_denoised);
    text += buf;
  }
  write_text_atomic(path, text);
}

}  // namespace ays
