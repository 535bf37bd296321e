#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "core/models.hpp"
#include "core/schedule.hpp"

namespace ays {

enum class SolverKind { ddim, stochastic_ddim, er_sde, dpmpp_2m, sde_dpmpp_2m };

SolverKind solver_from_string(const std::string& tag);
std::string solver_to_string(SolverKind kind);

struct SolverSpec {
  SolverKind kind = SolverKind::ddim;
  double lambda = 1.0;  // er_sde family parameter
};

// Single updates from noise level b down to a (0 < a < b). All take the
// denoised prediction at b; the stochastic ones also take a standard normal
// draw z. Input and output spans may alias.

void step_ddim(std::span<const double> x, double b, double a,
               std::span<const double> denoised, std::span<double> out);

void step_er_sde(std::span<const double> x, double b, double a,
                 std::span<const double> denoised, double lambda,
                 std::span<const double> z, std::span<double> out);

void step_stochastic_ddim(std::span<const double> x, double b, double a,
                          std::span<const double> denoised,
                          std::span<const double> z, std::span<double> out);

// linear extrapolation from the current and previous denoised predictions,
// used by both multistep solvers; exact for denoisers linear in log sigma
void extrapolated_denoised(std::span<const double> denoised_b,
                           std::span<const double> denoised_prev,
                           double sigma_prev, double b, double a,
                           std::span<double> out);

struct TraceRow {
  int step;
  double sigma_from, sigma_to;
  double mean_abs_x, mean_abs_denoised;
};

struct SamplerOptions {
  // false: start from N(0, sigma_max^2 I); true: start from the exact noised
  // data marginal at sigma_max
  bool start_from_marginal = false;
};

// Runs n independent sampling chains along s and returns the n * d results
// row-major. Noise draws are keyed on (seed, step, sample index), so results
// do not depend on thread count or execution order.
std::vector<double> run_sampler(const DataModel& model, SolverSpec solver,
                                const Schedule& s, int64_t n, uint64_t seed,
                                const SamplerOptions& opts = {},
                                std::vector<TraceRow>* trace = nullptr);

void write_trace_csv(const std::string& path,
                     std::span<const TraceRow> trace);

}  // namespace ays
