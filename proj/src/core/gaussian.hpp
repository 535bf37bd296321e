#pragma once

#include <span>

#include "core/schedule.hpp"

namespace ays {

// Closed forms for isotropic Gaussian data N(0, c^2 I) under the
// variance-exploding noising, where the marginal at level t is N(0, (c^2+t^2) I).

// score of the noised marginal: -x / (c^2 + t^2)
void gaussian_score(std::span<const double> x, double t, double c,
                    std::span<double> out);

// schedule minimizing the KL divergence of n-step Euler sampling
Schedule gaussian_optimal_schedule(int n, NoiseSpec spec, double c);

struct EulerKl {
  double f;   // variance contraction factor, > 1 for any nontrivial schedule
  double kl;  // (d/2) * (f - 1 - log f)
};

// exact KL of deterministic Euler sampling along s against the data marginal
EulerKl gaussian_euler_kl(const Schedule& s, double c, int d);

// variance of the Euler sampler output when started from the exact marginal
// at sigma_max (per dimension)
double gaussian_euler_output_variance(const Schedule& s, double c);

// exact pathwise KL upper bound of the discretized reverse SDE along s
double gaussian_klub_closed_form(const Schedule& s, double c);

// schedule at which the bound above is stationary in every interior point
Schedule gaussian_klub_optimal_schedule(int n, NoiseSpec spec, double c);

// per-dimension E ||D(x_t, t) - D(x_{t_i}, t_i)||^2 over the joint diffusion
// law, for t < t_i: c^4 (1/(t^2+c^2) - 1/(t_i^2+c^2))
double gaussian_denoiser_gap(double t, double t_i, double c);

}  // namespace ays
