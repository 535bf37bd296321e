#pragma once

#include <string>
#include <vector>

namespace ays {

struct NoiseSpec {
  double sigma_min = 0.002;
  double sigma_max = 80.0;
};

// A sampling schedule: strictly decreasing noise levels, largest first.
struct Schedule {
  std::vector<double> sigmas;
  std::string name;

  int steps() const { return static_cast<int>(sigmas.size()) - 1; }
  double sigma_max() const { return sigmas.front(); }
  double sigma_min() const { return sigmas.back(); }
};

enum class QuadVariant {
  index,        // sigma quadratic in i/n
  sqrt_linear,  // sqrt(sigma) linear in i/n
};

Schedule edm_schedule(int n, NoiseSpec spec, double rho = 7.0);
Schedule logsnr_schedule(int n, NoiseSpec spec);
Schedule time_uniform_schedule(int n, NoiseSpec spec);
Schedule time_quadratic_schedule(int n, NoiseSpec spec,
                                 QuadVariant variant = QuadVariant::index);

// doubles the step count; inserted values are geometric means of neighbors
Schedule subdivide(const Schedule& s);

// resamples to m steps, piecewise linear in (i/n, log sigma); knots are hit
// exactly, so m == steps() returns the input unchanged
Schedule interpolate(const Schedule& s, int m);

// returns human-readable violations; empty means valid
std::vector<std::string> validate(const Schedule& s);
std::vector<std::string> validate(const Schedule& s, NoiseSpec expected);

std::string schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const std::string& text);
Schedule load_schedule(const std::string& path);
void save_schedule(const Schedule& s, const std::string& path);

}  // namespace ays
