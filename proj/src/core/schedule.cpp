#include "core/schedule.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "core/io.hpp"

namespace ays {

namespace {

void check_spec(int n, NoiseSpec spec) {
  if (n < 1) throw std::invalid_argument("schedule needs at least one step");
  if (!(spec.sigma_min > 0) || !(spec.sigma_min < spec.sigma_max))
    throw std::invalid_argument("need 0 < sigma_min < sigma_max");
}

// builds a descending schedule from an ascending sigma(i/n) rule and pins
// the endpoints to the exact configured values
template <class F>
Schedule from_ascending_rule(int n, NoiseSpec spec, std::string name, F sigma_at) {
  Schedule s;
  s.name = std::move(name);
  s.sigmas.resize(n + 1);
  for (int i = 1; i < n; i++)
    s.sigmas[n - i] = sigma_at(static_cast<double>(i) / n);
  s.sigmas[n] = spec.sigma_min;
  s.sigmas[0] = spec.sigma_max;
  return s;
}

}  // namespace

Schedule edm_schedule(int n, NoiseSpec spec, double rho) {
  check_spec(n, spec);
  if (!(rho > 0)) throw std::invalid_argument("rho must be positive");
  double lo = std::pow(spec.sigma_min, 1.0 / rho);
  double hi = std::pow(spec.sigma_max, 1.0 / rho);
  return from_ascending_rule(n, spec, "edm", [=](double u) {
    return std::pow(lo + u * (hi - lo), rho);
  });
}

Schedule logsnr_schedule(int n, NoiseSpec spec) {
  Schedule s = edm_schedule(n, spec, 1.0);
  s.name = "logsnr";
  return s;
}

Schedule time_uniform_schedule(int n, NoiseSpec spec) {
  check_spec(n, spec);
  // sigma(t) = t under the variance-exploding noising, so uniform times are
  // uniform sigmas
  return from_ascending_rule(n, spec, "time-uniform", [=](double u) {
    return spec.sigma_min + u * (spec.sigma_max - spec.sigma_min);
  });
}

Schedule time_quadratic_schedule(int n, NoiseSpec spec, QuadVariant variant) {
  check_spec(n, spec);
  if (variant == QuadVariant::index) {
    return from_ascending_rule(n, spec, "time-quadratic", [=](double u) {
      return spec.sigma_min + u * u * (spec.sigma_max - spec.sigma_min);
    });
  }
  double lo = std::sqrt(spec.sigma_min);
  double hi = std::sqrt(spec.sigma_max);
  Schedule s = from_ascending_rule(n, spec, "time-quadratic", [=](double u) {
    double r = lo + u * (hi - lo);
    return r * r;
  });
  return s;
}

Schedule subdivide(const Schedule& s) {
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument("subdivide: " + bad.front());
  Schedule out;
  out.name = s.name;
  int n = s.steps();
  out.sigmas.resize(2 * n + 1);
  for (int i = 0; i < n; i++) {
    out.sigmas[2 * i] = s.sigmas[i];
    out.sigmas[2 * i + 1] = std::sqrt(s.sigmas[i] * s.sigmas[i + 1]);
  }
  out.sigmas[2 * n] = s.sigmas[n];
  return out;
}

Schedule interpolate(const Schedule& s, int m) {
  auto bad = validate(s);
  if (!bad.empty()) throw std::invalid_argument("interpolate: " + bad.front());
  if (m < 1) throw std::invalid_argument("interpolate needs at least one step");
  int n = s.steps();
  Schedule out;
  out.name = s.name;
  out.sigmas.resize(m + 1);
  for (int j = 0; j <= m; j++) {
    // exact when j*n is a multiple of m, so knots (and the identity case)
    // reproduce input values bit-for-bit
    double pos = static_cast<double>(j) * n / m;
    int i = std::min(static_cast<int>(pos), n - 1);
    double f = pos - i;
    if (f == 0.0) {
      out.sigmas[j] = s.sigmas[i];
    } else {
      out.sigmas[j] = std::exp((1.0 - f) * std::log(s.sigmas[i]) +
                               f * std::log(s.sigmas[i + 1]));
    }
  }
  out.sigmas[0] = s.sigmas[0];
  out.sigmas[m] = s.sigmas[n];
  return out;
}

std::vector<std::string> validate(const Schedule& s) {
  std::vector<std::string> bad;
  if (s.sigmas.size() < 2) {
    bad.push_back("schedule needs at least two sigmas");
    return bad;
  }
  for (size_t i = 0; i < s.sigmas.size(); i++) {
    if (!(s.sigmas[i] > 0) || !std::isfinite(s.sigmas[i])) {
      bad.push_back("sigma[" + std::to_string(i) + "] is not positive and finite");
      return bad;
    }
  }
  for (size_t i = 1; i < s.sigmas.size(); i++) {
    if (!(s.sigmas[i] < s.sigmas[i - 1])) {
      bad.push_back("sigmas not strictly decreasing at index " + std::to_string(i));
      return bad;
    }
  }
  return bad;
}

std::vector<std::string> validate(const Schedule& s, NoiseSpec expected) {
  auto bad = validate(s);
  if (!bad.empty()) return bad;
  if (s.sigma_max() != expected.sigma_max)
    bad.push_back("first sigma does not equal configured sigma_max");
  if (s.sigma_min() != expected.sigma_min)
    bad.push_back("last sigma does not equal configured sigma_min");
  return bad;
}

std::string schedule_to_json(const Schedule& s) {
  nlohmann::ordered_json j;
  j["name"] = s.name;
  j["sigma_min"] = s.sigma_min();
  j["sigma_max"] = s.sigma_max();
  j["sigmas"] = s.sigmas;
  return j.dump(2) + "\n";
}

Schedule schedule_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("schedule JSON parse error: ") + e.what());
  }
  Schedule s;
  try {
    s.name = j.value("name", "");
    s.sigmas = j.at("sigmas").get<std::vector<double>>();
    double lo = j.at("sigma_min").get<double>();
    double hi = j.at("sigma_max").get<double>();
    auto bad = validate(s);
    if (!bad.empty()) throw parse_error("invalid schedule: " + bad.front());
    if (s.sigma_max() != hi || s.sigma_min() != lo)
      throw parse_error("schedule endpoints disagree with sigma_min/sigma_max fields");
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("schedule JSON missing field: ") + e.what());
  }
  return s;
}

Schedule load_schedule(const std::string& path) {
  return schedule_from_json(read_text(path));
}

void save_schedule(const Schedule& s, const std::string& path) {
  write_text_atomic(path, schedule_to_json(s));
}

}  // namespace ays
