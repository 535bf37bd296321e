#include "core/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "core/io.hpp"
#include "core/rng.hpp"
#include "core/util.hpp"

namespace ays {

namespace {

constexpr double kLogTwoPi = 1.8378770664093453;  // log(2 pi)
constexpr uint64_t kSampleTag = 0x5A4D504C45ull;   // stream purpose tags
constexpr uint64_t kComponentTag = 0x434F4D50ull;

void check_mixture(const GaussianMixture& gm) {
  size_t k = gm.weights.size();
  if (k == 0 || gm.d <= 0) throw std::invalid_argument("empty mixture");
  if (gm.means.size() != k * gm.d || gm.stds.size() != k * gm.d)
    throw std::invalid_argument("mixture field lengths disagree");
  double total = 0;
  for (double w : gm.weights) {
    if (!(w > 0)) throw std::invalid_argument("mixture weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9)
    throw std::invalid_argument("mixture weights must sum to 1");
  for (double s : gm.stds)
    if (!(s > 0)) throw std::invalid_argument("component stds must be positive");
}

}  // namespace

void DataModel::finish_init() {
  check_mixture(gm_);
  int k = gm_.components();
  log_w_.resize(k);
  cum_w_.resize(k);
  double acc = 0;
  for (int i = 0; i < k; i++) {
    log_w_[i] = std::log(gm_.weights[i]);
    acc += gm_.weights[i];
    cum_w_[i] = acc;
  }
  cum_w_.back() = 1.0;
}

DataModel DataModel::isotropic_gaussian(double c, int d) {
  if (!(c > 0)) throw std::invalid_argument("data std c must be positive");
  if (d < 1) throw std::invalid_argument("dimension must be positive");
  DataModel m;
  m.gaussian_ = true;
  m.c_ = c;
  m.gm_.d = d;
  m.gm_.weights = {1.0};
  m.gm_.means.assign(d, 0.0);
  m.gm_.stds.assign(d, c);
  m.finish_init();
  return m;
}

DataModel DataModel::mixture(GaussianMixture gm) {
  DataModel m;
  m.gm_ = std::move(gm);
  m.finish_init();
  return m;
}

DataModel DataModel::grid_mixture(int rows, int cols, double spacing,
                                  double gamma) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid needs rows, cols >= 1");
  if (!(spacing > 0) || !(gamma > 0))
    throw std::invalid_argument("spacing and gamma must be positive");
  GaussianMixture gm;
  gm.d = 2;
  int k = rows * cols;
  double w = 1.0 / k;
  gm.weights.assign(k, w);
  gm.means.reserve(2 * k);
  for (int r = 0; r < rows; r++) {
    for (int c = 0; c < cols; c++) {
      gm.means.push_back((r - (rows - 1) / 2.0) * spacing);
      gm.means.push_back((c - (cols - 1) / 2.0) * spacing);
    }
  }
  // per-axis scale making the mixture variance exactly 1 on each axis
  double var[2] = {0, 0};
  for (int i = 0; i < k; i++)
    for (int a = 0; a < 2; a++)
      var[a] += w * (gamma * gamma + gm.means[2 * i + a] * gm.means[2 * i + a]);
  double sc[2] = {1.0 / std::sqrt(var[0]), 1.0 / std::sqrt(var[1])};
  gm.stds.reserve(2 * k);
  for (int i = 0; i < k; i++) {
    gm.means[2 * i] *= sc[0];
    gm.means[2 * i + 1] *= sc[1];
    gm.stds.push_back(gamma * sc[0]);
    gm.stds.push_back(gamma * sc[1]);
  }
  return mixture(std::move(gm));
}

double DataModel::gaussian_c() const {
  if (!gaussian_) throw std::invalid_argument("model is not an isotropic Gaussian");
  return c_;
}

double DataModel::noised_log_density(std::span<const double> x, double sigma) const {
  if (static_cast<int>(x.size()) != gm_.d)
    throw std::invalid_argument("point dimension mismatch");
  if (sigma < 0) throw std::invalid_argument("sigma must be nonnegative");
  int k = gm_.components(), d = gm_.d;
  double s2 = sigma * sigma;
  double best = -std::numeric_limits<double>::infinity();
  double acc = 0;
  static thread_local std::vector<double> lz;
  lz.resize(k);
  for (int i = 0; i < k; i++) {
    double l = log_w_[i];
    for (int a = 0; a < d; a++) {
      double v = gm_.stds[i * d + a] * gm_.stds[i * d + a] + s2;
      double diff = x[a] - gm_.means[i * d + a];
      l -= 0.5 * (diff * diff / v + std::log(v) + kLogTwoPi);
    }
    lz[i] = l;
    best = std::max(best, l);
  }
  for (int i = 0; i < k; i++) acc += std::exp(lz[i] - best);
  return best + std::log(acc);
}

void DataModel::ideal_denoiser(std::span<const double> x, double sigma,
                               std::span<double> out) const {
  if (static_cast<int>(x.size()) != gm_.d || out.size() != x.size())
    throw std::invalid_argument("point dimension mismatch");
  if (!(sigma > 0))
    throw std::invalid_argument("ideal denoiser undefined at sigma = 0");
  int k = gm_.components(), d = gm_.d;
  double s2 = sigma * sigma;
  static thread_local std::vector<double> lz;
  lz.resize(k);
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < k; i++) {
    double l = log_w_[i];
    for (int a = 0; a < d; a++) {
      double v = gm_.stds[i * d + a] * gm_.stds[i * d + a] + s2;
      double diff = x[a] - gm_.means[i * d + a];
      l -= 0.5 * (diff * diff / v + std::log(v));
    }
    lz[i] = l;
    best = std::max(best, l);
  }
  double norm = 0;
  for (int i = 0; i < k; i++) {
    lz[i] = std::exp(lz[i] - best);
    norm += lz[i];
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int i = 0; i < k; i++) {
    double r = lz[i] / norm;
    for (int a = 0; a < d; a++) {
      double g2 = gm_.stds[i * d + a] * gm_.stds[i * d + a];
      // posterior mean of component i: (g^2 x + s^2 mu) / (g^2 + s^2)
      out[a] += r * (g2 * x[a] + s2 * gm_.means[i * d + a]) / (g2 + s2);
    }
  }
}

DenoiserFn DataModel::denoiser() const {
  return [this](std::span<const double> x, double sigma, std::span<double> out) {
    ideal_denoiser(x, sigma, out);
  };
}

void DataModel::sample(int64_t n, uint64_t seed, std::span<double> out) const {
  if (static_cast<int64_t>(out.size()) != n * gm_.d)
    throw std::invalid_argument("output buffer size does not match n*d");
  int d = gm_.d;
  parallel_for(n, 8192, [&](int64_t lo, int64_t hi) {
    for (int64_t i = lo; i < hi; i++) {
      RngStream rng(mix_seed(seed, kSampleTag), static_cast<uint64_t>(i));
      double u = rng.uniform();
      size_t comp = std::upper_bound(cum_w_.begin(), cum_w_.end(), u) - cum_w_.begin();
      comp = std::min(comp, cum_w_.size() - 1);
      for (int a = 0; a < d; a++)
        out[i * d + a] = gm_.means[comp * d + a] +
                         gm_.stds[comp * d + a] * rng.normal();
    }
  });
}

double DataModel::nll(std::span<const double> xs, int64_t n,
                      double* std_error) const {
  if (n < 1) throw std::invalid_argument("nll needs at least one point");
  if (static_cast<int64_t>(xs.size()) != n * gm_.d)
    throw std::invalid_argument("sample buffer size does not match n*d");
  int d = gm_.d;
  const int64_t chunk = 8192;
  int64_t n_chunks = (n + chunk - 1) / chunk;
  std::vector<double> sums(n_chunks, 0.0), sqs(n_chunks, 0.0);
  parallel_for(n, chunk, [&](int64_t lo, int64_t hi) {
    double s = 0, q = 0;
    for (int64_t i = lo; i < hi; i++) {
      double lp = noised_log_density(xs.subspan(i * d, d), 0.0);
      s += lp;
      q += lp * lp;
    }
    sums[lo / chunk] = s;
    sqs[lo / chunk] = q;
  });
  double s = 0, q = 0;
  for (int64_t c = 0; c < n_chunks; c++) {
    s += sums[c];
    q += sqs[c];
  }
  double mean = s / n;
  if (std_error) {
    double var = n > 1 ? std::max(0.0, (q - n * mean * mean) / (n - 1)) : 0.0;
    *std_error = std::sqrt(var / n);
  }
  return -mean;
}

void DataModel::axis_moments(std::span<double> mean_out,
                             std::span<double> std_out) const {
  int k = gm_.components(), d = gm_.d;
  if (static_cast<int>(mean_out.size()) != d ||
      static_cast<int>(std_out.size()) != d)
    throw std::invalid_argument("moment buffer dimension mismatch");
  for (int a = 0; a < d; a++) {
    double m = 0, m2 = 0;
    for (int i = 0; i < k; i++) {
      double mu = gm_.means[i * d + a];
      double sd = gm_.stds[i * d + a];
      m += gm_.weights[i] * mu;
      m2 += gm_.weights[i] * (sd * sd + mu * mu);
    }
    mean_out[a] = m;
    std_out[a] = std::sqrt(std::max(0.0, m2 - m * m));
  }
}

DataModel DataModel::from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("model JSON parse error: ") + e.what());
  }
  try {
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "gaussian") {
      return isotropic_gaussian(j.at("c").get<double>(), j.value("d", 1));
    }
    if (kind == "grid") {
      return grid_mixture(j.at("rows").get<int>(), j.at("cols").get<int>(),
                          j.value("spacing", 2.0), j.value("gamma", 0.1));
    }
    if (kind == "gmm") {
      GaussianMixture gm;
      gm.weights = j.at("weights").get<std::vector<double>>();
      auto means = j.at("means").get<std::vector<std::vector<double>>>();
      if (means.empty()) throw parse_error("gmm needs at least one mean");
      gm.d = static_cast<int>(means.front().size());
      for (const auto& mu : means) {
        if (static_cast<int>(mu.size()) != gm.d)
          throw parse_error("gmm means have mixed dimensions");
        gm.means.insert(gm.means.end(), mu.begin(), mu.end());
      }
      // stds: one scalar per component (isotropic), or one list per component
      const auto& js = j.at("stds");
      if (js.size() != gm.weights.size())
        throw parse_error("gmm stds length must match weights");
      for (const auto& entry : js) {
        if (entry.is_array()) {
          auto per_axis = entry.get<std::vector<double>>();
          if (static_cast<int>(per_axis.size()) != gm.d)
            throw parse_error("per-axis stds must have d entries");
          gm.stds.insert(gm.stds.end(), per_axis.begin(), per_axis.end());
        } else {
          gm.stds.insert(gm.stds.end(), gm.d, entry.get<double>());
        }
      }
      double total = 0;
      for (double w : gm.weights) total += w;
      if (!(total > 0)) throw parse_error("gmm weights must be positive");
      for (double& w : gm.weights) w /= total;
      return mixture(std::move(gm));
    }
    throw parse_error("unknown model kind: " + kind);
  } catch (const nlohmann::json::exception& e) {
    throw parse_error(std::string("model JSON missing field: ") + e.what());
  }
}

DataModel DataModel::load(const std::string& path) {
  return from_json(read_text(path));
}

std::string DataModel::to_json() const {
  nlohmann::ordered_json j;
  if (gaussian_) {
    j["kind"] = "gaussian";
    j["c"] = c_;
    j["d"] = gm_.d;
  } else {
    j["kind"] = "gmm";
    j["weights"] = gm_.weights;
    int k = gm_.components(), d = gm_.d;
    std::vector<std::vector<double>> means(k);
    nlohmann::ordered_json stds = nlohmann::ordered_json::array();
    for (int i = 0; i < k; i++) {
      means[i].assign(gm_.means.begin() + i * d, gm_.means.begin() + (i + 1) * d);
      bool isotropic = true;
      for (int a = 1; a < d; a++)
        if (gm_.stds[i * d + a] != gm_.stds[i * d]) isotropic = false;
      if (isotropic)
        stds.push_back(gm_.stds[i * d]);
      else
        stds.push_back(std::vector<double>(gm_.stds.begin() + i * d,
                                           gm_.stds.begin() + (i + 1) * d));
    }
    j["means"] = means;
    j["stds"] = stds;
  }
  return j.dump(2) + "\n";
}

}  // namespace ays
