#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "core/models.hpp"

using namespace ays;

namespace {

double normal_logpdf(double x, double mu, double var) {
  return -0.5 * std::log(2 * std::numbers::pi * var) -
         0.5 * (x - mu) * (x - mu) / var;
}

}  // namespace

TEST_CASE("isotropic gaussian density and denoiser") {
  DataModel m = DataModel::isotropic_gaussian(0.5, 3);
  CHECK(m.dim() == 3);
  CHECK(m.is_gaussian());
  CHECK(m.gaussian_c() == 0.5);

  std::vector<double> x{0.3, -1.2, 0.7};
  double sigma = 2.0;
  double var = 0.25 + 4.0;
  double want = 0;
  for (double v : x) want += normal_logpdf(v, 0.0, var);
  CHECK(m.noised_log_density(x, sigma) == doctest::Approx(want).epsilon(1e-12));
  // sigma = 0 gives the data density itself
  double want0 = 0;
  for (double v : x) want0 += normal_logpdf(v, 0.0, 0.25);
  CHECK(m.noised_log_density(x, 0.0) == doctest::Approx(want0).epsilon(1e-12));

  std::vector<double> den(3);
  m.ideal_denoiser(x, sigma, den);
  for (int i = 0; i < 3; i++)
    CHECK(den[i] == doctest::Approx(0.25 / var * x[i]).epsilon(1e-13));
  CHECK_THROWS(m.ideal_denoiser(x, 0.0, den));
}

TEST_CASE("two-component mixture matches hand computation") {
  GaussianMixture gm;
  gm.d = 1;
  gm.weights = {0.25, 0.75};
  gm.means = {-2.0, 1.0};
  gm.stds = {0.5, 0.2};
  DataModel m = DataModel::mixture(gm);
  CHECK_FALSE(m.is_gaussian());

  double x = 0.4, sigma = 0.8;
  double v0 = 0.25 + 0.64, v1 = 0.04 + 0.64;
  double p = 0.25 * std::exp(normal_logpdf(x, -2.0, v0)) +
             0.75 * std::exp(normal_logpdf(x, 1.0, v1));
  std::vector<double> xv{x};
  CHECK(m.noised_log_density(xv, sigma) ==
        doctest::Approx(std::log(p)).epsilon(1e-12));

  // posterior mean: responsibility-weighted shrinkage toward each center
  double r0 = 0.25 * std::exp(normal_logpdf(x, -2.0, v0)) / p;
  double r1 = 1.0 - r0;
  double post0 = (0.25 * x + 0.64 * -2.0) / v0;
  double post1 = (0.04 * x + 0.64 * 1.0) / v1;
  std::vector<double> den(1);
  m.ideal_denoiser(xv, sigma, den);
  CHECK(den[0] == doctest::Approx(r0 * post0 + r1 * post1).epsilon(1e-12));

  // the denoiser closure is the same function
  DenoiserFn f = m.denoiser();
  std::vector<double> den2(1);
  f(xv, sigma, den2);
  CHECK(den2[0] == den[0]);
}

TEST_CASE("denoiser approaches the prior mean at large noise") {
  GaussianMixture gm;
  gm.d = 1;
  gm.weights = {0.5, 0.5};
  gm.means = {-1.0, 3.0};
  gm.stds = {0.3, 0.3};
  DataModel m = DataModel::mixture(gm);
  std::vector<double> x{0.2}, den(1);
  m.ideal_denoiser(x, 1e5, den);
  CHECK(den[0] == doctest::Approx(1.0).epsilon(1e-3));
  // and the posterior collapses to the data point at tiny noise
  std::vector<double> near{2.996};
  m.ideal_denoiser(near, 1e-4, den);
  CHECK(den[0] == doctest::Approx(2.996).epsilon(1e-4));
}

TEST_CASE("grid mixture is standardized per axis") {
  for (auto [rows, cols] : {std::pair{8, 8}, std::pair{2, 8}, std::pair{3, 1}}) {
    CAPTURE(rows);
    CAPTURE(cols);
    DataModel m = DataModel::grid_mixture(rows, cols);
    CHECK(m.dim() == 2);
    CHECK(m.components().components() == rows * cols);
    std::vector<double> mean(2), sd(2);
    m.axis_moments(mean, sd);
    CHECK(mean[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(mean[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(sd[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sd[1] == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("grid mixture centers stay on a scaled lattice") {
  DataModel m = DataModel::grid_mixture(2, 2);
  const GaussianMixture& gm = m.components();
  REQUIRE(gm.components() == 4);
  // 2x2 grid: all centers at (+-s0, +-s1) for per-axis scales s
  double s0 = std::abs(gm.means[0]), s1 = std::abs(gm.means[1]);
  for (int k = 0; k < 4; k++) {
    CHECK(std::abs(gm.means[2 * k]) == doctest::Approx(s0).epsilon(1e-12));
    CHECK(std::abs(gm.means[2 * k + 1]) == doctest::Approx(s1).epsilon(1e-12));
  }
  for (double w : gm.weights) CHECK(w == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("sampling is deterministic and matches the model moments") {
  DataModel m = DataModel::grid_mixture(8, 8);
  const int64_t n = 200000;
  std::vector<double> xs(2 * n), ys(2 * n);
  m.sample(n, 42, xs);
  m.sample(n, 42, ys);
  CHECK(xs == ys);
  m.sample(n, 43, ys);
  CHECK(xs != ys);

  double m0 = 0, m1 = 0, v0 = 0, v1 = 0;
  for (int64_t i = 0; i < n; i++) {
    m0 += xs[2 * i];
    m1 += xs[2 * i + 1];
    v0 += xs[2 * i] * xs[2 * i];
    v1 += xs[2 * i + 1] * xs[2 * i + 1];
  }
  m0 /= n;
  m1 /= n;
  CHECK(std::abs(m0) < 0.01);
  CHECK(std::abs(m1) < 0.01);
  CHECK(v0 / n == doctest::Approx(1.0).epsilon(0.02));
  CHECK(v1 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("nll of model samples estimates the entropy") {
  DataModel m = DataModel::isotropic_gaussian(1.0, 2);
  const int64_t n = 100000;
  std::vector<double> xs(2 * n);
  m.sample(n, 7, xs);
  double se = 0;
  double nll = m.nll(xs, n, &se);
  double entropy = 0.5 * 2 * std::log(2 * std::numbers::pi * std::numbers::e);
  CHECK(se > 0);
  CHECK(se < 0.01);
  CHECK(std::abs(nll - entropy) < 4 * se);
}

TEST_CASE("json round trip for each kind") {
  DataModel g = DataModel::isotropic_gaussian(0.7, 4);
  DataModel g2 = DataModel::from_json(g.to_json());
  CHECK(g2.is_gaussian());
  CHECK(g2.gaussian_c() == 0.7);
  CHECK(g2.dim() == 4);

  DataModel grid = DataModel::grid_mixture(2, 8);
  DataModel grid2 = DataModel::from_json(grid.to_json());
  CHECK(grid2.dim() == 2);
  CHECK(grid2.components().weights == grid.components().weights);
  CHECK(grid2.components().means == grid.components().means);
  CHECK(grid2.components().stds == grid.components().stds);

  DataModel byname = DataModel::from_json(
      "{\"kind\":\"grid\",\"rows\":2,\"cols\":8}");
  CHECK(byname.components().means == grid.components().means);

  DataModel gmm = DataModel::from_json(
      "{\"kind\":\"gmm\",\"weights\":[1,3],\"means\":[[0,0],[1,2]],"
      "\"stds\":[0.5,[0.2,0.3]]}");
  CHECK(gmm.dim() == 2);
  CHECK(gmm.components().weights[0] == doctest::Approx(0.25));
  CHECK(gmm.components().stds ==
        std::vector<double>{0.5, 0.5, 0.2, 0.3});
}

TEST_CASE("json rejects malformed models") {
  CHECK_THROWS(DataModel::from_json("nope"));
  CHECK_THROWS(DataModel::from_json("{\"kind\":\"what\"}"));
  CHECK_THROWS(DataModel::from_json("{\"kind\":\"gaussian\"}"));
  CHECK_THROWS(DataModel::from_json(
      "{\"kind\":\"gmm\",\"weights\":[1],\"means\":[[0],[1]],\"stds\":[1,1]}"));
  CHECK_THROWS(DataModel::from_json(
      "{\"kind\":\"gmm\",\"weights\":[1,1],\"means\":[[0],[1,2]],\"stds\":[1,1]}"));
  CHECK_THROWS(DataModel::isotropic_gaussian(-1.0, 2));
  CHECK_THROWS(DataModel::grid_mixture(0, 5));
}
