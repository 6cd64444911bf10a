#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mdev/tilting.hpp"

using namespace mdev;

namespace {

TiltableDistribution rademacher() {
  std::vector<std::pair<Eigen::VectorXd, double>> atoms;
  atoms.emplace_back(Eigen::VectorXd::Constant(1, 1.0), 0.5);
  atoms.emplace_back(Eigen::VectorXd::Constant(1, -1.0), 0.5);
  return TiltableDistribution::bounded_discrete(std::move(atoms));
}

}  // namespace

TEST_CASE("construction centers the distribution") {
  std::vector<std::pair<Eigen::VectorXd, double>> atoms;
  atoms.emplace_back(Eigen::VectorXd::Constant(1, 0.0), 0.7);
  atoms.emplace_back(Eigen::VectorXd::Constant(1, 1.0), 0.3);
  TiltableDistribution d = TiltableDistribution::bounded_discrete(std::move(atoms));
  Eigen::VectorXd zero = Eigen::VectorXd::Zero(1);
  CHECK(d.tilted_mean(zero)[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(d.mgf(zero) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(d.base_cov()(0, 0) == doctest::Approx(0.21).epsilon(1e-12));  // p(1-p)

  TiltableDistribution g = TiltableDistribution::gaussian(
      Eigen::VectorXd::Constant(2, 3.0), Eigen::MatrixXd::Identity(2, 2));
  CHECK(g.tilted_mean(Eigen::VectorXd::Zero(2)).norm() == 0.0);
}

TEST_CASE("gaussian tilt has the closed-form solution h = cov^{-1} v") {
  Eigen::MatrixXd cov(2, 2);
  cov << 2.0, 0.5, 0.5, 1.0;
  TiltableDistribution g =
      TiltableDistribution::gaussian(Eigen::VectorXd::Zero(2), cov);
  Eigen::Vector2d v(0.7, -0.3);
  TiltSolution s = g.solve_tilt(v);
  Eigen::VectorXd h_exact = cov.llt().solve(v);
  CHECK((s.h - h_exact).norm() < 1e-10);
  // rate = v' cov^{-1} v / 2 for the gaussian
  CHECK(s.rate == doctest::Approx(0.5 * v.dot(h_exact)).epsilon(1e-10));
  CHECK(s.lambda_signed() == doctest::Approx(-s.rate).epsilon(1e-14));
  CHECK((s.tilted_cov - cov).norm() < 1e-12);
}

TEST_CASE("two-point tilt against the bisection oracle") {
  // m(h) = tanh(h) for the centered two-point distribution on {-1, +1},
  // so the tilt solving m(h) = v is atanh(v). Solve it here by plain
  // bisection to keep the oracle independent of the Newton path.
  TiltableDistribution d = rademacher();
  for (double v : {0.1, 0.4, 0.8}) {
    double lo = 0.0, hi = 10.0;
    while (hi - lo > 1e-14) {
      double mid = 0.5 * (lo + hi);
      (std::tanh(mid) < v ? lo : hi) = mid;
    }
    double h_oracle = 0.5 * (lo + hi);
    TiltSolution s = d.solve_tilt(Eigen::VectorXd::Constant(1, v));
    CHECK(s.h[0] == doctest::Approx(h_oracle).epsilon(1e-9));
    CHECK(s.h[0] == doctest::Approx(std::atanh(v)).epsilon(1e-9));
    CHECK(s.phi == doctest::Approx(std::cosh(s.h[0])).epsilon(1e-10));
    // tilted variance of the two-point distribution: 1 - tanh^2 = sech^2
    double sech = 1.0 / std::cosh(s.h[0]);
    CHECK(s.tilted_cov(0, 0) == doctest::Approx(sech * sech).epsilon(1e-9));
    CHECK(s.rate >= 0.0);
  }
}

TEST_CASE("rate matches the two-point Legendre transform") {
  // for v in (0,1): rate = h v - ln cosh h at h = atanh(v)
  TiltableDistribution d = rademacher();
  double v = 0.6;
  TiltSolution s = d.solve_tilt(Eigen::VectorXd::Constant(1, v));
  double h = std::atanh(v);
  CHECK(s.rate == doctest::Approx(h * v - std::log(std::cosh(h))).epsilon(1e-10));
}

TEST_CASE("tilted_cov is the Jacobian of tilted_mean") {
  std::vector<std::pair<Eigen::VectorXd, double>> atoms;
  atoms.emplace_back(Eigen::Vector2d(1.0, 0.0), 0.25);
  atoms.emplace_back(Eigen::Vector2d(-1.0, 0.5), 0.35);
  atoms.emplace_back(Eigen::Vector2d(0.2, -0.7), 0.40);
  TiltableDistribution d = TiltableDistribution::bounded_discrete(std::move(atoms));
  Eigen::Vector2d h(0.3, -0.2);
  Eigen::MatrixXd cov = d.tilted_cov(h);
  const double eps = 1e-6;
  for (int j = 0; j < 2; ++j) {
    Eigen::VectorXd hp = h, hm = h;
    hp[j] += eps;
    hm[j] -= eps;
    Eigen::VectorXd col = (d.tilted_mean(hp) - d.tilted_mean(hm)) / (2 * eps);
    for (int i = 0; i < 2; ++i)
      CHECK(cov(i, j) == doctest::Approx(col[i]).epsilon(1e-5));
  }
}

TEST_CASE("bounded density: uniform on [-1, 1] has mgf sinh(h)/h") {
  TiltableDistribution d = TiltableDistribution::bounded_density(
      Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0),
      [](const Eigen::VectorXd&) { return 1.0; });
  for (double h : {0.5, 1.0, 2.0}) {
    Eigen::VectorXd hv = Eigen::VectorXd::Constant(1, h);
    CHECK(d.mgf(hv) == doctest::Approx(std::sinh(h) / h).epsilon(1e-7));
    // tilted mean coth(h) - 1/h
    CHECK(d.tilted_mean(hv)[0] ==
          doctest::Approx(1.0 / std::tanh(h) - 1.0 / h).epsilon(1e-7));
  }
  TiltSolution s = d.solve_tilt(Eigen::VectorXd::Constant(1, 0.3));
  CHECK(d.tilted_mean(s.h)[0] == doctest::Approx(0.3).epsilon(1e-8));
}

TEST_CASE("solve_tilt rejects targets outside the support hull") {
  TiltableDistribution d = rademacher();
  CHECK_THROWS_AS(d.solve_tilt(Eigen::VectorXd::Constant(1, 1.0)),
                  std::domain_error);
  CHECK_THROWS_AS(d.solve_tilt(Eigen::VectorXd::Constant(1, 1.5)),
                  std::domain_error);
  CHECK_NOTHROW(d.solve_tilt(Eigen::VectorXd::Constant(1, 0.99)));
}

TEST_CASE("solve_tilt handles targets deep in the tail") {
  TiltableDistribution d = rademacher();
  TiltSolution s = d.solve_tilt(Eigen::VectorXd::Constant(1, 0.9999));
  CHECK(s.h[0] == doctest::Approx(std::atanh(0.9999)).epsilon(1e-6));
}

TEST_CASE("tilted samples have the tilted mean and self-normalizing weights") {
  TiltableDistribution d = rademacher();
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 0.8);
  auto samples = d.sample_tilted(h, 100000, RngStream(31, 0));
  REQUIRE(samples.size() == 100000);
  double mean = 0.0, wmean = 0.0;
  for (const auto& s : samples) {
    mean += s.x[0];
    wmean += std::exp(s.log_weight);
  }
  mean /= samples.size();
  wmean /= samples.size();
  CHECK(mean == doctest::Approx(std::tanh(0.8)).epsilon(0.01));
  // E_h[phi e^{-h'X}] = 1: importance weights are unbiased for the base law
  CHECK(wmean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("gaussian tilted sampling shifts the mean without touching the covariance") {
  Eigen::MatrixXd cov(2, 2);
  cov << 1.0, 0.3, 0.3, 0.5;
  TiltableDistribution g =
      TiltableDistribution::gaussian(Eigen::VectorXd::Zero(2), cov);
  Eigen::Vector2d h(1.0, -0.5);
  auto samples = g.sample_tilted(h, 200000, RngStream(77, 0));
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& s : samples) mean += s.x;
  mean /= double(samples.size());
  Eigen::Vector2d expect = cov * h;
  CHECK((mean - expect).norm() < 0.02);
  Eigen::Matrix2d emp = Eigen::Matrix2d::Zero();
  for (const auto& s : samples) {
    Eigen::Vector2d u = s.x - mean;
    emp += u * u.transpose();
  }
  emp /= double(samples.size());
  CHECK((emp - cov).norm() < 0.02);
}

TEST_CASE("bounded density rejection sampling matches the tilted law") {
  TiltableDistribution d = TiltableDistribution::bounded_density(
      Eigen::VectorXd::Constant(1, -1.0), Eigen::VectorXd::Constant(1, 1.0),
      [](const Eigen::VectorXd&) { return 1.0; });
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 1.5);
  auto samples = d.sample_tilted(h, 50000, RngStream(13, 0));
  double mean = 0.0;
  for (const auto& s : samples) mean += s.x[0];
  mean /= samples.size();
  CHECK(mean == doctest::Approx(d.tilted_mean(h)[0]).epsilon(0.05));
}

TEST_CASE("sampling is deterministic in the stream key") {
  TiltableDistribution d = rademacher();
  Eigen::VectorXd h = Eigen::VectorXd::Constant(1, 0.4);
  auto a = d.sample_tilted(h, 1000, RngStream(3, 9));
  auto b = d.sample_tilted(h, 1000, RngStream(3, 9));
  for (std::size_t i = 0; i < a.size(); ++i) REQUIRE(a[i].x == b[i].x);
}
