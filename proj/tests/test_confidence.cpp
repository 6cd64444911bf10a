#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "mdev/confidence.hpp"

using namespace mdev;

namespace {
Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }
}  // namespace

TEST_CASE("half-width closed forms at alpha = 0.05") {
  // sqrt(2 |ln 0.025|) = 2.7162..., x_{0.025} = 1.9600...
  CHECK(md_half_width(1.0, 1, 0.05) == doctest::Approx(2.71620).epsilon(1e-5));
  CHECK(normal_half_width(1.0, 1, 0.05) == doctest::Approx(1.95996).epsilon(1e-5));
  CHECK(md_half_width(1.0, 1, 0.10) == doctest::Approx(2.44775).epsilon(1e-5));
  CHECK(normal_half_width(1.0, 1, 0.10) == doctest::Approx(1.64485).epsilon(1e-5));
  CHECK(md_half_width(1.0, 1, 0.01) == doctest::Approx(3.25525).epsilon(1e-5));
  CHECK(normal_half_width(1.0, 1, 0.01) == doctest::Approx(2.57583).epsilon(1e-5));
}

TEST_CASE("half-widths scale as sigma / sqrt(n)") {
  for (auto f : {md_half_width, normal_half_width}) {
    CHECK(f(2.0, 100, 0.05) == doctest::Approx(2.0 * f(1.0, 100, 0.05)).epsilon(1e-13));
    CHECK(f(1.0, 400, 0.05) == doctest::Approx(0.5 * f(1.0, 100, 0.05)).epsilon(1e-13));
  }
}

TEST_CASE("md interval always dominates the normal interval") {
  for (double alpha = 0.001; alpha < 0.5; alpha += 0.013) {
    CHECK(md_half_width(1.0, 50, alpha) > normal_half_width(1.0, 50, alpha));
    CHECK(sample_size_ratio(alpha) > 1.0);
  }
  // the gap narrows as alpha -> 0
  CHECK(sample_size_ratio(1e-8) < sample_size_ratio(0.05));
}

TEST_CASE("sample size ratio at standard levels") {
  double r = sample_size_ratio(0.05);
  CHECK(r == doctest::Approx(std::pow(2.71620 / 1.95996, 2)).epsilon(1e-4));
  CHECK(r > 1.9);
  CHECK(r < 2.0);
}

TEST_CASE("argument validation") {
  CHECK_THROWS_AS(md_half_width(0.0, 10, 0.05), std::domain_error);
  CHECK_THROWS_AS(md_half_width(1.0, 0, 0.05), std::domain_error);
  CHECK_THROWS_AS(normal_half_width(1.0, 10, 0.0), std::domain_error);
  CHECK_THROWS_AS(normal_half_width(1.0, 10, 1.0), std::domain_error);
}

TEST_CASE("coverage simulation: nominal behavior for the gaussian mean") {
  ParametricFamily f = ParametricFamily::gaussian_location(1.0);
  CoverageResult normal = coverage_sim(f, scalar(0.0), 50, 0.05,
                                       IntervalMethod::normal, 20000,
                                       RngStream(51, 0));
  // the normal interval for a gaussian mean is exact at every n
  CHECK(std::fabs(normal.coverage - 0.95) < 4.0 * normal.std_error);

  CoverageResult md = coverage_sim(f, scalar(0.0), 50, 0.05,
                                   IntervalMethod::moderate_deviation, 20000,
                                   RngStream(51, 0));
  // wider interval, strictly higher coverage
  CHECK(md.coverage > normal.coverage);
  CHECK(md.coverage > 0.99);
}

TEST_CASE("coverage simulation on a non-gaussian family") {
  ParametricFamily f = ParametricFamily::bernoulli();
  CoverageResult md = coverage_sim(f, scalar(0.4), 200, 0.05,
                                   IntervalMethod::moderate_deviation, 5000,
                                   RngStream(52, 0));
  CHECK(md.coverage >= 0.95);  // conservative by construction
  CHECK(md.n_trials == 5000);
}

TEST_CASE("coverage simulation is deterministic in the stream key") {
  ParametricFamily f = ParametricFamily::gaussian_location(1.0);
  CoverageResult a = coverage_sim(f, scalar(0.0), 20, 0.1,
                                  IntervalMethod::normal, 4000, RngStream(9, 0));
  CoverageResult b = coverage_sim(f, scalar(0.0), 20, 0.1,
                                  IntervalMethod::normal, 4000, RngStream(9, 0));
  CHECK(a.coverage == b.coverage);
}
