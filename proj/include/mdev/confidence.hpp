#pragma once

#include "mdev/families.hpp"
#include "mdev/rng.hpp"

namespace mdev {

enum class IntervalMethod { moderate_deviation, normal };

std::string to_string(IntervalMethod m);

struct IntervalSpec {
  double center = 0.0;
  double half_width = 0.0;
  double alpha = 0.05;
  IntervalMethod method = IntervalMethod::normal;
};

// sigma sqrt(2 |ln(alpha/2)|) / sqrt(n)
double md_half_width(double sigma, long long n, double alpha);

// x_{alpha/2} sigma / sqrt(n)
double normal_half_width(double sigma, long long n, double alpha);

// (md / normal)^2 at equal n: the factor by which n must grow for the
// log-asymptotic interval to match the normal one in width.
double sample_size_ratio(double alpha);

struct CoverageResult {
  double coverage = 0.0;
  double std_error = 0.0;
  long long n_trials = 0;
};

// Fraction of trials in which the interval around the family MLE covers
// the true parameter; sigma is plugged in from the family at theta.
CoverageResult coverage_sim(const ParametricFamily& family,
                            const Eigen::VectorXd& theta, long long n,
                            double alpha, IntervalMethod method,
                            long long n_trials, const RngStream& stream);

}  // namespace mdev
