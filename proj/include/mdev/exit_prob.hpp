#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdev/convex.hpp"
#include "mdev/numerics.hpp"
#include "mdev/rng.hpp"

namespace mdev {

enum class ExitMethod { exact, asymptotic, mc, is };

std::string to_string(ExitMethod m);

// A probability P(zeta outside tOmega) with provenance. value saturates
// to 0 below ~1e-300; log_value stays finite.
struct ExitProbEstimate {
  double value = 0.0;
  double log_value = -std::numeric_limits<double>::infinity();
  ExitMethod method = ExitMethod::exact;
  double std_error = 0.0;  // 0 for exact/asymptotic
  long long n_samples = 0;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> warnings;
  double prefactor = 0.0;  // C_k for the ellipsoid asymptotic
};

// Exact ball exit probability: chi-squared upper tail at (t r)^2.
ExitProbEstimate exit_ball_exact(int d, double t, double r);

// 2^{1-d/2} Gamma(d/2)^{-1} (t r)^{d-2} exp(-(t r)^2 / 2); a warning is
// attached below the regime guard t r >= 3 (identity at d = 2).
ExitProbEstimate exit_ball_asymptotic(int d, double t, double r,
                                      double regime_guard = 3.0);

// Ellipsoid tail asymptotic with leading-axis multiplicity k. The body
// is normalized so the largest axis weight is 1; the effective distance
// is r / sigma_1.
ExitProbEstimate exit_ellipsoid_asymptotic(const Eigen::VectorXd& sigma,
                                           double r, double t,
                                           double regime_guard = 3.0);

// Plain Monte Carlo over standard Gaussian draws. Deterministic given
// the stream key; chunked so results do not depend on thread count.
ExitProbEstimate exit_mc(const ConvexBody& body, double t,
                         long long n_samples, const RngStream& stream);

// Importance sampling with the mean shifted to the dominating boundary
// points: 50/50 antipodal mixture when the nearest set is a pair,
// per-sample uniform direction on the attaining sphere otherwise.
ExitProbEstimate exit_is(const ConvexBody& body, double t,
                         long long n_samples, const RngStream& stream);

}  // namespace mdev
