#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mdev/convex.hpp"
#include "mdev/exit_prob.hpp"
#include "mdev/families.hpp"

namespace mdev {

// b_n = c * n^{-gamma}, gamma strictly inside (0, 1/2)
struct BnRule {
  double c = 1.0;
  double gamma = 0.4;
  double bn(long long n) const { return c * std::pow(double(n), -gamma); }
};

struct ExperimentConfig {
  ParametricFamily family = ParametricFamily::gaussian_location(1.0);
  EstimatorKind estimator = EstimatorKind::sample_mean;
  Eigen::VectorXd theta0;
  ConvexBody body = ConvexBody::ball(1, 1.0);
  BnRule bn_rule;
  std::vector<long long> n_grid;
  double cn_c0 = 1.0;  // C_n = c0 sqrt(ln n)
  int theta_grid_points = 5;
  long long n_trials = 100000;
  bool use_is = false;
  bool prefer_enumeration = true;  // exact binomial engine for bernoulli
  std::uint64_t master_seed = 0;

  // throws on hard violations, returns soft warnings
  std::vector<std::string> validate() const;
  double cn(long long n) const { return cn_c0 * std::sqrt(std::log(double(n))); }
};

struct SweepRow {
  long long n = 0;
  double b_n = 0.0;
  Eigen::VectorXd theta;
  ExitProbEstimate numerator;
  ExitProbEstimate denominator;
  double ratio = 0.0;
  double ratio_std_error = 0.0;
  bool failed = false;
  std::string error;
};

struct SweepSummary {
  long long n = 0;
  double b_n = 0.0;
  double sup_ratio = 0.0;           // sup over the theta grid
  double sup_ratio_std_error = 0.0;
  bool consistent_with_bound = false;  // sup >= 1 - 3 se
};

struct ExperimentReport {
  std::vector<SweepRow> rows;
  std::vector<SweepSummary> summaries;
  std::uint64_t master_seed = 0;
  std::string config_hash;
  double runtime_seconds = 0.0;
};

// Denominator of the efficiency ratio: P(zeta outside sqrt(n) b_n Omega).
// Exact for balls, asymptotic with an importance-sampling cross-check
// for ellipsoids, importance sampling for generic bodies.
ExitProbEstimate denominator(const ConvexBody& body, long long n, double b_n);

// Numerator P_theta(I^{1/2}(theta0)(est - theta) outside b_n Omega),
// by direct Monte Carlo over trials; exact binomial enumeration for the
// bernoulli family; tilted sampling for sample means when use_is is set.
using PluginEstimator =
    std::function<Eigen::VectorXd(const std::vector<Eigen::VectorXd>&)>;

ExitProbEstimate numerator(const ParametricFamily& family,
                           EstimatorKind estimator,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& theta0, long long n,
                           double b_n, const ConvexBody& body,
                           long long n_trials, bool use_is,
                           bool prefer_enumeration, const RngStream& stream,
                           const PluginEstimator& plugin = nullptr);

// Exact numerator by summing the binomial pmf (bernoulli family).
ExitProbEstimate numerator_binomial_enumeration(double theta, double theta0,
                                                long long n, double b_n,
                                                const ConvexBody& body);

ExperimentReport efficiency_sweep(const ExperimentConfig& config);

struct BahadurResult {
  double normalized_log = 0.0;  // (n b_n^2 / 2)^{-1} ln P(|est - theta| > b_n)
  double bound = 0.0;           // -I(theta0)
  double slack = 0.0;
  ExitMethod method = ExitMethod::mc;
  bool consistent = false;  // normalized_log >= bound - 0.5, soft check
};

BahadurResult bahadur_log_bound(const ParametricFamily& family,
                                const Eigen::VectorXd& theta0,
                                EstimatorKind estimator, long long n,
                                double b_n, long long n_trials,
                                const RngStream& stream);

}  // namespace mdev
