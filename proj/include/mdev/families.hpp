#pragma once

#include <Eigen/Dense>
#include <functional>
#include <string>
#include <vector>

#include "mdev/numerics.hpp"
#include "mdev/rng.hpp"
#include "mdev/tilting.hpp"

namespace mdev {

enum class FamilyKind {
  gaussian_location,
  gaussian_mean_vector,
  bernoulli,
  exponential_rate,
  custom
};

enum class EstimatorKind { sample_mean, mle, plugin };

// An i.i.d. parametric model: density, sampler, score, Fisher
// information, plus the smoothness exponent gating the A2 residual
// checks. Built-ins carry exact closed forms throughout.
class ParametricFamily {
 public:
  static ParametricFamily gaussian_location(double sigma2);
  static ParametricFamily gaussian_mean_vector(const Eigen::MatrixXd& cov);
  static ParametricFamily bernoulli();
  static ParametricFamily exponential_rate();

  struct CustomSpec {
    int param_dim = 1;
    int sample_dim = 1;
    double lambda = 1.0;
    Eigen::VectorXd theta_lo, theta_hi;
    std::function<double(const Eigen::VectorXd&, const Eigen::VectorXd&)> log_density;
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, RngStream&)> sampler;
    // optional; numeric fallbacks are used when absent
    std::function<Eigen::VectorXd(const Eigen::VectorXd&, const Eigen::VectorXd&)> score;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> fisher;
  };
  static ParametricFamily custom(CustomSpec spec);

  FamilyKind kind() const { return kind_; }
  int param_dim() const { return param_dim_; }
  int sample_dim() const { return sample_dim_; }
  double lambda() const { return lambda_; }
  bool discrete() const { return kind_ == FamilyKind::bernoulli; }
  const Eigen::VectorXd& theta_lo() const { return theta_lo_; }
  const Eigen::VectorXd& theta_hi() const { return theta_hi_; }
  bool in_domain(const Eigen::VectorXd& theta) const;

  double log_density(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const;
  Eigen::VectorXd sample(const Eigen::VectorXd& theta, RngStream& rng) const;
  Eigen::VectorXd score(const Eigen::VectorXd& x, const Eigen::VectorXd& theta) const;
  SpdMatrix fisher(const Eigen::VectorXd& theta) const;

  // standard deviation of a single observation (scalar families)
  double obs_sd(const Eigen::VectorXd& theta) const;

  // centered per-observation distribution, used to tilt sample means
  TiltableDistribution centered_observation(const Eigen::VectorXd& theta) const;
  bool tiltable() const;

  // support atoms (discrete) or an integration range covering the bulk
  // of the density for quadrature checks
  std::vector<Eigen::VectorXd> support_atoms(const Eigen::VectorXd& theta) const;
  std::pair<double, double> integration_range(const Eigen::VectorXd& theta) const;

 private:
  ParametricFamily() = default;

  FamilyKind kind_ = FamilyKind::custom;
  int param_dim_ = 1;
  int sample_dim_ = 1;
  double lambda_ = 1.0;
  Eigen::VectorXd theta_lo_, theta_hi_;
  double sigma2_ = 1.0;           // gaussian_location
  Eigen::MatrixXd cov_, cov_inv_, cov_chol_;  // gaussian_mean_vector
  CustomSpec custom_;
};

// Hellinger distance rho(theta1, theta2); closed form for built-ins.
double hellinger(const ParametricFamily& family, const Eigen::VectorXd& theta1,
                 const Eigen::VectorXd& theta2);

// Quadrature/summation evaluation of the same distance, kept independent
// of the closed forms so the two can cross-check each other.
double hellinger_numeric(const ParametricFamily& family,
                         const Eigen::VectorXd& theta1,
                         const Eigen::VectorXd& theta2, double rel_tol = 1e-8);

struct A2Row {
  Eigen::VectorXd u;
  double res_21;  // E[(g - u'phi/2)^2]
  double res_22;  // |4 rho^2 - u'Iu|
  double res_24;  // positive part of h'I(theta)h - h'I(theta+u)h, worst h
  double singular_mass;
};

struct A2Report {
  double c21 = 0.0, c22 = 0.0, c23 = 0.0, c24 = 0.0;
  bool pass = false;
  double singular_mass = 0.0;
  std::vector<A2Row> rows;
};

// Empirical verification of the four A2 inequalities on a u-grid.
A2Report check_a2(const ParametricFamily& family, const Eigen::VectorXd& theta0,
                  const std::vector<Eigen::VectorXd>& u_grid);

struct MleResult {
  Eigen::VectorXd theta;
  bool clipped = false;
  int iterations = 0;
};

MleResult mle(const ParametricFamily& family,
              const std::vector<Eigen::VectorXd>& samples);

}  // namespace mdev
