#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace mdev {

// ln Gamma(x), x > 0. Lanczos, ~1e-14 relative on [0.5, 100].
double log_gamma(double x);

// Standard normal CDF and its inverse.
double normal_cdf(double x);
double normal_quantile(double p);

struct TailProb {
  double value;      // saturates to 0 below ~1e-300
  double log_value;  // stays finite far into the tail
};

// P(chi^2_d > u), computed via the regularized incomplete gamma
// Q(d/2, u/2); log_value is usable down to u ~ 1e6 and beyond.
TailProb chisq_upper_tail_full(int d, double u);
double chisq_upper_tail(int d, double u);

// Regularized upper incomplete gamma Q(a, x), with log.
TailProb gamma_q(double a, double x);

// ln E[exp(z u_1)] for u uniform on the unit sphere S^{k-1}, z >= 0:
// the normalizing factor of a sphere-mixture importance-sampling law.
// Equals ln(Gamma(k/2) (2/z)^{k/2-1} I_{k/2-1}(z)); asymptotic branch
// above z ~ 500 keeps it finite to arbitrary z.
double log_sphere_mgf(int k, double z);

// Symmetric positive definite matrix with validated construction.
// Dimension is small (d <= 16) throughout.
class SpdMatrix {
 public:
  // Validates symmetry (1e-12 relative) and positive definiteness
  // (Cholesky succeeds); throws std::domain_error otherwise.
  explicit SpdMatrix(const Eigen::MatrixXd& m);

  static SpdMatrix identity(int d) {
    return SpdMatrix(Eigen::MatrixXd::Identity(d, d));
  }

  int dim() const { return static_cast<int>(mat_.rows()); }
  const Eigen::MatrixXd& matrix() const { return mat_; }

 private:
  Eigen::MatrixXd mat_;
};

// Lower-triangular Cholesky factor. On failure throws std::domain_error
// naming the failing pivot index.
Eigen::MatrixXd cholesky(const Eigen::MatrixXd& m);

SpdMatrix spd_sqrt(const SpdMatrix& m);
SpdMatrix spd_inverse(const SpdMatrix& m);

}  // namespace mdev
