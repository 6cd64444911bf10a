#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "mdev/numerics.hpp"
#include "mdev/rng.hpp"

namespace mdev {

struct TiltSolution {
  Eigen::VectorXd v;       // target mean
  Eigen::VectorXd h;       // tilt solving m(h) = v
  double phi = 1.0;        // mgf at h
  Eigen::MatrixXd tilted_cov;
  double rate = 0.0;       // Legendre value (h, v) - ln phi(h), >= 0
  int iterations = 0;

  // the tail-exponent quantity with the opposite sign convention
  double lambda_signed() const { return -rate; }
};

struct WeightedSample {
  Eigen::VectorXd x;
  double log_weight;  // ln phi(h) - h'x
};

// A centered distribution that can be exponentially tilted:
// dF_h proportional to exp(h'x) dF. The construction subtracts the mean,
// so E[X] = 0 always holds.
class TiltableDistribution {
 public:
  enum class Kind { gaussian, bounded_discrete, bounded_density };

  using DensityFn = std::function<double(const Eigen::VectorXd&)>;
  using SamplerFn = std::function<Eigen::VectorXd(RngStream&)>;

  static TiltableDistribution gaussian(const Eigen::VectorXd& mean,
                                       const Eigen::MatrixXd& cov);
  static TiltableDistribution bounded_discrete(
      std::vector<std::pair<Eigen::VectorXd, double>> atoms);
  // density on the box [lo, hi] (unnormalized is fine); the sampler is
  // optional, rejection from the uniform box is used when absent
  static TiltableDistribution bounded_density(const Eigen::VectorXd& lo,
                                              const Eigen::VectorXd& hi,
                                              DensityFn density,
                                              SamplerFn sampler = nullptr);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double support_radius() const { return support_radius_; }  // inf for gaussian
  const Eigen::MatrixXd& base_cov() const { return base_cov_; }

  double mgf(const Eigen::VectorXd& h) const;
  double log_mgf(const Eigen::VectorXd& h) const;
  Eigen::VectorXd tilted_mean(const Eigen::VectorXd& h) const;
  Eigen::MatrixXd tilted_cov(const Eigen::VectorXd& h) const;

  // Damped Newton on m(h) = v, initialized at h0 = v.
  TiltSolution solve_tilt(const Eigen::VectorXd& v) const;

  std::vector<WeightedSample> sample_tilted(const Eigen::VectorXd& h, long long n,
                                            const RngStream& stream) const;

 private:
  TiltableDistribution() = default;
  void check_dim(const Eigen::VectorXd& h) const;
  bool inside_support_hull(const Eigen::VectorXd& v) const;

  Kind kind_ = Kind::gaussian;
  int dim_ = 0;
  double support_radius_ = std::numeric_limits<double>::infinity();

  Eigen::MatrixXd base_cov_;
  Eigen::MatrixXd cov_chol_;  // gaussian kind

  std::vector<std::pair<Eigen::VectorXd, double>> atoms_;  // centered

  Eigen::VectorXd box_lo_, box_hi_;  // centered box
  DensityFn density_;
  SamplerFn sampler_;
  Eigen::VectorXd shift_;  // original mean, subtracted at construction
  double density_sup_ = 0.0;
  double norm_const_ = 1.0;  // integral of the raw density over the box
};

}  // namespace mdev
