#include "mdev/families.hpp"

#include <cmath>
#include <stdexcept>

#include "mdev/quadrature.hpp"

namespace mdev {

namespace {
constexpr double kDomainMargin = 1e-6;
}

ParametricFamily ParametricFamily::gaussian_location(double sigma2) {
  if (!(sigma2 > 0.0))
    throw std::domain_error("gaussian_location: sigma2 must be positive");
  ParametricFamily f;
  f.kind_ = FamilyKind::gaussian_location;
  f.param_dim_ = f.sample_dim_ = 1;
  f.sigma2_ = sigma2;
  f.theta_lo_ = Eigen::VectorXd::Constant(1, -1e6);
  f.theta_hi_ = Eigen::VectorXd::Constant(1, 1e6);
  return f;
}

ParametricFamily ParametricFamily::gaussian_mean_vector(const Eigen::MatrixXd& cov) {
  ParametricFamily f;
  f.kind_ = FamilyKind::gaussian_mean_vector;
  f.param_dim_ = f.sample_dim_ = static_cast<int>(cov.rows());
  SpdMatrix spd(cov);
  f.cov_ = spd.matrix();
  f.cov_inv_ = spd_inverse(spd).matrix();
  f.cov_chol_ = cholesky(f.cov_);
  f.theta_lo_ = Eigen::VectorXd::Constant(f.param_dim_, -1e6);
  f.theta_hi_ = Eigen::VectorXd::Constant(f.param_dim_, 1e6);
  return f;
}

ParametricFamily ParametricFamily::bernoulli() {
  ParametricFamily f;
  f.kind_ = FamilyKind::bernoulli;
  f.param_dim_ = f.sample_dim_ = 1;
  f.theta_lo_ = Eigen::VectorXd::Constant(1, kDomainMargin);
  f.theta_hi_ = Eigen::VectorXd::Constant(1, 1.0 - kDomainMargin);
  return f;
}

ParametricFamily ParametricFamily::exponential_rate() {
  ParametricFamily f;
  f.kind_ = FamilyKind::exponential_rate;
  f.param_dim_ = f.sample_dim_ = 1;
  f.theta_lo_ = Eigen::VectorXd::Constant(1, kDomainMargin);
  f.theta_hi_ = Eigen::VectorXd::Constant(1, 1e6);
  return f;
}

ParametricFamily ParametricFamily::custom(CustomSpec spec) {
  if (!spec.log_density || !spec.sampler)
    throw std::domain_error("custom family: log_density and sampler are required");
  if (!(spec.lambda > 0.0 && spec.lambda <= 1.0))
    throw std::domain_error("custom family: lambda must lie in (0, 1]");
  ParametricFamily f;
  f.kind_ = FamilyKind::custom;
  f.param_dim_ = spec.param_dim;
  f.sample_dim_ = spec.sample_dim;
  f.lambda_ = spec.lambda;
  f.theta_lo_ = spec.theta_lo;
  f.theta_hi_ = spec.theta_hi;
  f.custom_ = std::move(spec);
  return f;
}

bool ParametricFamily::in_domain(const Eigen::VectorXd& theta) const {
  if (static_cast<int>(theta.size()) != param_dim_) return false;
  for (int i = 0; i < param_dim_; ++i)
    if (!(theta[i] >= theta_lo_[i] && theta[i] <= theta_hi_[i])) return false;
  return true;
}

double ParametricFamily::log_density(const Eigen::VectorXd& x,
                                     const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location: {
      double r = x[0] - theta[0];
      return -0.5 * r * r / sigma2_ - 0.5 * std::log(2.0 * M_PI * sigma2_);
    }
    case FamilyKind::gaussian_mean_vector: {
      Eigen::VectorXd r = x - theta;
      double logdet = 0.0;
      for (int i = 0; i < param_dim_; ++i)
        logdet += 2.0 * std::log(cov_chol_(i, i));
      return -0.5 * r.dot(cov_inv_ * r) -
             0.5 * (param_dim_ * std::log(2.0 * M_PI) + logdet);
    }
    case FamilyKind::bernoulli:
      return x[0] > 0.5 ? std::log(theta[0]) : std::log1p(-theta[0]);
    case FamilyKind::exponential_rate:
      if (x[0] < 0.0) return -std::numeric_limits<double>::infinity();
      return std::log(theta[0]) - theta[0] * x[0];
    case FamilyKind::custom:
      return custom_.log_density(x, theta);
  }
  return 0.0;
}

Eigen::VectorXd ParametricFamily::sample(const Eigen::VectorXd& theta,
                                         RngStream& rng) const {
  switch (kind_) {
    case FamilyKind::gaussian_location:
      return Eigen::VectorXd::Constant(1, theta[0] + std::sqrt(sigma2_) * rng.normal());
    case FamilyKind::gaussian_mean_vector:
      return theta + cov_chol_ * rng.normal_vector(param_dim_);
    case FamilyKind::bernoulli:
      return Eigen::VectorXd::Constant(1, rng.uniform() < theta[0] ? 1.0 : 0.0);
    case FamilyKind::exponential_rate:
      return Eigen::VectorXd::Constant(1, -std::log(rng.uniform()) / theta[0]);
    case FamilyKind::custom:
      return custom_.sampler(theta, rng);
  }
  return Eigen::VectorXd();
}

Eigen::VectorXd ParametricFamily::score(const Eigen::VectorXd& x,
                                        const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location:
      return Eigen::VectorXd::Constant(1, (x[0] - theta[0]) / sigma2_);
    case FamilyKind::gaussian_mean_vector:
      return cov_inv_ * (x - theta);
    case FamilyKind::bernoulli: {
      double p = theta[0];
      return Eigen::VectorXd::Constant(1, (x[0] - p) / (p * (1.0 - p)));
    }
    case FamilyKind::exponential_rate:
      return Eigen::VectorXd::Constant(1, 1.0 / theta[0] - x[0]);
    case FamilyKind::custom: {
      if (custom_.score) return custom_.score(x, theta);
      // central differences of ln f
      Eigen::VectorXd s(param_dim_);
      for (int i = 0; i < param_dim_; ++i) {
        double step = 1e-6 * (1.0 + std::fabs(theta[i]));
        Eigen::VectorXd tp = theta, tm = theta;
        tp[i] += step;
        tm[i] -= step;
        s[i] = (custom_.log_density(x, tp) - custom_.log_density(x, tm)) /
               (2.0 * step);
      }
      return s;
    }
  }
  return Eigen::VectorXd();
}

SpdMatrix ParametricFamily::fisher(const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location:
      return SpdMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0 / sigma2_));
    case FamilyKind::gaussian_mean_vector:
      return SpdMatrix(cov_inv_);
    case FamilyKind::bernoulli: {
      double p = theta[0];
      return SpdMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0 / (p * (1.0 - p))));
    }
    case FamilyKind::exponential_rate:
      return SpdMatrix(Eigen::MatrixXd::Constant(1, 1, 1.0 / (theta[0] * theta[0])));
    case FamilyKind::custom: {
      if (custom_.fisher) return SpdMatrix(custom_.fisher(theta));
      // Monte Carlo covariance of the score, fixed internal stream
      RngStream rng(0xf15e4ULL, 0);
      const int n = 100000;
      Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(param_dim_, param_dim_);
      for (int i = 0; i < n; ++i) {
        Eigen::VectorXd s = score(sample(theta, rng), theta);
        acc += s * s.transpose();
      }
      return SpdMatrix(acc / double(n));
    }
  }
  return SpdMatrix::identity(param_dim_);
}

double ParametricFamily::obs_sd(const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location:
      return std::sqrt(sigma2_);
    case FamilyKind::gaussian_mean_vector:
      if (param_dim_ == 1) return std::sqrt(cov_(0, 0));
      throw std::domain_error("obs_sd: scalar families only");
    case FamilyKind::bernoulli:
      return std::sqrt(theta[0] * (1.0 - theta[0]));
    case FamilyKind::exponential_rate:
      return 1.0 / theta[0];
    case FamilyKind::custom:
      throw std::domain_error("obs_sd: not available for custom families");
  }
  return 1.0;
}

bool ParametricFamily::tiltable() const {
  return kind_ == FamilyKind::gaussian_location ||
         kind_ == FamilyKind::gaussian_mean_vector ||
         kind_ == FamilyKind::bernoulli;
}

TiltableDistribution ParametricFamily::centered_observation(
    const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location:
      return TiltableDistribution::gaussian(
          Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Constant(1, 1, sigma2_));
    case FamilyKind::gaussian_mean_vector:
      return TiltableDistribution::gaussian(Eigen::VectorXd::Zero(param_dim_),
                                            cov_);
    case FamilyKind::bernoulli: {
      double p = theta[0];
      std::vector<std::pair<Eigen::VectorXd, double>> atoms;
      atoms.emplace_back(Eigen::VectorXd::Constant(1, 0.0), 1.0 - p);
      atoms.emplace_back(Eigen::VectorXd::Constant(1, 1.0), p);
      return TiltableDistribution::bounded_discrete(std::move(atoms));
    }
    default:
      throw std::domain_error(
          "centered_observation: family has no bounded/gaussian tilt form");
  }
}

std::vector<Eigen::VectorXd> ParametricFamily::support_atoms(
    const Eigen::VectorXd&) const {
  if (kind_ != FamilyKind::bernoulli)
    throw std::domain_error("support_atoms: discrete families only");
  return {Eigen::VectorXd::Constant(1, 0.0), Eigen::VectorXd::Constant(1, 1.0)};
}

std::pair<double, double> ParametricFamily::integration_range(
    const Eigen::VectorXd& theta) const {
  switch (kind_) {
    case FamilyKind::gaussian_location: {
      double s = std::sqrt(sigma2_);
      return {theta[0] - 12.0 * s, theta[0] + 12.0 * s};
    }
    case FamilyKind::exponential_rate:
      return {0.0, 60.0 / theta[0]};
    case FamilyKind::gaussian_mean_vector:
      if (param_dim_ == 1) {
        double s = std::sqrt(cov_(0, 0));
        return {theta[0] - 12.0 * s, theta[0] + 12.0 * s};
      }
      [[fallthrough]];
    default:
      throw std::domain_error("integration_range: scalar continuous families only");
  }
}

double hellinger(const ParametricFamily& family, const Eigen::VectorXd& theta1,
                 const Eigen::VectorXd& theta2) {
  if (!family.in_domain(theta1) || !family.in_domain(theta2))
    throw std::domain_error("hellinger: parameters outside the domain");
  double rho2;
  switch (family.kind()) {
    case FamilyKind::gaussian_location: {
      double u = theta2[0] - theta1[0];
      double sigma2 = 1.0 / family.fisher(theta1).matrix()(0, 0);
      rho2 = 2.0 * (1.0 - std::exp(-u * u / (8.0 * sigma2)));
      break;
    }
    case FamilyKind::gaussian_mean_vector: {
      Eigen::VectorXd u = theta2 - theta1;
      double q = u.dot(family.fisher(theta1).matrix() * u);
      rho2 = 2.0 * (1.0 - std::exp(-q / 8.0));
      break;
    }
    case FamilyKind::bernoulli: {
      double p1 = theta1[0], p2 = theta2[0];
      double bc = std::sqrt(p1 * p2) + std::sqrt((1.0 - p1) * (1.0 - p2));
      rho2 = 2.0 - 2.0 * bc;
      break;
    }
    case FamilyKind::exponential_rate: {
      double a = theta1[0], b = theta2[0];
      double bc = 2.0 * std::sqrt(a * b) / (a + b);
      rho2 = 2.0 - 2.0 * bc;
      break;
    }
    case FamilyKind::custom:
      return hellinger_numeric(family, theta1, theta2);
  }
  return std::sqrt(std::max(0.0, rho2));
}

double hellinger_numeric(const ParametricFamily& family,
                         const Eigen::VectorXd& theta1,
                         const Eigen::VectorXd& theta2, double rel_tol) {
  if (family.discrete()) {
    double rho2 = 0.0;
    for (const auto& x : family.support_atoms(theta1)) {
      double a = std::exp(0.5 * family.log_density(x, theta1));
      double b = std::exp(0.5 * family.log_density(x, theta2));
      rho2 += (a - b) * (a - b);
    }
    return std::sqrt(rho2);
  }
  if (family.sample_dim() != 1)
    throw std::domain_error("hellinger_numeric: scalar sample space only");
  auto [lo1, hi1] = family.integration_range(theta1);
  auto [lo2, hi2] = family.integration_range(theta2);
  double lo = std::min(lo1, lo2), hi = std::max(hi1, hi2);
  double rho2 = adaptive_interval_quad(
      lo, hi,
      [&](double x) {
        Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
        double a = std::exp(0.5 * family.log_density(xv, theta1));
        double b = std::exp(0.5 * family.log_density(xv, theta2));
        return (a - b) * (a - b);
      },
      rel_tol);
  return std::sqrt(std::max(0.0, rho2));
}

namespace {

// E_theta[(g - u'phi/2)^2] with g = sqrt(f(.,theta+u)/f(.,theta)) - 1
double a2_residual_21(const ParametricFamily& family,
                      const Eigen::VectorXd& theta, const Eigen::VectorXd& u) {
  auto integrand = [&](const Eigen::VectorXd& x) {
    double lf = family.log_density(x, theta);
    double lfu = family.log_density(x, theta + u);
    double g = std::exp(0.5 * (lfu - lf)) - 1.0;
    double lin = 0.5 * u.dot(family.score(x, theta));
    double r = g - lin;
    return r * r;
  };
  if (family.discrete()) {
    double s = 0.0;
    for (const auto& x : family.support_atoms(theta))
      s += std::exp(family.log_density(x, theta)) * integrand(x);
    return s;
  }
  auto [lo1, hi1] = family.integration_range(theta);
  auto [lo2, hi2] = family.integration_range(theta + u);
  double lo = std::min(lo1, lo2), hi = std::max(hi1, hi2);
  return adaptive_interval_quad(lo, hi, [&](double x) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    return std::exp(family.log_density(xv, theta)) * integrand(xv);
  });
}

// E_theta |phi|^{2+lambda}
double a2_moment_23(const ParametricFamily& family, const Eigen::VectorXd& theta) {
  double e = 2.0 + family.lambda();
  if (family.discrete()) {
    double s = 0.0;
    for (const auto& x : family.support_atoms(theta))
      s += std::exp(family.log_density(x, theta)) *
           std::pow(family.score(x, theta).norm(), e);
    return s;
  }
  auto [lo, hi] = family.integration_range(theta);
  auto integrand = [&](double x) {
    Eigen::VectorXd xv = Eigen::VectorXd::Constant(1, x);
    return std::exp(family.log_density(xv, theta)) *
           std::pow(family.score(xv, theta).norm(), e);
  };
  // |score|^{2+lambda} has a kink where the score crosses zero; splitting
  // the interval there restores spectral quadrature convergence
  auto score1 = [&](double x) {
    return family.score(Eigen::VectorXd::Constant(1, x), theta)[0];
  };
  double a = lo, b = hi;
  if (score1(a) * score1(b) < 0.0) {
    while (b - a > 1e-12 * (1.0 + std::fabs(b))) {
      double mid = 0.5 * (a + b);
      (score1(a) * score1(mid) <= 0.0 ? b : a) = mid;
    }
    double c = 0.5 * (a + b);
    return adaptive_interval_quad(lo, c, integrand) +
           adaptive_interval_quad(c, hi, integrand);
  }
  return adaptive_interval_quad(lo, hi, integrand);
}

}  // namespace

A2Report check_a2(const ParametricFamily& family, const Eigen::VectorXd& theta0,
                  const std::vector<Eigen::VectorXd>& u_grid) {
  A2Report rep;
  const double lam = family.lambda();
  Eigen::MatrixXd info0 = family.fisher(theta0).matrix();
  rep.c23 = a2_moment_23(family, theta0);

  double ratio21_ref = 0.0, ratio22_ref = 0.0;
  double best_ref_gap = std::numeric_limits<double>::infinity();
  std::vector<double> ratios21, ratios22;

  for (const auto& u : u_grid) {
    if (!family.in_domain(theta0 + u))
      throw std::domain_error("check_a2: u_grid leaves the parameter domain");
    A2Row row;
    row.u = u;
    row.res_21 = a2_residual_21(family, theta0, u);
    double rho = hellinger(family, theta0, theta0 + u);
    row.res_22 = std::fabs(4.0 * rho * rho - u.dot(info0 * u));
    Eigen::MatrixXd diff = info0 - family.fisher(theta0 + u).matrix();
    if (family.param_dim() == 1) {
      row.res_24 = std::max(0.0, diff(0, 0));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(diff);
      row.res_24 = std::max(0.0, es.eigenvalues().maxCoeff());
    }
    row.singular_mass = 0.0;  // built-ins share one support
    rep.rows.push_back(row);

    double un = u.norm();
    double r21 = row.res_21 / std::pow(un, 2.0 + lam);
    double r22 = row.res_22 / std::pow(un, 2.0 + lam);
    ratios21.push_back(r21);
    ratios22.push_back(r22);
    rep.c21 = std::max(rep.c21, r21);
    rep.c22 = std::max(rep.c22, r22);
    rep.c24 = std::max(rep.c24, row.res_24 / std::pow(un, lam));
    double gap = std::fabs(un - 0.1);
    if (gap < best_ref_gap) {
      best_ref_gap = gap;
      ratio21_ref = r21;
      ratio22_ref = r22;
    }
  }

  // pass = finite fitted constants and no blow-up of the residual ratios
  // as u -> 0 relative to the reference point |u| ~ 0.1
  bool finite = std::isfinite(rep.c21) && std::isfinite(rep.c22) &&
                std::isfinite(rep.c23) && std::isfinite(rep.c24);
  bool bounded = true;
  for (std::size_t i = 0; i < ratios21.size(); ++i) {
    if (ratios21[i] > 10.0 * ratio21_ref + 1e-9) bounded = false;
    if (ratios22[i] > 10.0 * ratio22_ref + 1e-9) bounded = false;
  }
  rep.pass = finite && bounded;
  return rep;
}

MleResult mle(const ParametricFamily& family,
              const std::vector<Eigen::VectorXd>& samples) {
  if (samples.empty()) throw std::domain_error("mle: samples must be nonempty");
  MleResult res;
  const auto clip1 = [&](double v) {
    double lo = family.theta_lo()[0], hi = family.theta_hi()[0];
    if (v < lo) {
      res.clipped = true;
      return lo;
    }
    if (v > hi) {
      res.clipped = true;
      return hi;
    }
    return v;
  };
  switch (family.kind()) {
    case FamilyKind::gaussian_location:
    case FamilyKind::gaussian_mean_vector: {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(family.param_dim());
      for (const auto& x : samples) m += x;
      res.theta = m / double(samples.size());
      return res;
    }
    case FamilyKind::bernoulli: {
      double s = 0.0;
      for (const auto& x : samples) s += x[0];
      res.theta = Eigen::VectorXd::Constant(1, clip1(s / double(samples.size())));
      return res;
    }
    case FamilyKind::exponential_rate: {
      double s = 0.0;
      for (const auto& x : samples) s += x[0];
      double mean = s / double(samples.size());
      res.theta = Eigen::VectorXd::Constant(
          1, clip1(mean > 0.0 ? 1.0 / mean : family.theta_hi()[0]));
      return res;
    }
    case FamilyKind::custom:
      break;
  }
  // Newton on the score equation with n I(theta) as curvature
  Eigen::VectorXd theta = 0.5 * (family.theta_lo() + family.theta_hi());
  const double n = double(samples.size());
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd total = Eigen::VectorXd::Zero(family.param_dim());
    for (const auto& x : samples) total += family.score(x, theta);
    if (total.norm() <= 1e-10 * n) {
      res.theta = theta;
      res.iterations = it;
      return res;
    }
    Eigen::MatrixXd curv = n * family.fisher(theta).matrix();
    theta += Eigen::LLT<Eigen::MatrixXd>(curv).solve(total);
    for (int i = 0; i < family.param_dim(); ++i)
      theta[i] = std::clamp(theta[i], family.theta_lo()[i], family.theta_hi()[i]);
  }
  throw std::runtime_error("mle: Newton did not converge");
}

}  // namespace mdev
