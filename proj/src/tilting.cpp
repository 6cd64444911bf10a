#include "mdev/tilting.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "mdev/quadrature.hpp"

namespace mdev {

TiltableDistribution TiltableDistribution::gaussian(const Eigen::VectorXd& mean,
                                                    const Eigen::MatrixXd& cov) {
  TiltableDistribution t;
  t.kind_ = Kind::gaussian;
  t.dim_ = static_cast<int>(mean.size());
  t.shift_ = mean;
  t.base_cov_ = SpdMatrix(cov).matrix();
  t.cov_chol_ = cholesky(t.base_cov_);
  return t;
}

TiltableDistribution TiltableDistribution::bounded_discrete(
    std::vector<std::pair<Eigen::VectorXd, double>> atoms) {
  if (atoms.empty()) throw std::domain_error("bounded_discrete: needs atoms");
  TiltableDistribution t;
  t.kind_ = Kind::bounded_discrete;
  t.dim_ = static_cast<int>(atoms.front().first.size());
  double total = 0.0;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(t.dim_);
  for (const auto& [x, p] : atoms) {
    if (!(p >= 0.0)) throw std::domain_error("bounded_discrete: negative probability");
    total += p;
    mean += p * x;
  }
  if (!(total > 0.0)) throw std::domain_error("bounded_discrete: zero total mass");
  mean /= total;
  t.shift_ = mean;
  t.support_radius_ = 0.0;
  for (auto& [x, p] : atoms) {
    x -= mean;
    p /= total;
    t.support_radius_ = std::max(t.support_radius_, x.norm());
  }
  t.atoms_ = std::move(atoms);
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(t.dim_, t.dim_);
  for (const auto& [x, p] : t.atoms_) cov += p * x * x.transpose();
  t.base_cov_ = cov;
  return t;
}

TiltableDistribution TiltableDistribution::bounded_density(
    const Eigen::VectorXd& lo, const Eigen::VectorXd& hi, DensityFn density,
    SamplerFn sampler) {
  if (lo.size() != hi.size() || !density)
    throw std::domain_error("bounded_density: bad box or density");
  TiltableDistribution t;
  t.kind_ = Kind::bounded_density;
  t.dim_ = static_cast<int>(lo.size());
  t.norm_const_ = adaptive_box_quad(lo, hi, density);
  Eigen::VectorXd mean(t.dim_);
  for (int i = 0; i < t.dim_; ++i)
    mean[i] = adaptive_box_quad(lo, hi, [&](const Eigen::VectorXd& x) {
      return x[i] * density(x);
    }) / t.norm_const_;
  t.shift_ = mean;
  t.box_lo_ = lo - mean;
  t.box_hi_ = hi - mean;
  t.density_ = [density, mean](const Eigen::VectorXd& y) {
    return density(y + mean);
  };
  t.sampler_ = sampler
                   ? SamplerFn([sampler, mean](RngStream& rng) {
                       return Eigen::VectorXd(sampler(rng) - mean);
                     })
                   : nullptr;
  t.support_radius_ = std::max(t.box_lo_.norm(), t.box_hi_.norm());
  // crude sup of the centered density, for rejection sampling
  {
    RngStream probe(0x5eedULL, 0);
    double sup = 0.0;
    for (int i = 0; i < 20000; ++i) {
      Eigen::VectorXd y(t.dim_);
      for (int j = 0; j < t.dim_; ++j)
        y[j] = probe.uniform(t.box_lo_[j], t.box_hi_[j]);
      sup = std::max(sup, t.density_(y));
    }
    t.density_sup_ = 1.2 * sup;
  }
  Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(t.dim_, t.dim_);
  for (int i = 0; i < t.dim_; ++i)
    for (int j = i; j < t.dim_; ++j) {
      double c = adaptive_box_quad(t.box_lo_, t.box_hi_,
                                   [&](const Eigen::VectorXd& y) {
                                     return y[i] * y[j] * t.density_(y);
                                   }) / t.norm_const_;
      cov(i, j) = cov(j, i) = c;
    }
  t.base_cov_ = cov;
  return t;
}

void TiltableDistribution::check_dim(const Eigen::VectorXd& h) const {
  if (static_cast<int>(h.size()) != dim_)
    throw std::invalid_argument("TiltableDistribution: dimension mismatch");
}

double TiltableDistribution::log_mgf(const Eigen::VectorXd& h) const {
  check_dim(h);
  switch (kind_) {
    case Kind::gaussian:
      return 0.5 * h.dot(base_cov_ * h);
    case Kind::bounded_discrete: {
      // stabilized log-sum-exp over atoms
      double mx = -std::numeric_limits<double>::infinity();
      for (const auto& [x, p] : atoms_)
        if (p > 0.0) mx = std::max(mx, h.dot(x));
      double s = 0.0;
      for (const auto& [x, p] : atoms_) s += p * std::exp(h.dot(x) - mx);
      return mx + std::log(s);
    }
    case Kind::bounded_density: {
      double v = adaptive_box_quad(box_lo_, box_hi_,
                                   [&](const Eigen::VectorXd& y) {
                                     return std::exp(h.dot(y)) * density_(y);
                                   }) / norm_const_;
      return std::log(v);
    }
  }
  return 0.0;
}

double TiltableDistribution::mgf(const Eigen::VectorXd& h) const {
  return std::exp(log_mgf(h));
}

Eigen::VectorXd TiltableDistribution::tilted_mean(const Eigen::VectorXd& h) const {
  check_dim(h);
  switch (kind_) {
    case Kind::gaussian:
      return base_cov_ * h;
    case Kind::bounded_discrete: {
      double lphi = log_mgf(h);
      Eigen::VectorXd m = Eigen::VectorXd::Zero(dim_);
      for (const auto& [x, p] : atoms_)
        m += p * std::exp(h.dot(x) - lphi) * x;
      return m;
    }
    case Kind::bounded_density: {
      double phi_raw = adaptive_box_quad(box_lo_, box_hi_,
                                         [&](const Eigen::VectorXd& y) {
                                           return std::exp(h.dot(y)) * density_(y);
                                         });
      Eigen::VectorXd m(dim_);
      for (int i = 0; i < dim_; ++i)
        m[i] = adaptive_box_quad(box_lo_, box_hi_,
                                 [&](const Eigen::VectorXd& y) {
                                   return y[i] * std::exp(h.dot(y)) * density_(y);
                                 }) / phi_raw;
      return m;
    }
  }
  return Eigen::VectorXd::Zero(dim_);
}

Eigen::MatrixXd TiltableDistribution::tilted_cov(const Eigen::VectorXd& h) const {
  check_dim(h);
  switch (kind_) {
    case Kind::gaussian:
      return base_cov_;
    case Kind::bounded_discrete: {
      double lphi = log_mgf(h);
      Eigen::VectorXd m = tilted_mean(h);
      Eigen::MatrixXd c = Eigen::MatrixXd::Zero(dim_, dim_);
      for (const auto& [x, p] : atoms_) {
        Eigen::VectorXd u = x - m;
        c += p * std::exp(h.dot(x) - lphi) * u * u.transpose();
      }
      return c;
    }
    case Kind::bounded_density: {
      double phi_raw = adaptive_box_quad(box_lo_, box_hi_,
                                         [&](const Eigen::VectorXd& y) {
                                           return std::exp(h.dot(y)) * density_(y);
                                         });
      Eigen::VectorXd m = tilted_mean(h);
      Eigen::MatrixXd c(dim_, dim_);
      for (int i = 0; i < dim_; ++i)
        for (int j = i; j < dim_; ++j) {
          double v = adaptive_box_quad(
                         box_lo_, box_hi_,
                         [&](const Eigen::VectorXd& y) {
                           return (y[i] - m[i]) * (y[j] - m[j]) *
                                  std::exp(h.dot(y)) * density_(y);
                         }) / phi_raw;
          c(i, j) = c(j, i) = v;
        }
      return c;
    }
  }
  return base_cov_;
}

bool TiltableDistribution::inside_support_hull(const Eigen::VectorXd& v) const {
  if (kind_ == Kind::gaussian) return true;
  // support function along probe directions must strictly exceed u'v
  auto support = [&](const Eigen::VectorXd& u) {
    if (kind_ == Kind::bounded_discrete) {
      double s = -std::numeric_limits<double>::infinity();
      for (const auto& [x, p] : atoms_)
        if (p > 0.0) s = std::max(s, u.dot(x));
      return s;
    }
    double s = 0.0;
    for (int i = 0; i < dim_; ++i)
      s += std::max(u[i] * box_lo_[i], u[i] * box_hi_[i]);
    return s;
  };
  std::vector<Eigen::VectorXd> dirs;
  for (int i = 0; i < dim_; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
    e[i] = 1.0;
    dirs.push_back(e);
    dirs.push_back(-e);
  }
  RngStream rng(0xd1c7ULL, 0);
  for (int i = 0; i < 100; ++i) dirs.push_back(rng.unit_vector(dim_));
  for (const auto& u : dirs) {
    double s = support(u);
    if (!(u.dot(v) < s - 1e-12 * (1.0 + std::fabs(s)))) return false;
  }
  return true;
}

TiltSolution TiltableDistribution::solve_tilt(const Eigen::VectorXd& v) const {
  check_dim(v);
  if (!inside_support_hull(v))
    throw std::domain_error("solve_tilt: v is not strictly inside the support hull");

  TiltSolution sol;
  sol.v = v;
  Eigen::VectorXd h = v;  // first-order initializer h(v) ~ v
  double tol_target = 1e-12 * (1.0 + v.norm());
  double tol_accept = 1e-10 * (1.0 + v.norm());
  Eigen::VectorXd r = tilted_mean(h) - v;
  double err = r.norm();
  int it = 0;
  std::ostringstream trace;
  for (; it < 50 && err > tol_target; ++it) {
    trace << "it " << it << " |m(h)-v| = " << err << "\n";
    Eigen::MatrixXd cov = tilted_cov(h);
    Eigen::VectorXd step = Eigen::LLT<Eigen::MatrixXd>(cov).solve(-r);
    double scale = 1.0;
    bool improved = false;
    for (int half = 0; half < 30; ++half) {
      Eigen::VectorXd h_try = h + scale * step;
      Eigen::VectorXd r_try = tilted_mean(h_try) - v;
      if (r_try.norm() < err) {
        h = h_try;
        r = r_try;
        err = r.norm();
        improved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!improved) break;
  }
  if (err > tol_accept) {
    throw std::runtime_error("solve_tilt: Newton did not converge; trace:\n" +
                             trace.str());
  }
  sol.h = h;
  sol.iterations = it;
  double lphi = log_mgf(h);
  sol.phi = std::exp(lphi);
  sol.tilted_cov = tilted_cov(h);
  sol.rate = h.dot(v) - lphi;
  return sol;
}

std::vector<WeightedSample> TiltableDistribution::sample_tilted(
    const Eigen::VectorXd& h, long long n, const RngStream& stream) const {
  check_dim(h);
  std::vector<WeightedSample> out;
  out.reserve(n);
  RngStream rng = stream;
  double lphi = log_mgf(h);
  switch (kind_) {
    case Kind::gaussian: {
      Eigen::VectorXd mu = base_cov_ * h;
      for (long long i = 0; i < n; ++i) {
        Eigen::VectorXd x = mu + cov_chol_ * rng.normal_vector(dim_);
        out.push_back({x, lphi - h.dot(x)});
      }
      break;
    }
    case Kind::bounded_discrete: {
      // tilted categorical, inverse CDF in atom order
      std::vector<double> cdf(atoms_.size());
      double acc = 0.0;
      for (std::size_t i = 0; i < atoms_.size(); ++i) {
        acc += atoms_[i].second * std::exp(h.dot(atoms_[i].first) - lphi);
        cdf[i] = acc;
      }
      for (long long i = 0; i < n; ++i) {
        double u = rng.uniform() * acc;
        std::size_t j = std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        if (j >= atoms_.size()) j = atoms_.size() - 1;
        const Eigen::VectorXd& x = atoms_[j].first;
        out.push_back({x, lphi - h.dot(x)});
      }
      break;
    }
    case Kind::bounded_density: {
      // exact rejection against the exp(h'y) factor (and the density
      // itself when falling back to the uniform-box proposal)
      double s_max = 0.0;
      for (int i = 0; i < dim_; ++i)
        s_max += std::max(h[i] * box_lo_[i], h[i] * box_hi_[i]);
      for (long long i = 0; i < n; ++i) {
        for (;;) {
          Eigen::VectorXd y(dim_);
          double log_accept;
          if (sampler_) {
            y = sampler_(rng);
            log_accept = h.dot(y) - s_max;
          } else {
            for (int j = 0; j < dim_; ++j)
              y[j] = rng.uniform(box_lo_[j], box_hi_[j]);
            double dens = density_(y);
            if (dens <= 0.0) continue;
            log_accept = std::log(dens / density_sup_) + h.dot(y) - s_max;
          }
          if (std::log(rng.uniform()) < log_accept) {
            out.push_back({y, lphi - h.dot(y)});
            break;
          }
        }
      }
      break;
    }
  }
  return out;
}

}  // namespace mdev
