#include "mdev/convex.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace mdev {

ConvexBody ConvexBody::ball(int dim, double r) {
  if (dim < 1 || dim > 16) throw std::domain_error("ConvexBody: 1 <= dim <= 16");
  if (!(r > 0.0)) throw std::domain_error("ConvexBody: radius must be positive");
  ConvexBody b;
  b.kind_ = Kind::ball;
  b.dim_ = dim;
  b.r_ = r;
  return b;
}

ConvexBody ConvexBody::ellipsoid(const Eigen::VectorXd& sigma, double r) {
  const int d = static_cast<int>(sigma.size());
  if (d < 1 || d > 16) throw std::domain_error("ConvexBody: 1 <= dim <= 16");
  if (!(r > 0.0)) throw std::domain_error("ConvexBody: level must be positive");
  for (int i = 0; i < d; ++i) {
    if (!(sigma[i] > 0.0))
      throw std::domain_error("ConvexBody: axis weights must be positive");
    if (i > 0 && sigma[i] > sigma[i - 1])
      throw std::domain_error("ConvexBody: axis weights must be sorted descending");
  }
  ConvexBody b;
  b.kind_ = Kind::ellipsoid;
  b.dim_ = d;
  b.r_ = r;
  b.sigma_ = sigma;
  return b;
}

ConvexBody ConvexBody::generic(int dim, MembershipFn member, SupportFn support) {
  if (dim < 1 || dim > 16) throw std::domain_error("ConvexBody: 1 <= dim <= 16");
  if (!member || !support)
    throw std::domain_error("ConvexBody: generic kind needs both oracles");
  ConvexBody b;
  b.kind_ = Kind::generic;
  b.dim_ = dim;
  b.member_ = std::move(member);
  b.support_ = std::move(support);
  return b;
}

bool ConvexBody::contains(const Eigen::VectorXd& x) const {
  if (static_cast<int>(x.size()) != dim_)
    throw std::invalid_argument("ConvexBody::contains: dimension mismatch");
  switch (kind_) {
    case Kind::ball:
      return x.norm() < r_;
    case Kind::ellipsoid: {
      double s = 0.0;
      for (int i = 0; i < dim_; ++i) s += sigma_[i] * sigma_[i] * x[i] * x[i];
      return s < r_ * r_;
    }
    case Kind::generic:
      return member_(x / scale_);
  }
  return false;
}

ConvexBody ConvexBody::scaled(double t) const {
  if (!(t > 0.0)) throw std::domain_error("ConvexBody::scaled: requires t > 0");
  ConvexBody b = *this;
  switch (kind_) {
    case Kind::ball:
    case Kind::ellipsoid:
      b.r_ = r_ * t;
      break;
    case Kind::generic:
      b.scale_ = scale_ * t;
      break;
  }
  return b;
}

namespace {

// k = multiplicity of sigma_1 at relative tolerance 1e-9
int leading_multiplicity(const Eigen::VectorXd& sigma) {
  int k = 1;
  while (k < sigma.size() &&
         sigma[0] - sigma[k] <= 1e-9 * sigma[0])
    ++k;
  return k;
}

}  // namespace

BoundaryPointSet ConvexBody::nearest_boundary() const {
  BoundaryPointSet out;
  switch (kind_) {
    case Kind::ball: {
      out.min_distance = r_;
      out.component_dimension = dim_ - 1;
      out.attaining_subspace_dim = dim_;
      Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
      e[0] = r_;
      out.representative_points.push_back(e);
      out.representative_points.push_back(-e);
      return out;
    }
    case Kind::ellipsoid: {
      int k = leading_multiplicity(sigma_);
      out.min_distance = r_ / sigma_[0];
      out.component_dimension = k - 1;
      out.attaining_subspace_dim = k;
      for (int i = 0; i < k; ++i) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(dim_);
        e[i] = out.min_distance;
        out.representative_points.push_back(e);
        out.representative_points.push_back(-e);
      }
      return out;
    }
    case Kind::generic:
      break;
  }

  // generic: scan random directions, bisect membership along each ray
  if (!contains(Eigen::VectorXd::Zero(dim_)))
    throw std::domain_error("nearest_boundary: body must contain the origin");
  RngStream rng(0x6f9a1d2cULL, 0);
  const int n_dirs = 2000;
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_dir;
  for (int i = 0; i < n_dirs; ++i) {
    Eigen::VectorXd u = rng.unit_vector(dim_);
    // bracket: grow until outside
    double hi = 1.0;
    int grow = 0;
    while (contains(hi * u)) {
      hi *= 2.0;
      if (++grow > 120)
        throw std::domain_error("nearest_boundary: body appears unbounded");
    }
    double lo = hi * 0.5 > 0.0 && contains(0.5 * hi * u) ? 0.5 * hi : 0.0;
    while (hi - lo > 1e-10 * (1.0 + hi)) {
      double mid = 0.5 * (lo + hi);
      (contains(mid * u) ? lo : hi) = mid;
    }
    double dist = 0.5 * (lo + hi);
    if (dist < best) {
      best = dist;
      best_dir = u;
    }
  }
  out.min_distance = best;
  out.component_dimension = 0;
  out.attaining_subspace_dim = 0;
  out.representative_points.push_back(best * best_dir);
  out.representative_points.push_back(-best * best_dir);
  return out;
}

BodyAssumptionReport ConvexBody::validate_b_assumptions(std::uint64_t probe_seed) const {
  BodyAssumptionReport rep;

  // B1: randomized symmetry probing
  RngStream rng(probe_seed, 0);
  double probe_radius;
  switch (kind_) {
    case Kind::ball:
      probe_radius = 2.0 * r_;
      break;
    case Kind::ellipsoid:
      probe_radius = 2.0 * r_ / sigma_.minCoeff();
      break;
    default:
      probe_radius = 4.0 * nearest_boundary().min_distance;
      break;
  }
  rep.b1 = CheckResult::pass;
  for (int i = 0; i < 10000; ++i) {
    Eigen::VectorXd x = probe_radius * rng.normal_vector(dim_) / std::sqrt(double(dim_));
    if (contains(x) != contains(-x)) {
      rep.b1 = CheckResult::fail;
      break;
    }
  }

  switch (kind_) {
    case Kind::ball:
      rep.b2 = CheckResult::pass;
      rep.b3 = CheckResult::pass;
      rep.curvature_lo = rep.curvature_hi = 1.0 / r_;
      break;
    case Kind::ellipsoid: {
      rep.b2 = CheckResult::pass;
      rep.b3 = CheckResult::pass;
      // semi-axes a_i = r / sigma_i; curvature magnitudes of an ellipsoid
      // lie in [a_min / a_max^2, a_max / a_min^2]
      double a_min = r_ / sigma_.maxCoeff();
      double a_max = r_ / sigma_.minCoeff();
      rep.curvature_lo = a_min / (a_max * a_max);
      rep.curvature_hi = a_max / (a_min * a_min);
      break;
    }
    case Kind::generic:
      rep.b2 = CheckResult::unknown;
      rep.b3 = CheckResult::unknown;
      break;
  }
  return rep;
}

}  // namespace mdev
