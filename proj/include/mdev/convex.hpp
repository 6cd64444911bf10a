#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mdev/rng.hpp"

namespace mdev {

// Points of the boundary nearest the origin; these dominate the exit
// probability and give the importance-sampling shift directions.
struct BoundaryPointSet {
  double min_distance = 0.0;
  std::vector<Eigen::VectorXd> representative_points;  // closed under negation
  // 0 for an isolated antipodal pair, k-1 when a (k-1)-sphere attains
  // the minimum (k = multiplicity of the largest axis weight).
  int component_dimension = 0;
  // subspace spanned by the attaining sphere (first k coordinates for an
  // ellipsoid, everything for a ball); empty when component_dimension = 0
  int attaining_subspace_dim = 0;
};

enum class CheckResult { pass, fail, unknown };

struct BodyAssumptionReport {
  CheckResult b1 = CheckResult::unknown;  // central symmetry
  CheckResult b2 = CheckResult::unknown;  // C^2 boundary
  CheckResult b3 = CheckResult::unknown;  // strictly convex boundary
  double curvature_lo = 0.0;  // principal curvature magnitudes
  double curvature_hi = 0.0;
  bool convex_orientation = true;
};

// Central-symmetric convex body: open ball, open ellipsoid
// {x : sum sigma_i^2 x_i^2 < r^2}, or a generic body given by a
// membership oracle plus a support-function oracle. Immutable.
class ConvexBody {
 public:
  enum class Kind { ball, ellipsoid, generic };

  using MembershipFn = std::function<bool(const Eigen::VectorXd&)>;
  using SupportFn = std::function<double(const Eigen::VectorXd&)>;

  static ConvexBody ball(int dim, double r);
  // sigma sorted descending, all positive
  static ConvexBody ellipsoid(const Eigen::VectorXd& sigma, double r);
  static ConvexBody generic(int dim, MembershipFn member, SupportFn support);

  Kind kind() const { return kind_; }
  int dim() const { return dim_; }
  double radius() const { return r_; }                   // ball/ellipsoid
  const Eigen::VectorXd& sigma() const { return sigma_; }  // ellipsoid

  bool contains(const Eigen::VectorXd& x) const;
  ConvexBody scaled(double t) const;

  BoundaryPointSet nearest_boundary() const;
  BodyAssumptionReport validate_b_assumptions(std::uint64_t probe_seed = 7) const;

 private:
  ConvexBody() = default;

  Kind kind_ = Kind::ball;
  int dim_ = 0;
  double r_ = 1.0;            // level for ball/ellipsoid
  Eigen::VectorXd sigma_;     // ellipsoid axis weights, descending
  MembershipFn member_;       // generic
  SupportFn support_;         // generic
  double scale_ = 1.0;        // accumulated scale for generic bodies
};

}  // namespace mdev
