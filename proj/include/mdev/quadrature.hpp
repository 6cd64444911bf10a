#pragma once

#include <Eigen/Dense>
#include <functional>

namespace mdev {

// Tensor-product Gauss-Legendre over the box [lo, hi] at a fixed order
// per axis.
double box_quad(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                const std::function<double(const Eigen::VectorXd&)>& fn,
                int order);

// Doubles the order until successive estimates agree to rel_tol;
// throws std::runtime_error on non-convergence.
double adaptive_box_quad(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         const std::function<double(const Eigen::VectorXd&)>& fn,
                         double rel_tol = 1e-8);

// 1-d convenience wrappers.
double interval_quad(double lo, double hi,
                     const std::function<double(double)>& fn, int order);
double adaptive_interval_quad(double lo, double hi,
                              const std::function<double(double)>& fn,
                              double rel_tol = 1e-8);

}  // namespace mdev
