#include "mdev/quadrature.hpp"

#include <cmath>
#include <map>
#include <stdexcept>
#include <vector>

namespace mdev {

namespace {

struct GlRule {
  std::vector<double> x, w;
};

const GlRule& gl_rule(int n) {
  static std::map<int, GlRule> cache;
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  GlRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (int j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
      }
      pp = n * (z * p0 - p1) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p0 / pp;
      if (std::fabs(z - z1) < 1e-15) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
  return cache.emplace(n, std::move(r)).first->second;
}

}  // namespace

double box_quad(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                const std::function<double(const Eigen::VectorXd&)>& fn,
                int order) {
  const int d = static_cast<int>(lo.size());
  const GlRule& r = gl_rule(order);
  std::vector<int> idx(d, 0);
  Eigen::VectorXd x(d);
  double total = 0.0;
  for (;;) {
    double w = 1.0;
    for (int i = 0; i < d; ++i) {
      double half = 0.5 * (hi[i] - lo[i]);
      x[i] = 0.5 * (lo[i] + hi[i]) + half * r.x[idx[i]];
      w *= half * r.w[idx[i]];
    }
    total += w * fn(x);
    int i = 0;
    while (i < d && ++idx[i] == order) idx[i++] = 0;
    if (i == d) break;
  }
  return total;
}

double adaptive_box_quad(const Eigen::VectorXd& lo, const Eigen::VectorXd& hi,
                         const std::function<double(const Eigen::VectorXd&)>& fn,
                         double rel_tol) {
  double prev = box_quad(lo, hi, fn, 16);
  for (int order : {32, 64, 128, 256}) {
    double cur = box_quad(lo, hi, fn, order);
    if (std::fabs(cur - prev) <= rel_tol * (std::fabs(cur) + 1e-300)) return cur;
    // signed cancellation (e.g. the mean of a symmetric density) leaves
    // |cur| near zero; judge convergence against the mass of |fn| instead
    double abs_scale = box_quad(
        lo, hi, [&](const Eigen::VectorXd& x) { return std::fabs(fn(x)); },
        order);
    if (std::fabs(cur - prev) <= rel_tol * abs_scale) return cur;
    prev = cur;
  }
  throw std::runtime_error("adaptive quadrature did not converge");
}

double interval_quad(double lo, double hi,
                     const std::function<double(double)>& fn, int order) {
  Eigen::VectorXd l(1), h(1);
  l[0] = lo;
  h[0] = hi;
  return box_quad(l, h, [&](const Eigen::VectorXd& x) { return fn(x[0]); },
                  order);
}

double adaptive_interval_quad(double lo, double hi,
                              const std::function<double(double)>& fn,
                              double rel_tol) {
  Eigen::VectorXd l(1), h(1);
  l[0] = lo;
  h[0] = hi;
  return adaptive_box_quad(
      l, h, [&](const Eigen::VectorXd& x) { return fn(x[0]); }, rel_tol);
}

}  // namespace mdev
