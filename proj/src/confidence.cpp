#include "mdev/confidence.hpp"

#include <cmath>

#include "mdev/parallel.hpp"

namespace mdev {

std::string to_string(IntervalMethod m) {
  return m == IntervalMethod::moderate_deviation ? "moderate_deviation" : "normal";
}

namespace {
void check_args(double sigma, long long n, double alpha) {
  if (!(sigma > 0.0)) throw std::domain_error("half_width: sigma must be positive");
  if (n < 1) throw std::domain_error("half_width: n must be >= 1");
  if (!(alpha > 0.0 && alpha < 1.0))
    throw std::domain_error("half_width: alpha must lie in (0, 1)");
}
}  // namespace

double md_half_width(double sigma, long long n, double alpha) {
  check_args(sigma, n, alpha);
  return sigma * std::sqrt(2.0 * std::fabs(std::log(0.5 * alpha))) /
         std::sqrt(double(n));
}

double normal_half_width(double sigma, long long n, double alpha) {
  check_args(sigma, n, alpha);
  return normal_quantile(1.0 - 0.5 * alpha) * sigma / std::sqrt(double(n));
}

double sample_size_ratio(double alpha) {
  double r = md_half_width(1.0, 1, alpha) / normal_half_width(1.0, 1, alpha);
  return r * r;
}

CoverageResult coverage_sim(const ParametricFamily& family,
                            const Eigen::VectorXd& theta, long long n,
                            double alpha, IntervalMethod method,
                            long long n_trials, const RngStream& stream) {
  double sigma = family.obs_sd(theta);
  double hw = method == IntervalMethod::moderate_deviation
                  ? md_half_width(sigma, n, alpha)
                  : normal_half_width(sigma, n, alpha);

  constexpr long long kChunk = 256;
  const long long n_chunks = (n_trials + kChunk - 1) / kChunk;
  auto hits = run_chunks<long long>(n_chunks, [&](std::size_t ci) {
    RngStream rng = stream.child(ci);
    long long lo = ci * kChunk;
    long long hi = std::min<long long>(lo + kChunk, n_trials);
    long long h = 0;
    std::vector<Eigen::VectorXd> xs(n);
    for (long long tr = lo; tr < hi; ++tr) {
      for (long long s = 0; s < n; ++s) xs[s] = family.sample(theta, rng);
      double est = mle(family, xs).theta[0];
      if (std::fabs(est - theta[0]) <= hw) ++h;
    }
    return h;
  });

  long long total = 0;
  for (long long h : hits) total += h;
  CoverageResult res;
  res.n_trials = n_trials;
  res.coverage = double(total) / double(n_trials);
  res.std_error = std::sqrt(res.coverage * (1.0 - res.coverage) / double(n_trials));
  return res;
}

}  // namespace mdev
