#include "mdev/exit_prob.hpp"

#include <cmath>
#include <cstdlib>

#include "mdev/parallel.hpp"

namespace mdev {

namespace {
int g_max_threads = [] {
  if (const char* env = std::getenv("MDEV_THREADS")) {
    int n = std::atoi(env);
    if (n >= 1) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? std::min<int>(hc, 8) : 1;
}();
}  // namespace

int max_threads() { return g_max_threads; }
void set_max_threads(int n) { g_max_threads = n < 1 ? 1 : n; }

std::string to_string(ExitMethod m) {
  switch (m) {
    case ExitMethod::exact: return "exact";
    case ExitMethod::asymptotic: return "asymptotic";
    case ExitMethod::mc: return "mc";
    case ExitMethod::is: return "is";
  }
  return "?";
}

ExitProbEstimate exit_ball_exact(int d, double t, double r) {
  if (!(t > 0.0) || !(r > 0.0))
    throw std::domain_error("exit_ball_exact: requires t > 0, r > 0");
  TailProb q = chisq_upper_tail_full(d, t * r * t * r);
  ExitProbEstimate e;
  e.value = q.value;
  e.log_value = q.log_value;
  e.method = ExitMethod::exact;
  return e;
}

ExitProbEstimate exit_ball_asymptotic(int d, double t, double r,
                                      double regime_guard) {
  if (d < 1) throw std::domain_error("exit_ball_asymptotic: requires d >= 1");
  if (!(t > 0.0) || !(r > 0.0))
    throw std::domain_error("exit_ball_asymptotic: requires t > 0, r > 0");
  double tr = t * r;
  ExitProbEstimate e;
  e.method = ExitMethod::asymptotic;
  e.log_value = (1.0 - 0.5 * d) * std::log(2.0) - log_gamma(0.5 * d) +
                (d - 2.0) * std::log(tr) - 0.5 * tr * tr;
  e.value = e.log_value < -745.0 ? 0.0 : std::exp(e.log_value);
  if (e.value > 1.0) e.value = 1.0;
  if (tr < regime_guard)
    e.warnings.push_back("asymptotic regime guard: t*r < " +
                         std::to_string(regime_guard));
  return e;
}

ExitProbEstimate exit_ellipsoid_asymptotic(const Eigen::VectorXd& sigma,
                                           double r, double t,
                                           double regime_guard) {
  const int d = static_cast<int>(sigma.size());
  for (int i = 1; i < d; ++i)
    if (sigma[i] > sigma[i - 1])
      throw std::domain_error("exit_ellipsoid_asymptotic: sigma must be sorted descending");
  if (!(sigma[d - 1] > 0.0))
    throw std::domain_error("exit_ellipsoid_asymptotic: sigma must be positive");

  // normalize so the leading weight is 1; effective distance rho = r / sigma_1
  double s1 = sigma[0];
  double rho = r / s1;
  int k = 1;
  while (k < d && s1 - sigma[k] <= 1e-9 * s1) ++k;

  ExitProbEstimate e;
  e.method = ExitMethod::asymptotic;
  // near-ties make the multiplicity branch ill-conditioned
  if (k < d && s1 - sigma[k] <= 1e-3 * s1)
    e.warnings.push_back("sigma_1 near-tie within [1e-9, 1e-3]: k-branch selection unstable");

  double log_prod = 0.0;
  for (int i = k; i < d; ++i) {
    double rat = sigma[i] / s1;
    log_prod += -0.5 * std::log1p(-rat * rat);
  }
  double log_ck = (1.0 - 0.5 * k) * std::log(2.0) - log_gamma(0.5 * k) + log_prod;
  e.prefactor = std::exp(log_ck);

  double trho = t * rho;
  e.log_value = log_ck + (k - 2.0) * std::log(trho) - 0.5 * trho * trho;
  e.value = e.log_value < -745.0 ? 0.0 : std::exp(e.log_value);
  if (e.value > 1.0) e.value = 1.0;
  if (trho < regime_guard)
    e.warnings.push_back("asymptotic regime guard: t*r/sigma_1 < " +
                         std::to_string(regime_guard));
  return e;
}

namespace {

constexpr long long kChunk = 1 << 14;

struct Accum {
  double sum = 0.0;
  double sumsq = 0.0;
  long long n = 0;
};

double log_cosh(double y) {
  double a = std::fabs(y);
  return a + std::log1p(std::exp(-2.0 * a)) - std::log(2.0);
}

}  // namespace

ExitProbEstimate exit_mc(const ConvexBody& body, double t,
                         long long n_samples, const RngStream& stream) {
  if (n_samples < 1000) throw std::domain_error("exit_mc: requires n_samples >= 1000");
  if (!(t > 0.0)) throw std::domain_error("exit_mc: requires t > 0");
  const int d = body.dim();
  ConvexBody scaled = body.scaled(t);
  const long long n_chunks = (n_samples + kChunk - 1) / kChunk;

  auto results = run_chunks<Accum>(n_chunks, [&](std::size_t ci) {
    RngStream rng = stream.child(ci);
    long long lo = ci * kChunk;
    long long hi = std::min<long long>(lo + kChunk, n_samples);
    Accum a;
    for (long long s = lo; s < hi; ++s) {
      Eigen::VectorXd z = rng.normal_vector(d);
      if (!scaled.contains(z)) a.sum += 1.0;
      ++a.n;
    }
    return a;
  });

  double hits = 0.0;
  for (const auto& a : results) hits += a.sum;
  double p = hits / static_cast<double>(n_samples);
  ExitProbEstimate e;
  e.method = ExitMethod::mc;
  e.value = p;
  e.log_value = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  e.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(n_samples));
  e.n_samples = n_samples;
  e.seed = stream.master_seed();
  return e;
}

ExitProbEstimate exit_is(const ConvexBody& body, double t,
                         long long n_samples, const RngStream& stream) {
  if (n_samples < 1000) throw std::domain_error("exit_is: requires n_samples >= 1000");
  if (!(t > 0.0)) throw std::domain_error("exit_is: requires t > 0");
  const int d = body.dim();
  BoundaryPointSet nb = body.nearest_boundary();
  if (!(nb.min_distance > 0.0))
    throw std::domain_error("exit_is: degenerate body (min_distance = 0)");
  ConvexBody scaled = body.scaled(t);

  const double shift = t * nb.min_distance;  // |mu|
  const double log_scale = -0.5 * shift * shift;  // typical log-weight on M
  const bool sphere_case = nb.component_dimension >= 1;
  const int k = nb.attaining_subspace_dim;
  Eigen::VectorXd pair_dir;
  if (!sphere_case) pair_dir = nb.representative_points[0] / nb.min_distance;

  const long long n_chunks = (n_samples + kChunk - 1) / kChunk;
  auto results = run_chunks<Accum>(n_chunks, [&](std::size_t ci) {
    RngStream rng = stream.child(ci);
    long long lo = ci * kChunk;
    long long hi = std::min<long long>(lo + kChunk, n_samples);
    Accum a;
    Eigen::VectorXd mu(d);
    for (long long s = lo; s < hi; ++s) {
      double log_w;
      Eigen::VectorXd x(d);
      if (sphere_case) {
        // proposal: uniform-direction mixture over the attaining sphere;
        // the marginal weight is bounded by exp(shift^2 / 2), unlike the
        // per-direction conditional weight
        mu.setZero();
        Eigen::VectorXd u = rng.unit_vector(k);
        mu.head(k) = shift * u;
        x = mu + rng.normal_vector(d);
        log_w = 0.5 * shift * shift -
                log_sphere_mgf(k, shift * x.head(k).norm());
      } else {
        // 50/50 antipodal mixture; mixture likelihood ratio is bounded
        double sgn = rng.uniform() < 0.5 ? 1.0 : -1.0;
        mu = sgn * shift * pair_dir;
        x = mu + rng.normal_vector(d);
        log_w = 0.5 * shift * shift - log_cosh(shift * pair_dir.dot(x));
      }
      double contrib = scaled.contains(x) ? 0.0 : std::exp(log_w - log_scale);
      a.sum += contrib;
      a.sumsq += contrib * contrib;
      ++a.n;
    }
    return a;
  });

  double sum = 0.0, sumsq = 0.0;
  for (const auto& a : results) {
    sum += a.sum;
    sumsq += a.sumsq;
  }
  const double n = static_cast<double>(n_samples);
  double mean_scaled = sum / n;
  double var_scaled = std::max(0.0, (sumsq - n * mean_scaled * mean_scaled) / (n - 1.0));
  double scale = log_scale < -745.0 ? 0.0 : std::exp(log_scale);

  ExitProbEstimate e;
  e.method = ExitMethod::is;
  e.value = scale * mean_scaled;
  e.log_value = mean_scaled > 0.0 ? log_scale + std::log(mean_scaled)
                                  : -std::numeric_limits<double>::infinity();
  e.std_error = scale * std::sqrt(var_scaled / n);
  e.n_samples = n_samples;
  e.seed = stream.master_seed();
  return e;
}

}  // namespace mdev
