#include "mdev/lab.hpp"

#include <chrono>
#include <cmath>

#include "mdev/parallel.hpp"

namespace mdev {

std::vector<std::string> ExperimentConfig::validate() const {
  std::vector<std::string> warnings;
  if (!(bn_rule.gamma > 0.0 && bn_rule.gamma < 0.5))
    throw std::domain_error("ExperimentConfig: gamma must lie strictly in (0, 1/2)");
  if (!(bn_rule.c > 0.0))
    throw std::domain_error("ExperimentConfig: b_n scale c must be positive");
  if (n_grid.empty())
    throw std::domain_error("ExperimentConfig: n_grid must be nonempty");
  for (long long n : n_grid)
    if (n < 2) throw std::domain_error("ExperimentConfig: n must be >= 2");
  if (theta_grid_points < 1)
    throw std::domain_error("ExperimentConfig: theta_grid_points must be >= 1");
  if (static_cast<int>(theta0.size()) != family.param_dim())
    throw std::domain_error("ExperimentConfig: theta0 dimension mismatch");
  if (body.dim() != family.param_dim())
    throw std::domain_error("ExperimentConfig: body dimension mismatch");
  if (!family.in_domain(theta0))
    throw std::domain_error("ExperimentConfig: theta0 outside the family domain");
  // n b_n^{2+lambda} -> 0 needs gamma > 1/(2+lambda); lambda = 1 means 1/3
  if (bn_rule.gamma <= 1.0 / (2.0 + family.lambda()))
    warnings.push_back("gamma <= 1/(2+lambda): the side condition n*b_n^{2+lambda} -> 0 fails");
  return warnings;
}

ExitProbEstimate denominator(const ConvexBody& body, long long n, double b_n) {
  if (!(b_n > 0.0)) throw std::domain_error("denominator: b_n must be positive");
  double t = std::sqrt(double(n)) * b_n;
  switch (body.kind()) {
    case ConvexBody::Kind::ball:
      return exit_ball_exact(body.dim(), t, body.radius());
    case ConvexBody::Kind::ellipsoid: {
      ExitProbEstimate asym =
          exit_ellipsoid_asymptotic(body.sigma(), body.radius(), t);
      ExitProbEstimate is =
          exit_is(body, t, 200000, RngStream(0x9d2c5680ULL, 0));
      double tol = std::max(3.0 * is.std_error, 0.05 * asym.value);
      if (std::fabs(is.value - asym.value) > tol)
        asym.warnings.push_back("importance-sampling cross-check disagrees with the asymptotic value");
      return asym;
    }
    case ConvexBody::Kind::generic:
      return exit_is(body, t, 1000000, RngStream(0x9d2c5680ULL, 1));
  }
  throw std::logic_error("denominator: unknown body kind");
}

ExitProbEstimate numerator_binomial_enumeration(double theta, double theta0,
                                                long long n, double b_n,
                                                const ConvexBody& body) {
  ParametricFamily fam = ParametricFamily::bernoulli();
  Eigen::VectorXd th0 = Eigen::VectorXd::Constant(1, theta0);
  double sqrt_info = std::sqrt(fam.fisher(th0).matrix()(0, 0));
  ConvexBody scaled = body.scaled(b_n);
  double lo = fam.theta_lo()[0], hi = fam.theta_hi()[0];

  double log_p = std::log(theta), log_q = std::log1p(-theta);
  double max_log = -std::numeric_limits<double>::infinity();
  std::vector<double> logs;
  logs.reserve(n + 1);
  for (long long s = 0; s <= n; ++s) {
    double est = std::clamp(double(s) / double(n), lo, hi);
    Eigen::VectorXd w = Eigen::VectorXd::Constant(1, sqrt_info * (est - theta));
    if (scaled.contains(w)) continue;
    double lp = log_gamma(n + 1.0) - log_gamma(s + 1.0) - log_gamma(n - s + 1.0) +
                s * log_p + (n - s) * log_q;
    logs.push_back(lp);
    max_log = std::max(max_log, lp);
  }
  ExitProbEstimate e;
  e.method = ExitMethod::exact;
  if (logs.empty()) return e;
  double sum = 0.0;
  for (double lp : logs) sum += std::exp(lp - max_log);
  e.log_value = max_log + std::log(sum);
  e.value = e.log_value < -745.0 ? 0.0 : std::exp(e.log_value);
  return e;
}

namespace {

struct Accum {
  double sum = 0.0;
  double sumsq = 0.0;
};

Eigen::VectorXd apply_estimator(const ParametricFamily& family,
                                EstimatorKind estimator,
                                const std::vector<Eigen::VectorXd>& xs,
                                const PluginEstimator& plugin) {
  switch (estimator) {
    case EstimatorKind::sample_mean: {
      Eigen::VectorXd m = Eigen::VectorXd::Zero(family.sample_dim());
      for (const auto& x : xs) m += x;
      return m / double(xs.size());
    }
    case EstimatorKind::mle:
      return mle(family, xs).theta;
    case EstimatorKind::plugin:
      if (!plugin) throw std::domain_error("numerator: plugin estimator missing");
      return plugin(xs);
  }
  throw std::logic_error("unknown estimator");
}

ExitProbEstimate numerator_direct_mc(const ParametricFamily& family,
                                     EstimatorKind estimator,
                                     const Eigen::VectorXd& theta,
                                     const Eigen::VectorXd& theta0, long long n,
                                     double b_n, const ConvexBody& body,
                                     long long n_trials,
                                     const RngStream& stream,
                                     const PluginEstimator& plugin) {
  Eigen::MatrixXd sqrt_info = spd_sqrt(family.fisher(theta0)).matrix();
  ConvexBody scaled = body.scaled(b_n);
  constexpr long long kChunk = 64;
  const long long n_chunks = (n_trials + kChunk - 1) / kChunk;
  auto hits = run_chunks<long long>(n_chunks, [&](std::size_t ci) {
    RngStream rng = stream.child(ci);
    long long lo = ci * kChunk;
    long long hi = std::min<long long>(lo + kChunk, n_trials);
    long long h = 0;
    std::vector<Eigen::VectorXd> xs(n);
    for (long long tr = lo; tr < hi; ++tr) {
      for (long long s = 0; s < n; ++s) xs[s] = family.sample(theta, rng);
      Eigen::VectorXd est = apply_estimator(family, estimator, xs, plugin);
      Eigen::VectorXd w = sqrt_info * (est - theta);
      if (!scaled.contains(w)) ++h;
    }
    return h;
  });
  long long total = 0;
  for (long long h : hits) total += h;
  double p = double(total) / double(n_trials);
  ExitProbEstimate e;
  e.method = ExitMethod::mc;
  e.value = p;
  e.log_value = p > 0.0 ? std::log(p) : -std::numeric_limits<double>::infinity();
  e.std_error = std::sqrt(p * (1.0 - p) / double(n_trials));
  e.n_samples = n_trials;
  e.seed = stream.master_seed();
  return e;
}

// Tilted sampling of the sample mean: per trial, n observations drawn
// from the conjugate law shifted toward the dominating boundary point,
// reweighted by the product likelihood ratio.
ExitProbEstimate numerator_is(const ParametricFamily& family,
                              const Eigen::VectorXd& theta,
                              const Eigen::VectorXd& theta0, long long n,
                              double b_n, const ConvexBody& body,
                              long long n_trials, const RngStream& stream) {
  const int d = family.param_dim();
  Eigen::MatrixXd info_sqrt_inv =
      spd_inverse(spd_sqrt(family.fisher(theta0))).matrix();
  ConvexBody scaled = body.scaled(b_n);
  Eigen::MatrixXd sqrt_info = spd_sqrt(family.fisher(theta0)).matrix();

  BoundaryPointSet nb = body.nearest_boundary();
  TiltableDistribution obs = family.centered_observation(theta);
  const bool sphere_case = nb.component_dimension >= 1;
  const int k = nb.attaining_subspace_dim;

  // antipodal pair: 50/50 mixture of the two tilts, mixture weights
  std::optional<TiltSolution> tilt_pos, tilt_neg;
  if (!sphere_case) {
    Eigen::VectorXd v = b_n * (info_sqrt_inv * nb.representative_points[0]);
    tilt_pos = obs.solve_tilt(v);
    tilt_neg = obs.solve_tilt(-v);
  }
  double rate_ref = sphere_case
                        ? obs.solve_tilt(b_n * (info_sqrt_inv *
                                                nb.representative_points[0]))
                              .rate
                        : tilt_pos->rate;
  const double log_scale = -double(n) * rate_ref;

  constexpr long long kChunk = 64;
  const long long n_chunks = (n_trials + kChunk - 1) / kChunk;
  auto results = run_chunks<Accum>(n_chunks, [&](std::size_t ci) {
    long long lo = ci * kChunk;
    long long hi = std::min<long long>(lo + kChunk, n_trials);
    Accum a;
    for (long long tr = lo; tr < hi; ++tr) {
      // each trial gets its own substream, keyed by trial index
      RngStream rng = stream.child(tr + 1);
      const TiltSolution* tilt;
      std::optional<TiltSolution> tilt_local;
      if (sphere_case) {
        Eigen::VectorXd u = rng.unit_vector(k);
        Eigen::VectorXd y = Eigen::VectorXd::Zero(d);
        y.head(k) = nb.min_distance * u;
        tilt_local = obs.solve_tilt(b_n * (info_sqrt_inv * y));
        tilt = &*tilt_local;
      } else {
        tilt = rng.uniform() < 0.5 ? &*tilt_pos : &*tilt_neg;
      }
      auto draws = obs.sample_tilted(tilt->h, n, rng);
      Eigen::VectorXd total = Eigen::VectorXd::Zero(d);
      for (const auto& ws : draws) total += ws.x;
      Eigen::VectorXd mean = total / double(n);
      Eigen::VectorXd w = sqrt_info * mean;  // mean of (X - theta)
      if (scaled.contains(w)) continue;
      double log_w;
      if (sphere_case) {
        // mixture over the attaining sphere: for the gaussian observation
        // law every direction shares ln phi, and the mixture normalizer
        // reduces to the sphere MGF of |I^{1/2} total| restricted to the
        // attaining subspace; this keeps the weight bounded
        if (obs.kind() == TiltableDistribution::Kind::gaussian) {
          double z = b_n * nb.min_distance * (sqrt_info * total).head(k).norm();
          log_w = double(n) * std::log(tilt->phi) - log_sphere_mgf(k, z);
        } else {
          log_w = double(n) * std::log(tilt->phi) - tilt->h.dot(total);
        }
      } else {
        // mixture density over the two antipodal tilts
        double lp = tilt_pos->h.dot(total) - double(n) * std::log(tilt_pos->phi);
        double lm = tilt_neg->h.dot(total) - double(n) * std::log(tilt_neg->phi);
        double mx = std::max(lp, lm);
        log_w = -(mx + std::log(0.5 * std::exp(lp - mx) + 0.5 * std::exp(lm - mx)));
      }
      double contrib = std::exp(log_w - log_scale);
      a.sum += contrib;
      a.sumsq += contrib * contrib;
    }
    return a;
  });

  double sum = 0.0, sumsq = 0.0;
  for (const auto& a : results) {
    sum += a.sum;
    sumsq += a.sumsq;
  }
  const double m = double(n_trials);
  double mean_scaled = sum / m;
  double var_scaled = std::max(0.0, (sumsq - m * mean_scaled * mean_scaled) / (m - 1.0));
  double scale = log_scale < -745.0 ? 0.0 : std::exp(log_scale);
  ExitProbEstimate e;
  e.method = ExitMethod::is;
  e.value = scale * mean_scaled;
  e.log_value = mean_scaled > 0.0 ? log_scale + std::log(mean_scaled)
                                  : -std::numeric_limits<double>::infinity();
  e.std_error = scale * std::sqrt(var_scaled / m);
  e.n_samples = n_trials;
  e.seed = stream.master_seed();
  return e;
}

}  // namespace

ExitProbEstimate numerator(const ParametricFamily& family,
                           EstimatorKind estimator,
                           const Eigen::VectorXd& theta,
                           const Eigen::VectorXd& theta0, long long n,
                           double b_n, const ConvexBody& body,
                           long long n_trials, bool use_is,
                           bool prefer_enumeration, const RngStream& stream,
                           const PluginEstimator& plugin) {
  if (!family.in_domain(theta))
    throw std::domain_error("numerator: theta outside the family domain");
  if (family.kind() == FamilyKind::bernoulli && prefer_enumeration &&
      estimator != EstimatorKind::plugin && n <= 100000) {
    return numerator_binomial_enumeration(theta[0], theta0[0], n, b_n, body);
  }
  if (use_is) {
    if (estimator == EstimatorKind::sample_mean && family.tiltable())
      return numerator_is(family, theta, theta0, n, b_n, body, n_trials, stream);
    ExitProbEstimate e = numerator_direct_mc(family, estimator, theta, theta0, n,
                                             b_n, body, n_trials, stream, plugin);
    e.warnings.push_back("importance sampling requires a linear estimator; fell back to direct MC");
    return e;
  }
  return numerator_direct_mc(family, estimator, theta, theta0, n, b_n, body,
                             n_trials, stream, plugin);
}

ExperimentReport efficiency_sweep(const ExperimentConfig& config) {
  auto t_start = std::chrono::steady_clock::now();
  std::vector<std::string> config_warnings = config.validate();
  ExperimentReport report;
  report.master_seed = config.master_seed;
  RngStream base(config.master_seed, 0);

  int g = config.theta_grid_points | 1;  // odd, so theta0 is on the grid
  for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
    long long n = config.n_grid[ni];
    double b_n = config.bn_rule.bn(n);
    ExitProbEstimate den;
    try {
      den = denominator(config.body, n, b_n);
    } catch (const std::exception& ex) {
      SweepRow row;
      row.n = n;
      row.b_n = b_n;
      row.failed = true;
      row.error = ex.what();
      report.rows.push_back(row);
      continue;
    }

    double radius = config.cn(n) * b_n;
    SweepSummary summary;
    summary.n = n;
    summary.b_n = b_n;
    for (int gi = 0; gi < g; ++gi) {
      double offset = g == 1 ? 0.0 : -radius + 2.0 * radius * gi / (g - 1);
      Eigen::VectorXd theta = config.theta0;
      theta[0] += offset;
      // keep the grid inside the parameter domain
      for (int i = 0; i < config.family.param_dim(); ++i)
        theta[i] = std::clamp(theta[i], config.family.theta_lo()[i],
                              config.family.theta_hi()[i]);
      SweepRow row;
      row.n = n;
      row.b_n = b_n;
      row.theta = theta;
      row.denominator = den;
      try {
        RngStream cell = base.child(ni * 4096 + gi);
        row.numerator = numerator(config.family, config.estimator, theta,
                                  config.theta0, n, b_n, config.body,
                                  config.n_trials, config.use_is,
                                  config.prefer_enumeration, cell);
        row.numerator.warnings.insert(row.numerator.warnings.end(),
                                      config_warnings.begin(),
                                      config_warnings.end());
        row.ratio = row.numerator.value / den.value;
        double rel2 = 0.0;
        if (row.numerator.value > 0.0)
          rel2 += std::pow(row.numerator.std_error / row.numerator.value, 2);
        if (den.value > 0.0)
          rel2 += std::pow(den.std_error / den.value, 2);
        row.ratio_std_error = row.ratio * std::sqrt(rel2);
        if (row.ratio >= summary.sup_ratio) {
          summary.sup_ratio = row.ratio;
          summary.sup_ratio_std_error = row.ratio_std_error;
        }
      } catch (const std::exception& ex) {
        row.failed = true;
        row.error = ex.what();
      }
      report.rows.push_back(row);
    }
    summary.consistent_with_bound =
        summary.sup_ratio >= 1.0 - 3.0 * summary.sup_ratio_std_error;
    report.summaries.push_back(summary);
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return report;
}

BahadurResult bahadur_log_bound(const ParametricFamily& family,
                                const Eigen::VectorXd& theta0,
                                EstimatorKind estimator, long long n,
                                double b_n, long long n_trials,
                                const RngStream& stream) {
  if (family.param_dim() != 1)
    throw std::domain_error("bahadur_log_bound: one-dimensional families only");
  double info = family.fisher(theta0).matrix()(0, 0);

  // the event |est - theta0| > b_n is exit from a ball of radius
  // sqrt(I) in the information-normalized coordinate
  ConvexBody ball = ConvexBody::ball(1, std::sqrt(info));

  BahadurResult res;
  res.bound = -info;
  double log_p;
  if (family.kind() == FamilyKind::gaussian_location &&
      estimator == EstimatorKind::sample_mean) {
    // exact: 2 Phi(-sqrt(n) b_n / sigma) = chi^2_1 tail
    double sigma = family.obs_sd(theta0);
    double x = std::sqrt(double(n)) * b_n / sigma;
    log_p = chisq_upper_tail_full(1, x * x).log_value;
    res.method = ExitMethod::exact;
  } else {
    ExitProbEstimate est =
        numerator(family, estimator, theta0, theta0, n, b_n, ball, n_trials,
                  false, true, stream);
    if (est.method == ExitMethod::mc && est.value < 1e-4 &&
        estimator == EstimatorKind::sample_mean && family.tiltable()) {
      est = numerator(family, estimator, theta0, theta0, n, b_n, ball, n_trials,
                      true, false, stream);
    }
    if (!std::isfinite(est.log_value))
      throw std::runtime_error("bahadur_log_bound: degenerate probability estimate");
    log_p = est.log_value;
    res.method = est.method;
  }
  res.normalized_log = log_p / (0.5 * double(n) * b_n * b_n);
  res.slack = res.normalized_log - res.bound;
  res.consistent = res.normalized_log >= res.bound - 0.5;
  return res;
}

}  // namespace mdev
