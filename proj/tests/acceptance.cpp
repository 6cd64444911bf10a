// Acceptance gate: one pass/fail line per criterion. Exits with the
// number of failed criteria. argv[1] must point at the CLI binary.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "mdev/confidence.hpp"
#include "mdev/exit_prob.hpp"
#include "mdev/lab.hpp"
#include "mdev/tilting.hpp"

using namespace mdev;

namespace {

std::string g_cli;
std::ostringstream g_detail;

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

bool expect(bool ok, const std::string& what) {
  if (!ok) g_detail << "    failed: " << what << "\n";
  return ok;
}

int run_cli(const std::string& args) {
  std::string cmd = g_cli + " " + args + " 2>/dev/null";
  return std::system(cmd.c_str());
}

std::string slurp(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

void spit(const std::string& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  os << content;
}

// --- criterion 1: quantile table matches the tabulated values ------------

bool criterion_quantile_table() {
  const std::string out = "acc_qt.csv";
  if (!expect(run_cli("quantile-table --alphas 0.1,0.05,0.01 --out " + out) == 0,
              "quantile-table invocation"))
    return false;
  std::istringstream is(slurp(out));
  std::string line;
  std::getline(is, line);  // header
  struct Row {
    double alpha, md, normal;
  };
  std::vector<Row> rows;
  while (std::getline(is, line)) {
    if (line.empty() || line == "\r") continue;
    Row r;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &r.alpha, &r.md, &r.normal) == 3)
      rows.push_back(r);
  }
  bool ok = expect(rows.size() == 3, "three table rows");
  // the reference table mixes truncation (2.4477 -> 2.44) and rounding
  // (1.6449 -> 1.65), so "matches to two decimals" means within 0.01
  const double md_ref[] = {2.44, 2.71, 3.25};
  const double nm_ref[] = {1.65, 1.96, 2.576};
  for (std::size_t i = 0; ok && i < rows.size(); ++i) {
    ok &= expect(std::fabs(rows[i].md - md_ref[i]) < 0.01, "md quantile row");
    ok &= expect(std::fabs(rows[i].normal - nm_ref[i]) < 0.01, "normal quantile row");
  }
  return ok;
}

// --- criterion 2: sample-size doubling claim -----------------------------

bool criterion_sample_size() {
  double r10 = sample_size_ratio(0.1);
  double r05 = sample_size_ratio(0.05);
  return expect(r10 >= 2.20 && r10 <= 2.23, "ratio at alpha = 0.1") &
         expect(r05 >= 1.91 && r05 <= 1.93, "ratio at alpha = 0.05");
}

// --- criterion 3: d = 2 asymptotic identity ------------------------------

bool criterion_d2_identity() {
  bool ok = true;
  for (double tr = 0.5; tr <= 20.0; tr += 0.05) {
    double a = exit_ball_asymptotic(2, tr, 1.0).log_value;
    double e = exit_ball_exact(2, tr, 1.0).log_value;
    ok &= expect(std::fabs(a - e) <= 1e-12 * std::max(1.0, std::fabs(e)),
                 "identity at tr = " + std::to_string(tr));
    if (!ok) break;
  }
  return ok;
}

// --- criterion 4: asymptotic convergence rate at d = 1, 3, 4 -------------

bool criterion_convergence_rate() {
  bool ok = true;
  for (int d : {1, 3, 4}) {
    for (double tr = 3.0; tr <= 8.0; tr += 0.1) {
      double a = exit_ball_asymptotic(d, tr, 1.0).value;
      double e = exit_ball_exact(d, tr, 1.0).value;
      double rel = std::fabs(a / e - 1.0);
      ok &= expect(rel <= 5.0 / (tr * tr),
                   "d = " + std::to_string(d) + ", tr = " + std::to_string(tr) +
                       ", rel = " + std::to_string(rel));
      if (!ok) return ok;
    }
  }
  return ok;
}

// --- criterion 5: ellipsoid asymptotic vs importance sampling ------------

bool criterion_ellipsoid_vs_is() {
  bool ok = true;
  struct Case {
    Eigen::VectorXd sigma;
    const char* name;
  };
  std::vector<Case> cases(2);
  cases[0].sigma = Eigen::VectorXd(2);
  cases[0].sigma << 1.0, 0.5;
  cases[0].name = "pair case sigma = (1, 0.5)";
  cases[1].sigma = Eigen::VectorXd(3);
  cases[1].sigma << 1.0, 1.0, 0.5;
  cases[1].name = "sphere case sigma = (1, 1, 0.5)";
  for (const auto& c : cases) {
    ExitProbEstimate asym = exit_ellipsoid_asymptotic(c.sigma, 1.0, 5.0);
    ExitProbEstimate is = exit_is(ConvexBody::ellipsoid(c.sigma, 1.0), 5.0,
                                  1000000, RngStream(0xacce97ULL, 0));
    double tol = std::max(3.0 * is.std_error, 0.10 * asym.value);
    ok &= expect(std::fabs(is.value - asym.value) <= tol,
                 std::string(c.name) + ": |" + std::to_string(is.value) + " - " +
                     std::to_string(asym.value) + "| > tol");
  }
  return ok;
}

// --- criterion 6: attainment of the bound for the gaussian family --------

bool criterion_gaussian_attainment() {
  ExperimentConfig cfg;
  cfg.family = ParametricFamily::gaussian_location(1.0);
  cfg.estimator = EstimatorKind::sample_mean;
  cfg.theta0 = scalar(0.0);
  cfg.body = ConvexBody::ball(1, 1.0);
  cfg.bn_rule = {1.0, 0.4};
  cfg.n_grid = {100, 1000};
  cfg.theta_grid_points = 1;  // ratio evaluated at theta0 itself
  cfg.n_trials = 100000;
  cfg.master_seed = 616;
  ExperimentReport rep = efficiency_sweep(cfg);
  bool ok = expect(rep.rows.size() == 2, "one row per n");
  for (const auto& row : rep.rows) {
    if (!expect(!row.failed, "row failed: " + row.error)) return false;
    ok &= expect(std::fabs(row.ratio - 1.0) <= 3.0 * row.ratio_std_error,
                 "n = " + std::to_string(row.n) + ": ratio " +
                     std::to_string(row.ratio) + " +- " +
                     std::to_string(row.ratio_std_error));
  }
  return ok;
}

// --- criterion 7: non-gaussian trend toward the bound --------------------

bool criterion_bernoulli_trend() {
  ExperimentConfig cfg;
  cfg.family = ParametricFamily::bernoulli();
  cfg.estimator = EstimatorKind::mle;
  cfg.theta0 = scalar(0.5);
  cfg.body = ConvexBody::ball(1, 1.0);
  cfg.bn_rule = {1.0, 0.4};
  cfg.n_grid = {400, 4000, 40000};
  cfg.theta_grid_points = 5;
  cfg.prefer_enumeration = true;
  cfg.master_seed = 7;
  ExperimentReport rep = efficiency_sweep(cfg);
  bool ok = expect(rep.summaries.size() == 3, "one summary per n");
  double prev_gap = std::numeric_limits<double>::infinity();
  for (const auto& s : rep.summaries) {
    ok &= expect(std::isfinite(s.sup_ratio) && s.sup_ratio > 0.0,
                 "sup ratio finite and positive at n = " + std::to_string(s.n));
    double gap = std::fabs(s.sup_ratio - 1.0);
    ok &= expect(gap < prev_gap,
                 "gap |sup - 1| = " + std::to_string(gap) + " at n = " +
                     std::to_string(s.n) + " not below " +
                     std::to_string(prev_gap));
    prev_gap = gap;
  }
  for (const auto& row : rep.rows)
    ok &= expect(row.numerator.method == ExitMethod::exact,
                 "enumeration engine used for every cell");
  return ok;
}

// --- criterion 8: logarithmic lower bound --------------------------------

bool criterion_bahadur() {
  ParametricFamily fam = ParametricFamily::gaussian_location(1.0);
  // sqrt(n) b_n = 3 and 6 via (n, b_n) = (900, 0.1), (3600, 0.1)
  BahadurResult near = bahadur_log_bound(fam, scalar(0.0),
                                         EstimatorKind::sample_mean, 900, 0.1,
                                         0, RngStream(0, 0));
  BahadurResult far = bahadur_log_bound(fam, scalar(0.0),
                                        EstimatorKind::sample_mean, 3600, 0.1,
                                        0, RngStream(0, 0));
  return expect(near.method == ExitMethod::exact, "exact normal tail used") &
         expect(near.bound == -1.0, "bound is -I = -1") &
         expect(std::fabs(far.slack) < std::fabs(near.slack),
                "|slack| at 6 (" + std::to_string(std::fabs(far.slack)) +
                    ") < |slack| at 3 (" + std::to_string(std::fabs(near.slack)) +
                    ")") &
         expect(near.consistent && far.consistent, "soft consistency flags");
}

// --- criterion 9: tilting suite ------------------------------------------

bool criterion_tilting() {
  bool ok = true;

  Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(2, 2);
  TiltableDistribution gauss =
      TiltableDistribution::gaussian(Eigen::VectorXd::Zero(2), cov);
  for (int i = 0; i < 20; ++i) {
    double angle = 2.0 * M_PI * i / 20.0;
    double radius = 0.1 + 0.15 * i;
    Eigen::Vector2d v(radius * std::cos(angle), radius * std::sin(angle));
    TiltSolution s = gauss.solve_tilt(v);
    ok &= expect((gauss.tilted_mean(s.h) - v).norm() <= 1e-10,
                 "gaussian mean match at point " + std::to_string(i));
    ok &= expect(std::fabs(s.rate - 0.5 * v.squaredNorm()) <= 1e-10,
                 "gaussian rate |v|^2/2 at point " + std::to_string(i));
  }

  std::vector<std::pair<Eigen::VectorXd, double>> atoms;
  atoms.emplace_back(scalar(0.0), 0.7);
  atoms.emplace_back(scalar(1.0), 0.3);
  TiltableDistribution bern = TiltableDistribution::bounded_discrete(atoms);
  for (int i = 0; i < 20; ++i) {
    // centered support is (-0.3, 0.7); stay strictly inside
    double v = -0.28 + 0.94 * i / 19.0;
    TiltSolution s = bern.solve_tilt(scalar(v));
    ok &= expect(std::fabs(bern.tilted_mean(s.h)[0] - v) <= 1e-10,
                 "bernoulli mean match at v = " + std::to_string(v));
  }

  // tilted_cov must be the Jacobian of tilted_mean
  Eigen::VectorXd h = scalar(0.37);
  double cov_val = bern.tilted_cov(h)(0, 0);
  const double eps = 1e-5;
  double fd = (bern.tilted_mean(scalar(0.37 + eps))[0] -
               bern.tilted_mean(scalar(0.37 - eps))[0]) /
              (2.0 * eps);
  ok &= expect(std::fabs(cov_val - fd) <= 1e-5 * std::fabs(fd),
               "jacobian vs finite difference");
  return ok;
}

// --- criterion 10: A2 residual verification ------------------------------

bool criterion_a2() {
  bool ok = true;
  ParametricFamily g = ParametricFamily::gaussian_location(1.0);
  double info = g.fisher(scalar(0.0)).matrix()(0, 0);
  for (double u = 1e-3; u <= 0.3; u *= 1.7) {
    double rho = hellinger(g, scalar(0.0), scalar(u));
    double res = std::fabs(4.0 * rho * rho - info * u * u);
    ok &= expect(res <= u * u * u,
                 "gaussian residual " + std::to_string(res) + " at u = " +
                     std::to_string(u));
  }
  std::vector<Eigen::VectorXd> grid;
  for (double u : {0.01, 0.03, 0.1, 0.2}) grid.push_back(scalar(u));
  A2Report rep = check_a2(ParametricFamily::bernoulli(), scalar(0.5), grid);
  ok &= expect(rep.pass, "bernoulli a2 pass flag");
  ok &= expect(std::isfinite(rep.c21) && std::isfinite(rep.c22) &&
                   std::isfinite(rep.c23) && std::isfinite(rep.c24),
               "fitted constants finite");
  return ok;
}

// --- criterion 11: determinism across runs and thread counts -------------

bool criterion_determinism() {
  bool ok = true;

  spit("acc_body.json", "{\"kind\":\"ball\",\"dim\":3,\"r\":1.0}\n");
  std::string base =
      "exit-prob --body acc_body.json --t 4.0 --method is --samples 200000 "
      "--seed 321 --out ";
  ok &= expect(run_cli("--threads 1 " + base + "acc_ep_a.json") == 0,
               "exit-prob run 1");
  ok &= expect(run_cli("--threads 4 " + base + "acc_ep_b.json") == 0,
               "exit-prob run 2");
  std::string a = slurp("acc_ep_a.json"), b = slurp("acc_ep_b.json");
  ok &= expect(!a.empty() && a == b,
               "exit-prob outputs byte-identical across thread counts");

  spit("acc_cfg.json",
       "{\"family\":{\"family\":\"gaussian_location\",\"sigma2\":1.0},"
       "\"estimator\":\"sample_mean\",\"theta0\":[0.0],"
       "\"body\":{\"kind\":\"ball\",\"dim\":1,\"r\":1.0},"
       "\"bn\":{\"c\":1.0,\"gamma\":0.4},\"n_grid\":[100],"
       "\"theta_grid_points\":3,\"trials\":20000,\"seed\":42}\n");
  ok &= expect(run_cli("--threads 1 simulate --config acc_cfg.json --out acc_sim_a") == 0,
               "simulate run 1");
  ok &= expect(run_cli("--threads 4 simulate --config acc_cfg.json --out acc_sim_b") == 0,
               "simulate run 2");
  // manifests carry timestamps and are excluded; result files must match
  ok &= expect(slurp("acc_sim_a.json") == slurp("acc_sim_b.json") &&
                   !slurp("acc_sim_a.json").empty(),
               "simulate JSON byte-identical");
  ok &= expect(slurp("acc_sim_a.csv") == slurp("acc_sim_b.csv") &&
                   !slurp("acc_sim_a.csv").empty(),
               "simulate CSV byte-identical");
  return ok;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: acceptance <path-to-cli>\n";
    return 64;
  }
  g_cli = argv[1];

  struct Criterion {
    const char* name;
    std::function<bool()> fn;
  };
  std::vector<Criterion> criteria = {
      {"1. quantile table matches the tabulated values", criterion_quantile_table},
      {"2. sample-size ratios in the documented brackets", criterion_sample_size},
      {"3. ball asymptotic is an identity at d = 2", criterion_d2_identity},
      {"4. ball asymptotic converges at the O((tr)^-2) rate", criterion_convergence_rate},
      {"5. ellipsoid asymptotic agrees with importance sampling", criterion_ellipsoid_vs_is},
      {"6. gaussian sample mean attains the efficiency bound", criterion_gaussian_attainment},
      {"7. bernoulli sup-ratio approaches the bound with n", criterion_bernoulli_trend},
      {"8. logarithmic lower-bound slack shrinks with sqrt(n) b_n", criterion_bahadur},
      {"9. tilting suite: mean match, rate, jacobian", criterion_tilting},
      {"10. A2 residuals within their envelopes", criterion_a2},
      {"11. byte-identical reruns across thread counts", criterion_determinism},
  };

  int failures = 0;
  for (auto& c : criteria) {
    g_detail.str("");
    bool ok = false;
    try {
      ok = c.fn();
    } catch (const std::exception& e) {
      g_detail << "    exception: " << e.what() << "\n";
    }
    std::cout << (ok ? "PASS" : "FAIL") << "  " << c.name << "\n";
    if (!ok) {
      std::cout << g_detail.str();
      ++failures;
    }
  }
  return failures;
}
