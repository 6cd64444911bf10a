#include <CLI11.hpp>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "mdev/io.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

using mdev::json;

json load_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open " + path);
  json j;
  is >> j;
  return j;
}

std::vector<double> parse_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(tok));
  return out;
}

Eigen::VectorXd parse_vector(const std::string& s) {
  auto v = parse_list(s);
  Eigen::VectorXd out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i];
  return out;
}

std::uint64_t ensure_seed(std::uint64_t seed, bool seed_given) {
  if (seed_given) return seed;
  std::random_device rd;
  std::uint64_t s = (std::uint64_t(rd()) << 32) | rd();
  std::cerr << "seed: " << s << "\n";
  return s;
}

std::string iso_now() {
  auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%FT%TZ", std::gmtime(&t));
  return buf;
}

// Written beside every file output; carries run provenance.
void write_manifest(const std::string& out_path, const std::string& subcommand,
                    const json& args_echo, const json& config,
                    std::uint64_t master_seed, const std::string& start_time,
                    const std::vector<std::string>& outputs) {
  json m;
  m["tool_version"] = kVersion;
  m["subcommand"] = subcommand;
  m["config_hash"] = mdev::config_hash(config);
  m["master_seed"] = master_seed;
  m["start_time"] = start_time;
  m["end_time"] = iso_now();
  m["arguments"] = args_echo;
  m["outputs"] = outputs;
  mdev::atomic_write(out_path + ".manifest.json", m.dump(2) + "\n");
}

void emit(const std::string& out, const std::string& content,
          const std::string& subcommand, const json& args_echo,
          const json& config, std::uint64_t seed, const std::string& start) {
  if (out.empty()) {
    std::cout << content;
  } else {
    mdev::atomic_write(out, content);
    write_manifest(out, subcommand, args_echo, config, seed, start, {out});
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"moderate-deviation efficiency bounds and rare-event estimators"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  int threads = 0;
  app.add_option("--threads", threads,
                 "worker cap for Monte Carlo loops (never changes results)");

  // quantile-table
  auto* qt = app.add_subcommand("quantile-table",
                                "moderate-deviation vs normal interval quantiles");
  std::string qt_alphas = "0.1,0.05,0.01";
  std::string qt_out;
  qt->add_option("--alphas", qt_alphas, "comma-separated significance levels");
  qt->add_option("--out", qt_out, "output CSV path (stdout if omitted)");

  // exit-prob
  auto* ep = app.add_subcommand("exit-prob",
                                "Gaussian exit probability from a scaled convex body");
  std::string ep_body, ep_method = "exact", ep_out;
  double ep_t = 1.0;
  long long ep_samples = 1000000;
  std::uint64_t ep_seed = 0;
  bool ep_seed_given = false;
  ep->add_option("--body", ep_body, "body spec JSON file")->required();
  ep->add_option("--t", ep_t, "scale factor t")->required();
  ep->add_option("--method", ep_method, "exact|asymptotic|mc|is");
  ep->add_option("--samples", ep_samples, "sample count for mc/is");
  ep->add_option("--seed", ep_seed, "master seed")->each([&](const std::string&) {
    ep_seed_given = true;
  });
  ep->add_option("--out", ep_out, "output JSON path (stdout if omitted)");

  // ci
  auto* ci = app.add_subcommand("ci", "confidence interval widths and coverage");
  double ci_alpha = 0.05, ci_sigma = 1.0, ci_theta = 0.0;
  long long ci_n = 100, ci_trials = 0;
  std::string ci_method = "both", ci_family, ci_out;
  std::uint64_t ci_seed = 0;
  bool ci_seed_given = false;
  ci->add_option("--alpha", ci_alpha, "significance level");
  ci->add_option("--n", ci_n, "sample size");
  ci->add_option("--sigma", ci_sigma, "observation standard deviation");
  ci->add_option("--method", ci_method, "moderate_deviation|normal|both");
  ci->add_option("--family", ci_family, "family spec JSON (enables coverage simulation)");
  ci->add_option("--theta", ci_theta, "true parameter for the coverage simulation");
  ci->add_option("--trials", ci_trials, "coverage simulation trials");
  ci->add_option("--seed", ci_seed, "master seed")->each([&](const std::string&) {
    ci_seed_given = true;
  });
  ci->add_option("--out", ci_out, "output CSV path (stdout if omitted)");

  // tilt
  auto* ti = app.add_subcommand("tilt", "solve the mean-matching exponential tilt");
  std::string ti_dist, ti_v, ti_out;
  ti->add_option("--dist", ti_dist, "distribution spec JSON file")->required();
  ti->add_option("--v", ti_v, "target mean, comma-separated")->required();
  ti->add_option("--out", ti_out, "output JSON path (stdout if omitted)");

  // simulate
  auto* si = app.add_subcommand("simulate", "efficiency-ratio sweep experiment");
  std::string si_config, si_out;
  std::uint64_t si_seed = 0;
  bool si_seed_given = false;
  si->add_option("--config", si_config, "experiment config JSON file")->required();
  si->add_option("--seed", si_seed, "master seed (overrides config)")
      ->each([&](const std::string&) { si_seed_given = true; });
  si->add_option("--out", si_out, "output path prefix")->required();

  // check-assumptions
  auto* ca = app.add_subcommand("check-assumptions",
                                "A1/A2 and B1-B3 validation report");
  std::string ca_family, ca_body, ca_grid = "0.001,0.005,0.01,0.05,0.1,0.2,0.3", ca_out;
  std::string ca_theta0 = "0";
  ca->add_option("--family", ca_family, "family spec JSON file")->required();
  ca->add_option("--theta0", ca_theta0, "reference parameter, comma-separated");
  ca->add_option("--grid", ca_grid, "comma-separated |u| grid");
  ca->add_option("--body", ca_body, "optional body spec JSON for the B checks");
  ca->add_option("--out", ca_out, "output JSON path (stdout if omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (threads > 0) mdev::set_max_threads(threads);

  try {
    std::string start = iso_now();

    if (*qt) {
      std::ostringstream os;
      os.precision(10);
      os << "alpha,md_quantile,normal_quantile\r\n";
      for (double a : parse_list(qt_alphas))
        os << a << "," << mdev::md_half_width(1.0, 1, a) << ","
           << mdev::normal_half_width(1.0, 1, a) << "\r\n";
      json cfg = {{"alphas", qt_alphas}};
      emit(qt_out, os.str(), "quantile-table", cfg, cfg, 0, start);
    }

    if (*ep) {
      mdev::ConvexBody body = mdev::body_from_json(load_json_file(ep_body));
      mdev::ExitProbEstimate est;
      if (ep_method == "exact") {
        if (body.kind() != mdev::ConvexBody::Kind::ball)
          throw std::domain_error("exact method is available for balls only");
        est = mdev::exit_ball_exact(body.dim(), ep_t, body.radius());
      } else if (ep_method == "asymptotic") {
        est = body.kind() == mdev::ConvexBody::Kind::ball
                  ? mdev::exit_ball_asymptotic(body.dim(), ep_t, body.radius())
                  : mdev::exit_ellipsoid_asymptotic(body.sigma(), body.radius(),
                                                    ep_t);
      } else if (ep_method == "mc" || ep_method == "is") {
        ep_seed = ensure_seed(ep_seed, ep_seed_given);
        mdev::RngStream stream(ep_seed, 0);
        est = ep_method == "mc" ? mdev::exit_mc(body, ep_t, ep_samples, stream)
                                : mdev::exit_is(body, ep_t, ep_samples, stream);
      } else {
        throw std::domain_error("method must be exact|asymptotic|mc|is");
      }
      json cfg = {{"body", load_json_file(ep_body)},
                  {"t", ep_t},
                  {"method", ep_method},
                  {"samples", ep_samples}};
      emit(ep_out, mdev::estimate_to_json(est).dump(2) + "\n", "exit-prob", cfg,
           cfg, ep_seed, start);
    }

    if (*ci) {
      std::vector<mdev::IntervalMethod> methods;
      if (ci_method == "both" || ci_method == "moderate_deviation")
        methods.push_back(mdev::IntervalMethod::moderate_deviation);
      if (ci_method == "both" || ci_method == "normal")
        methods.push_back(mdev::IntervalMethod::normal);
      if (methods.empty())
        throw std::domain_error("method must be moderate_deviation|normal|both");
      bool simulate_coverage = !ci_family.empty() && ci_trials > 0;
      std::optional<mdev::ParametricFamily> fam;
      Eigen::VectorXd theta = Eigen::VectorXd::Constant(1, ci_theta);
      if (simulate_coverage) {
        fam = mdev::family_from_json(load_json_file(ci_family));
        ci_seed = ensure_seed(ci_seed, ci_seed_given);
      }
      std::ostringstream os;
      os.precision(10);
      os << "alpha,method,half_width,coverage,std_error\r\n";
      for (auto m : methods) {
        double sigma = simulate_coverage ? fam->obs_sd(theta) : ci_sigma;
        double hw = m == mdev::IntervalMethod::moderate_deviation
                        ? mdev::md_half_width(sigma, ci_n, ci_alpha)
                        : mdev::normal_half_width(sigma, ci_n, ci_alpha);
        os << ci_alpha << "," << mdev::to_string(m) << "," << hw;
        if (simulate_coverage) {
          auto cov = mdev::coverage_sim(*fam, theta, ci_n, ci_alpha, m,
                                        ci_trials, mdev::RngStream(ci_seed, 0));
          os << "," << cov.coverage << "," << cov.std_error;
        } else {
          os << ",,";
        }
        os << "\r\n";
      }
      json cfg = {{"alpha", ci_alpha}, {"n", ci_n},         {"sigma", ci_sigma},
                  {"method", ci_method}, {"family", ci_family}, {"theta", ci_theta},
                  {"trials", ci_trials}};
      emit(ci_out, os.str(), "ci", cfg, cfg, ci_seed, start);
    }

    if (*ti) {
      mdev::TiltableDistribution dist =
          mdev::distribution_from_json(load_json_file(ti_dist));
      mdev::TiltSolution sol = dist.solve_tilt(parse_vector(ti_v));
      json cfg = {{"dist", load_json_file(ti_dist)}, {"v", ti_v}};
      emit(ti_out, mdev::tilt_solution_to_json(sol).dump(2) + "\n", "tilt", cfg,
           cfg, 0, start);
    }

    if (*si) {
      json cfg = load_json_file(si_config);
      mdev::ExperimentConfig config = mdev::experiment_config_from_json(cfg);
      if (si_seed_given) {
        config.master_seed = si_seed;
        cfg["seed"] = si_seed;
      }
      mdev::ExperimentReport report = mdev::efficiency_sweep(config);
      report.config_hash = mdev::config_hash(cfg);
      std::string json_path = si_out + ".json";
      std::string csv_path = si_out + ".csv";
      mdev::atomic_write(json_path, mdev::report_to_json(report).dump(2) + "\n");
      mdev::atomic_write(csv_path, mdev::report_to_csv(report));
      write_manifest(si_out, "simulate", {{"config", si_config}}, cfg,
                     config.master_seed, start, {json_path, csv_path});
      std::cout << "wrote " << json_path << " and " << csv_path << "\n";
    }

    if (*ca) {
      json famj = load_json_file(ca_family);
      mdev::ParametricFamily fam = mdev::family_from_json(famj);
      Eigen::VectorXd theta0 = parse_vector(ca_theta0);
      if (!fam.in_domain(theta0))
        throw std::domain_error("theta0 outside the family domain");
      std::vector<Eigen::VectorXd> grid;
      for (double u : parse_list(ca_grid)) {
        Eigen::VectorXd uv = Eigen::VectorXd::Zero(fam.param_dim());
        uv[0] = u;
        grid.push_back(uv);
      }
      json out;
      Eigen::MatrixXd info = fam.fisher(theta0).matrix();
      json infoj = json::array();
      for (int i = 0; i < info.rows(); ++i) {
        json row = json::array();
        for (int k = 0; k < info.cols(); ++k) row.push_back(info(i, k));
        infoj.push_back(row);
      }
      out["a1"] = json{{"fisher_spd", true}, {"fisher", infoj}};
      out["a2"] = mdev::a2_report_to_json(mdev::check_a2(fam, theta0, grid));
      if (!ca_body.empty()) {
        mdev::ConvexBody body = mdev::body_from_json(load_json_file(ca_body));
        out["b"] = mdev::b_report_to_json(body.validate_b_assumptions());
      }
      json cfg = {{"family", famj}, {"theta0", ca_theta0}, {"grid", ca_grid}};
      emit(ca_out, out.dump(2) + "\n", "check-assumptions", cfg, cfg, 0, start);
    }

    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
