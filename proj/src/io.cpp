#include "mdev/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mdev {

namespace {

Eigen::VectorXd vector_from_json(const json& j) {
  if (j.is_number()) return Eigen::VectorXd::Constant(1, j.get<double>());
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd matrix_from_json(const json& j) {
  if (j.is_number()) return Eigen::MatrixXd::Constant(1, 1, j.get<double>());
  const std::size_t rows = j.size();
  const std::size_t cols = j[0].size();
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
  return m;
}

json vector_to_json(const Eigen::VectorXd& v) {
  json j = json::array();
  for (int i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

}  // namespace

ConvexBody body_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "ball")
    return ConvexBody::ball(j.at("dim").get<int>(), j.at("r").get<double>());
  if (kind == "ellipsoid")
    return ConvexBody::ellipsoid(vector_from_json(j.at("sigma")),
                                 j.at("r").get<double>());
  throw std::domain_error("body spec: kind must be 'ball' or 'ellipsoid'");
}

json body_to_json(const ConvexBody& body) {
  json j;
  switch (body.kind()) {
    case ConvexBody::Kind::ball:
      j["kind"] = "ball";
      j["dim"] = body.dim();
      j["r"] = body.radius();
      break;
    case ConvexBody::Kind::ellipsoid:
      j["kind"] = "ellipsoid";
      j["sigma"] = vector_to_json(body.sigma());
      j["r"] = body.radius();
      break;
    case ConvexBody::Kind::generic:
      throw std::domain_error("body spec: generic bodies have no JSON form");
  }
  return j;
}

ParametricFamily family_from_json(const json& j) {
  std::string name = j.at("family").get<std::string>();
  if (name == "gaussian_location")
    return ParametricFamily::gaussian_location(j.value("sigma2", 1.0));
  if (name == "gaussian_mean_vector")
    return ParametricFamily::gaussian_mean_vector(matrix_from_json(j.at("cov")));
  if (name == "bernoulli") return ParametricFamily::bernoulli();
  if (name == "exponential_rate") return ParametricFamily::exponential_rate();
  throw std::domain_error("family spec: unknown family '" + name + "'");
}

TiltableDistribution distribution_from_json(const json& j) {
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "gaussian")
    return TiltableDistribution::gaussian(vector_from_json(j.at("mean")),
                                          matrix_from_json(j.at("cov")));
  if (kind == "discrete") {
    std::vector<std::pair<Eigen::VectorXd, double>> atoms;
    for (const auto& row : j.at("atoms")) {
      const std::size_t m = row.size();
      Eigen::VectorXd x(m - 1);
      for (std::size_t i = 0; i + 1 < m; ++i) x[i] = row[i].get<double>();
      atoms.emplace_back(x, row[m - 1].get<double>());
    }
    return TiltableDistribution::bounded_discrete(std::move(atoms));
  }
  if (kind == "density") {
    Eigen::VectorXd lo = vector_from_json(j.at("box").at("lo"));
    Eigen::VectorXd hi = vector_from_json(j.at("box").at("hi"));
    if (lo.size() != 1)
      throw std::domain_error("distribution spec: density tables are 1-d only");
    std::vector<std::pair<double, double>> table;
    for (const auto& row : j.at("table"))
      table.emplace_back(row[0].get<double>(), row[1].get<double>());
    std::sort(table.begin(), table.end());
    auto dens = [table](const Eigen::VectorXd& x) {
      double t = x[0];
      if (table.empty()) return 0.0;
      if (t <= table.front().first) return table.front().second;
      if (t >= table.back().first) return table.back().second;
      auto it = std::lower_bound(table.begin(), table.end(),
                                 std::make_pair(t, -1.0));
      auto prev = it - 1;
      double w = (t - prev->first) / (it->first - prev->first);
      return prev->second + w * (it->second - prev->second);
    };
    return TiltableDistribution::bounded_density(lo, hi, dens);
  }
  throw std::domain_error("distribution spec: unknown kind '" + kind + "'");
}

json estimate_to_json(const ExitProbEstimate& e) {
  json j;
  j["value"] = e.value;
  j["log_value"] = std::isfinite(e.log_value) ? json(e.log_value) : json(nullptr);
  j["method"] = to_string(e.method);
  j["std_error"] = e.std_error;
  j["n_samples"] = e.n_samples;
  j["seed"] = e.seed ? json(*e.seed) : json(nullptr);
  j["warnings"] = e.warnings;
  return j;
}

json tilt_solution_to_json(const TiltSolution& s) {
  json j;
  j["v"] = vector_to_json(s.v);
  j["h"] = vector_to_json(s.h);
  j["phi"] = s.phi;
  j["rate"] = s.rate;
  j["lambda_signed"] = s.lambda_signed();
  j["iterations"] = s.iterations;
  json cov = json::array();
  for (int i = 0; i < s.tilted_cov.rows(); ++i) {
    json row = json::array();
    for (int k = 0; k < s.tilted_cov.cols(); ++k) row.push_back(s.tilted_cov(i, k));
    cov.push_back(row);
  }
  j["tilted_cov"] = cov;
  return j;
}

json a2_report_to_json(const A2Report& r) {
  json j;
  j["c21"] = r.c21;
  j["c22"] = r.c22;
  j["c23"] = r.c23;
  j["c24"] = r.c24;
  j["pass"] = r.pass;
  j["singular_mass"] = r.singular_mass;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    jr["u"] = vector_to_json(row.u);
    jr["res_21"] = row.res_21;
    jr["res_22"] = row.res_22;
    jr["res_24"] = row.res_24;
    jr["singular_mass"] = row.singular_mass;
    rows.push_back(jr);
  }
  j["rows"] = rows;
  return j;
}

namespace {
std::string check_to_string(CheckResult c) {
  switch (c) {
    case CheckResult::pass: return "pass";
    case CheckResult::fail: return "fail";
    case CheckResult::unknown: return "unknown";
  }
  return "?";
}
}  // namespace

json b_report_to_json(const BodyAssumptionReport& r) {
  json j;
  j["b1"] = check_to_string(r.b1);
  j["b2"] = check_to_string(r.b2);
  j["b3"] = check_to_string(r.b3);
  j["curvature_bounds"] = {r.curvature_lo, r.curvature_hi};
  j["convex_orientation"] = r.convex_orientation;
  return j;
}

ExperimentConfig experiment_config_from_json(const json& j) {
  ExperimentConfig c;
  c.family = family_from_json(j.at("family"));
  std::string est = j.value("estimator", "sample_mean");
  if (est == "sample_mean")
    c.estimator = EstimatorKind::sample_mean;
  else if (est == "mle")
    c.estimator = EstimatorKind::mle;
  else
    throw std::domain_error("config: estimator must be 'sample_mean' or 'mle'");
  c.theta0 = vector_from_json(j.at("theta0"));
  c.body = body_from_json(j.at("body"));
  c.bn_rule.c = j.at("bn").value("c", 1.0);
  c.bn_rule.gamma = j.at("bn").at("gamma").get<double>();
  for (const auto& n : j.at("n_grid")) c.n_grid.push_back(n.get<long long>());
  c.cn_c0 = j.value("cn_c0", 1.0);
  c.theta_grid_points = j.value("theta_grid_points", 5);
  c.n_trials = j.value("trials", 100000LL);
  c.use_is = j.value("use_is", false);
  c.prefer_enumeration = j.value("prefer_enumeration", true);
  if (j.contains("seed")) c.master_seed = j.at("seed").get<std::uint64_t>();
  return c;
}

json report_to_json(const ExperimentReport& r) {
  json j;
  // runtime_seconds is deliberately left out: it lives in the manifest
  // (start/end timestamps) so equal-seed reports stay byte-identical
  j["master_seed"] = r.master_seed;
  j["config_hash"] = r.config_hash;
  json rows = json::array();
  for (const auto& row : r.rows) {
    json jr;
    jr["n"] = row.n;
    jr["b_n"] = row.b_n;
    jr["theta"] = row.theta.size() ? vector_to_json(row.theta) : json(nullptr);
    jr["failed"] = row.failed;
    if (row.failed) {
      jr["error"] = row.error;
    } else {
      jr["numerator"] = estimate_to_json(row.numerator);
      jr["denominator"] = estimate_to_json(row.denominator);
      jr["ratio"] = row.ratio;
      jr["ratio_std_error"] = row.ratio_std_error;
    }
    rows.push_back(jr);
  }
  j["rows"] = rows;
  json sums = json::array();
  for (const auto& s : r.summaries) {
    json js;
    js["n"] = s.n;
    js["b_n"] = s.b_n;
    js["sup_ratio"] = s.sup_ratio;
    js["sup_ratio_std_error"] = s.sup_ratio_std_error;
    js["consistent_with_bound"] = s.consistent_with_bound;
    sums.push_back(js);
  }
  j["summaries"] = sums;
  return j;
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

std::string report_to_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "n,b_n,theta,numerator,numerator_std_error,numerator_method,"
        "denominator,denominator_std_error,denominator_method,"
        "ratio,ratio_std_error,failed,error\r\n";
  for (const auto& row : r.rows) {
    os << row.n << "," << row.b_n << ",";
    if (row.theta.size() == 1)
      os << row.theta[0];
    else if (row.theta.size() > 1) {
      std::ostringstream ts;
      ts.precision(12);
      for (int i = 0; i < row.theta.size(); ++i)
        ts << (i ? ";" : "") << row.theta[i];
      os << csv_escape(ts.str());
    }
    if (row.failed) {
      os << ",,,,,,,,," << 1 << "," << csv_escape(row.error);
    } else {
      os << "," << row.numerator.value << "," << row.numerator.std_error << ","
         << to_string(row.numerator.method) << "," << row.denominator.value
         << "," << row.denominator.std_error << ","
         << to_string(row.denominator.method) << "," << row.ratio << ","
         << row.ratio_std_error << ",0,";
    }
    os << "\r\n";
  }
  return os.str();
}

std::string config_hash(const json& j) {
  std::string dump = j.dump();  // nlohmann objects iterate in sorted key order
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void atomic_write(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("atomic_write: cannot open " + tmp);
    os << content;
    if (!os) throw std::runtime_error("atomic_write: write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0)
    throw std::runtime_error("atomic_write: rename failed for " + path);
}

}  // namespace mdev
