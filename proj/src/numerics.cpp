#include "mdev/numerics.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace mdev {

namespace {

// Lanczos, g = 7, 9 terms.
const double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double log_gamma_lanczos(double x) {
  // valid for x >= 0.5
  double a = kLanczos[0];
  double t = x + 6.5;
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (x + i - 1.0);
  return 0.5 * std::log(2.0 * M_PI) + (x - 0.5) * std::log(t) - t + std::log(a);
}

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw std::domain_error("log_gamma: requires x > 0");
  if (x < 0.5) {
    // reflection keeps accuracy near 0
    return std::log(M_PI / std::sin(M_PI * x)) - log_gamma_lanczos(1.0 - x);
  }
  return log_gamma_lanczos(x);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }

double log_sphere_mgf(int k, double z) {
  if (k < 1) throw std::domain_error("log_sphere_mgf: requires k >= 1");
  if (!(z >= 0.0)) throw std::domain_error("log_sphere_mgf: requires z >= 0");
  if (k == 1) return z + std::log1p(std::exp(-2.0 * z)) - std::log(2.0);  // cosh
  if (z < 1e-8) return z * z / (2.0 * k);
  const double nu = 0.5 * k - 1.0;
  double log_i;
  if (z < 500.0) {
    log_i = std::log(std::cyl_bessel_i(nu, z));
  } else {
    // uniform asymptotic expansion of I_nu for large argument
    double mu4 = 4.0 * nu * nu;
    double c1 = -(mu4 - 1.0) / (8.0 * z);
    double c2 = (mu4 - 1.0) * (mu4 - 9.0) / (128.0 * z * z);
    log_i = z - 0.5 * std::log(2.0 * M_PI * z) + std::log1p(c1 + c2);
  }
  return log_gamma(0.5 * k) + nu * (std::log(2.0) - std::log(z)) + log_i;
}

namespace {

// Acklam's rational approximation, then one Halley step.
double quantile_initial(double p) {
  static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                              -2.759285104469687e+02, 1.383577518672690e+02,
                              -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                              -1.556989798598866e+02, 6.680131188771972e+01,
                              -1.328068155288572e+01};
  static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                              -2.400758277161838e+00, -2.549732539343734e+00,
                              4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                              2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1.0 - plow;
  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > phigh) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5, r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw std::domain_error("normal_quantile: requires 0 < p < 1");
  double x = quantile_initial(p);
  // Halley refinement against the exact erfc-based CDF
  for (int i = 0; i < 2; ++i) {
    double e = normal_cdf(x) - p;
    double u = e * std::sqrt(2.0 * M_PI) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

namespace {

// log of the lower regularized gamma P(a, x) via its series, x < a + 1.
double log_gamma_p_series(double a, double x) {
  double sum = 1.0, term = 1.0, ap = a;
  for (int n = 0; n < 500; ++n) {
    ap += 1.0;
    term *= x / ap;
    sum += term;
    if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
  }
  return a * std::log(x) - x - log_gamma(a + 1.0) + std::log(sum);
}

// log of Q(a, x) via Lentz continued fraction, x >= a + 1.
double log_gamma_q_cf(double a, double x) {
  const double tiny = 1e-300;
  double b = x + 1.0 - a, c = 1.0 / tiny, d = 1.0 / b, h = d;
  for (int i = 1; i <= 500; ++i) {
    double an = -static_cast<double>(i) * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::fabs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::fabs(c) < tiny) c = tiny;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < 1e-16) break;
  }
  return a * std::log(x) - x - log_gamma(a) + std::log(h);
}

}  // namespace

TailProb gamma_q(double a, double x) {
  if (!(a > 0.0)) throw std::domain_error("gamma_q: requires a > 0");
  if (x < 0.0) throw std::domain_error("gamma_q: requires x >= 0");
  if (x == 0.0) return {1.0, 0.0};
  double log_q;
  if (x < a + 1.0) {
    double log_p = log_gamma_p_series(a, x);
    // here P is not tiny, so 1 - P is safe in linear space
    double p = std::exp(log_p);
    log_q = std::log1p(-std::min(p, 1.0 - 1e-17));
  } else {
    log_q = log_gamma_q_cf(a, x);
  }
  double q = log_q < -745.0 ? 0.0 : std::exp(log_q);
  if (q > 1.0) q = 1.0;
  return {q, log_q};
}

TailProb chisq_upper_tail_full(int d, double u) {
  if (d < 1) throw std::domain_error("chisq_upper_tail: requires d >= 1");
  if (u < 0.0) throw std::domain_error("chisq_upper_tail: requires u >= 0");
  return gamma_q(0.5 * d, 0.5 * u);
}

double chisq_upper_tail(int d, double u) {
  return chisq_upper_tail_full(d, u).value;
}

SpdMatrix::SpdMatrix(const Eigen::MatrixXd& m) : mat_(m) {
  if (m.rows() != m.cols() || m.rows() < 1 || m.rows() > 16)
    throw std::domain_error("SpdMatrix: requires square matrix, 1 <= d <= 16");
  double scale = m.cwiseAbs().maxCoeff();
  double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (scale > 0.0 && asym > 1e-12 * scale)
    throw std::domain_error("SpdMatrix: not symmetric to 1e-12 relative");
  mat_ = 0.5 * (m + m.transpose());
  cholesky(mat_);  // throws if not positive definite
}

Eigen::MatrixXd cholesky(const Eigen::MatrixXd& m) {
  const int d = static_cast<int>(m.rows());
  Eigen::MatrixXd l = Eigen::MatrixXd::Zero(d, d);
  for (int j = 0; j < d; ++j) {
    double s = m(j, j);
    for (int k = 0; k < j; ++k) s -= l(j, k) * l(j, k);
    if (!(s > 0.0)) {
      std::ostringstream os;
      os << "cholesky: pivot " << j << " not positive (" << s << ")";
      throw std::domain_error(os.str());
    }
    l(j, j) = std::sqrt(s);
    for (int i = j + 1; i < d; ++i) {
      double t = m(i, j);
      for (int k = 0; k < j; ++k) t -= l(i, k) * l(j, k);
      l(i, j) = t / l(j, j);
    }
  }
  return l;
}

SpdMatrix spd_sqrt(const SpdMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.matrix());
  Eigen::VectorXd roots = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  Eigen::MatrixXd s =
      es.eigenvectors() * roots.asDiagonal() * es.eigenvectors().transpose();
  return SpdMatrix(s);
}

SpdMatrix spd_inverse(const SpdMatrix& m) {
  Eigen::LLT<Eigen::MatrixXd> llt(m.matrix());
  Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(m.dim(), m.dim()));
  return SpdMatrix(0.5 * (inv + inv.transpose()));
}

}  // namespace mdev
