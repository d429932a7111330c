#include "rdpg/limit_theory.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "rdpg/error.hpp"

namespace rdpg {

namespace {

// Inverts a symmetric PSD moment matrix, rejecting numerically rank-deficient
// input. `what` names the matrix in the error message.
Matrix invert_full_rank(const Matrix& M, const char* what) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, std::string(what) + " eigensolve failed");
  const double lmax = es.eigenvalues().cwiseAbs().maxCoeff();
  const double lmin = es.eigenvalues().minCoeff();
  if (lmin <= 1e-12 * std::max(1.0, lmax)) {
    std::ostringstream msg;
    msg << what << " is rank deficient (smallest eigenvalue " << lmin << ")";
    throw Error(ErrorCode::FullRankViolation, msg.str());
  }
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().asDiagonal() *
         es.eigenvectors().transpose();
}

double checked_atom_probability(double p, Eigen::Index atom) {
  if (p < -1e-12 || p > 1.0 + 1e-12) {
    std::ostringstream msg;
    msg << "atom " << atom << " has inner product " << p << " with w, outside [0,1]";
    throw Error(ErrorCode::ProbabilityOutOfRange, msg.str());
  }
  return std::min(1.0, std::max(0.0, p));
}

void validate_mixture(const ScalarMixture& mix) {
  if (!(mix.lambda > 0.0 && mix.lambda < 1.0))
    throw std::invalid_argument("lambda must lie in (0,1)");
  if (!(0.0 < mix.p && mix.p < mix.q && mix.q < 1.0))
    throw std::invalid_argument("need 0 < p < q < 1");
}

}  // namespace

PopulationSummary moments(const InnerProductDistribution& dist) {
  validate_distribution(dist);
  const auto k = dist.atoms.rows();
  PopulationSummary s;
  s.mu = Vector::Zero(dist.dim);
  s.Delta = Matrix::Zero(dist.dim, dist.dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    s.mu += dist.weights(i) * dist.atoms.row(i).transpose();
    s.Delta += dist.weights(i) *
               (dist.atoms.row(i).transpose() * dist.atoms.row(i));
  }
  s.DeltaTilde = Matrix::Zero(dist.dim, dist.dim);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double mx = s.mu.dot(dist.atoms.row(i).transpose());
    if (mx <= 0.0) {
      std::ostringstream msg;
      msg << "mu'x = " << mx << " for atom " << i;
      throw Error(ErrorCode::NonpositiveMeanInnerProduct, msg.str());
    }
    s.DeltaTilde += (dist.weights(i) / mx) *
                    (dist.atoms.row(i).transpose() * dist.atoms.row(i));
  }
  return s;
}

Matrix sigma_ase(const InnerProductDistribution& dist, const Vector& w) {
  if (w.size() != dist.dim) throw std::invalid_argument("w dimension mismatch");
  const PopulationSummary s = moments(dist);
  const Matrix delta_inv = invert_full_rank(s.Delta, "Delta");

  Matrix middle = Matrix::Zero(dist.dim, dist.dim);
  for (Eigen::Index i = 0; i < dist.atoms.rows(); ++i) {
    const double p = checked_atom_probability(dist.atoms.row(i).dot(w), i);
    middle += dist.weights(i) * p * (1.0 - p) *
              (dist.atoms.row(i).transpose() * dist.atoms.row(i));
  }
  Matrix sigma = delta_inv * middle * delta_inv;
  return 0.5 * (sigma + sigma.transpose());
}

Matrix sigma_lse(const InnerProductDistribution& dist, const Vector& w_bar) {
  if (w_bar.size() != dist.dim) throw std::invalid_argument("w dimension mismatch");
  if (dist.eta_margin <= 0.0) {
    std::ostringstream msg;
    msg << "eta margin " << dist.eta_margin << " must be strictly positive";
    throw Error(ErrorCode::EtaViolation, msg.str());
  }
  const PopulationSummary s = moments(dist);
  const Matrix dt_inv = invert_full_rank(s.DeltaTilde, "DeltaTilde");
  const double mw = s.mu.dot(w_bar);
  if (mw <= 0.0)
    throw Error(ErrorCode::NonpositiveMeanInnerProduct, "mu'w_bar must be positive");

  Matrix sigma = Matrix::Zero(dist.dim, dist.dim);
  for (Eigen::Index i = 0; i < dist.atoms.rows(); ++i) {
    const Vector x = dist.atoms.row(i).transpose();
    const double p = checked_atom_probability(x.dot(w_bar), i);
    const Vector u = dt_inv * x / s.mu.dot(x) - w_bar / (2.0 * mw);
    sigma += dist.weights(i) * (p * (1.0 - p) / mw) * (u * u.transpose());
  }
  return 0.5 * (sigma + sigma.transpose());
}

Vector lse_target(const InnerProductDistribution& dist, const Vector& w_bar,
                  int n) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const PopulationSummary s = moments(dist);
  const double mw = s.mu.dot(w_bar);
  if (mw <= 0.0)
    throw Error(ErrorCode::NonpositiveMeanInnerProduct, "mu'w_bar must be positive");
  return w_bar / std::sqrt(static_cast<double>(n) * mw);
}

ScalarMixture make_scalar_mixture(double lambda, double p, double q) {
  ScalarMixture mix{lambda, p, q};
  validate_mixture(mix);
  return mix;
}

ScalarMixtureVariances scalar_mixture_variances(const ScalarMixture& mix) {
  validate_mixture(mix);
  const double l = mix.lambda, p = mix.p, q = mix.q;
  ScalarMixtureVariances out;
  out.delta = l * p * p + (1.0 - l) * q * q;
  const double dinv2 = 1.0 / (out.delta * out.delta);
  out.sigma2_p = dinv2 * (l * p * p * (1.0 - p * p) * p * p +
                          (1.0 - l) * p * q * (1.0 - p * q) * q * q);
  out.sigma2_q = dinv2 * (l * p * q * (1.0 - p * q) * p * p +
                          (1.0 - l) * q * q * (1.0 - q * q) * q * q);
  return out;
}

double two_normal_threshold(double n, double lambda, double p, double sigma_p,
                            double q, double sigma_q) {
  if (p == q) throw std::invalid_argument("p and q must differ");
  // Log of (lambda/sigma_p) phi_n,p(x) minus log of the q-side counterpart;
  // the classifier switches class where this crosses zero.
  const auto g = [&](double x) {
    return std::log(lambda) - std::log(sigma_p) -
           n * (x - p) * (x - p) / (2.0 * sigma_p * sigma_p) -
           std::log(1.0 - lambda) + std::log(sigma_q) +
           n * (x - q) * (x - q) / (2.0 * sigma_q * sigma_q);
  };
  double lo = std::min(p, q) - 1.0;
  double hi = std::max(p, q) + 1.0;
  double glo = g(lo), ghi = g(hi);
  if (glo == 0.0) return lo;
  if (ghi == 0.0) return hi;
  if ((glo > 0.0) == (ghi > 0.0)) {
    std::ostringstream msg;
    msg << "no sign change of the density log-ratio on [" << lo << ", " << hi << "]";
    throw Error(ErrorCode::NoRootInBracket, msg.str());
  }
  for (int it = 0; it < 200 && hi - lo > 1e-12; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double gm = g(mid);
    if (gm == 0.0) return mid;
    if ((gm > 0.0) == (glo > 0.0)) {
      lo = mid;
      glo = gm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

double lr_threshold(int n, const ScalarMixture& mix) {
  validate_mixture(mix);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto v = scalar_mixture_variances(mix);
  return two_normal_threshold(static_cast<double>(n), mix.lambda, mix.p,
                              std::sqrt(v.sigma2_p), mix.q, std::sqrt(v.sigma2_q));
}

double two_normal_error(double n, double lambda, double p, double sigma_p,
                        double q, double sigma_q) {
  const double x = two_normal_threshold(n, lambda, p, sigma_p, q, sigma_q);
  const double rn = std::sqrt(n);
  return lambda * (1.0 - normal_cdf(rn * (x - p) / sigma_p)) +
         (1.0 - lambda) * normal_cdf(rn * (x - q) / sigma_q);
}

double classification_error(int n, const ScalarMixture& mix) {
  validate_mixture(mix);
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  const auto v = scalar_mixture_variances(mix);
  return two_normal_error(static_cast<double>(n), mix.lambda, mix.p,
                          std::sqrt(v.sigma2_p), mix.q, std::sqrt(v.sigma2_q));
}

double tradeoff_ratio(int n, int m, const ScalarMixture& mix) {
  if (n < 1 || m < 1) throw std::invalid_argument("n and m must be >= 1");
  return classification_error(n + m, mix) / classification_error(n + 1, mix);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

namespace {

// Regularized lower incomplete gamma P(a, x), series for x < a+1 and
// continued fraction otherwise (Numerical Recipes style).
double gamma_p(double a, double x) {
  if (x <= 0.0) return 0.0;
  const double gln = std::lgamma(a);
  if (x < a + 1.0) {
    double ap = a, sum = 1.0 / a, del = sum;
    for (int i = 0; i < 500; ++i) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * 1e-15) break;
    }
    return sum * std::exp(-x + a * std::log(x) - gln);
  }
  double b = x + 1.0 - a, c = 1e300, d = 1.0 / b, h = d;
  for (int i = 1; i < 500; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < 1e-300) d = 1e-300;
    c = b + an / c;
    if (std::abs(c) < 1e-300) c = 1e-300;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-15) break;
  }
  return 1.0 - std::exp(-x + a * std::log(x) - gln) * h;
}

}  // namespace

double chi_squared_cdf(double x, int dof) {
  if (dof < 1) throw std::invalid_argument("dof must be >= 1");
  return gamma_p(0.5 * dof, 0.5 * std::max(0.0, x));
}

double chi_squared_quantile(double mass, int dof) {
  if (!(mass > 0.0 && mass < 1.0))
    throw std::invalid_argument("mass must lie in (0,1)");
  double lo = 0.0, hi = 1.0;
  while (chi_squared_cdf(hi, dof) < mass) hi *= 2.0;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * (1.0 + hi); ++it) {
    const double mid = 0.5 * (lo + hi);
    (chi_squared_cdf(mid, dof) < mass ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace rdpg
