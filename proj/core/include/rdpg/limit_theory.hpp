#pragma once

#include "rdpg/model.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// First and second moments of the latent position distribution:
/// mu = E X_1, Delta = E X_1 X_1', DeltaTilde = E X_1 X_1'/(mu'X_1).
struct PopulationSummary {
  Vector mu;
  Matrix Delta;
  Matrix DeltaTilde;
};

PopulationSummary moments(const InnerProductDistribution& dist);

/// Asymptotic covariance of sqrt(n)(Q w_hat - w_bar) for the least-squares
/// ASE extension: Delta^{-1} E[X_1'w (1 - X_1'w) X_1 X_1'] Delta^{-1}.
Matrix sigma_ase(const InnerProductDistribution& dist, const Vector& w);

/// Asymptotic covariance of n(Q w_check - w_tilde) for the least-squares LSE
/// extension; requires a strictly positive eta margin.
Matrix sigma_lse(const InnerProductDistribution& dist, const Vector& w_bar);

/// Population Laplacian embedding of an OOS latent position:
/// w_tilde = w_bar / sqrt(n mu'w_bar).
Vector lse_target(const InnerProductDistribution& dist, const Vector& w_bar,
                  int n);

/// Two point masses on the line: F = lambda delta_p + (1-lambda) delta_q
/// with 0 < p < q < 1.
struct ScalarMixture {
  double lambda = 0.5;
  double p = 0.0;
  double q = 0.0;
};

ScalarMixture make_scalar_mixture(double lambda, double p, double q);

struct ScalarMixtureVariances {
  double sigma2_p = 0.0;
  double sigma2_q = 0.0;
  double delta = 0.0;  // lambda p^2 + (1-lambda) q^2
};

/// Per-class asymptotic variances of the scalar LLS OOS estimate.
ScalarMixtureVariances scalar_mixture_variances(const ScalarMixture& mix);

/// Threshold where the two weighted class densities
/// lambda N(p, sigma_p^2/n) and (1-lambda) N(q, sigma_q^2/n) cross, found by
/// bisection to 1e-12 on [min(p,q)-1, max(p,q)+1]. Throws
/// Error(NoRootInBracket) if the bracket shows no sign change.
double two_normal_threshold(double n, double lambda, double p, double sigma_p,
                            double q, double sigma_q);

/// two_normal_threshold specialized to the mixture's own variances.
double lr_threshold(int n, const ScalarMixture& mix);

/// Error of the rule "class p iff x < threshold" on the weighted two-normal
/// mixture, with the threshold at the density crossing:
/// lambda (1 - Phi(sqrt(n)(x*-p)/sigma_p)) + (1-lambda) Phi(sqrt(n)(x*-q)/sigma_q).
double two_normal_error(double n, double lambda, double p, double sigma_p,
                        double q, double sigma_q);

/// Bayes error of the threshold classifier on the two-normal mixture at
/// sample size n: lambda (1 - Phi(sqrt(n)(x*-p)/sigma_p))
/// + (1-lambda) Phi(sqrt(n)(x*-q)/sigma_q).
double classification_error(int n, const ScalarMixture& mix);

/// eta_{n+m} / eta_{n+1}: full-graph embedding error over OOS-extension error
/// for m new vertices on an n-vertex in-sample graph. Equals 1 at m = 1 and
/// is non-increasing in m.
double tradeoff_ratio(int n, int m, const ScalarMixture& mix);

// Small numeric helpers shared with the Monte Carlo module.
double normal_cdf(double z);
double chi_squared_cdf(double x, int dof);
double chi_squared_quantile(double mass, int dof);

}  // namespace rdpg
