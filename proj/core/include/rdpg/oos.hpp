#pragma once

#include <string>

#include "rdpg/model.hpp"
#include "rdpg/spectral.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

enum class OOSMethod { LLS_ASE, ML_ASE, LLS_LSE };

const char* to_string(OOSMethod method);          // "lls-ase" | "ml-ase" | "lls-lse"
OOSMethod oos_method_from_string(const std::string& name);

struct SolverDiagnostics {
  int iterations = 0;
  double final_projected_gradient_norm = 0.0;
  int active_constraints = 0;
};

struct OOSEstimate {
  Vector w;
  OOSMethod method = OOSMethod::LLS_ASE;
  SolverDiagnostics diagnostics;  // populated by the ML solver, zeros otherwise
};

struct MLSolverOptions {
  double epsilon = 0.05;             // constraint margin; keep < eta of F
  int max_iterations = 5000;
  double gradient_tolerance = 1e-8;  // projected-gradient norm target
  double backtrack_shrink = 0.5;
  double sufficient_decrease = 1e-4;
};

/// Least-squares OOS extension for ASE: argmin_w sum_i (a_i - Xhat_i'w)^2,
/// evaluated through the closed form S^{-1/2} U' a.
OOSEstimate oos_ase_lls(const Embedding& emb, const OOSConnectivity& conn);

struct LogLikelihood {
  double value = 0.0;
  Vector gradient;
  Matrix hessian;
};

/// Plug-in Bernoulli log likelihood of the OOS edges at w, with gradient and
/// Hessian. Every estimated probability Xhat_i'w must lie strictly inside
/// (0, 1); otherwise Error(DomainViolation) names the first offender.
LogLikelihood loglik(const Embedding& emb, const OOSConnectivity& conn,
                     const Vector& w);

/// Constrained maximum-likelihood OOS extension for ASE: projected gradient
/// ascent over the polytope {w : eps <= Xhat_i'w <= 1-eps for all i},
/// warm-started from the (feasibility-restored) least-squares solution.
/// Returns a feasible KKT point of the concave program.
OOSEstimate oos_ase_ml(const Embedding& emb, const OOSConnectivity& conn,
                       const MLSolverOptions& opts = {});

/// Least-squares OOS extension for LSE on degree-normalized responses
/// b_i = a_i / sqrt(d_v d_i); estimates w_bar / sqrt(n mu'w_bar).
OOSEstimate oos_lse_lls(const Embedding& emb, const OOSConnectivity& conn);

}  // namespace rdpg
