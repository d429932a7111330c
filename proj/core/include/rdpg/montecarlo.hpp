#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rdpg/limit_theory.hpp"
#include "rdpg/model.hpp"
#include "rdpg/oos.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

struct ExperimentConfig {
  InnerProductDistribution dist;
  std::vector<int> n_values;   // ascending
  int trials = 100;
  std::vector<OOSMethod> methods;
  std::uint64_t master_seed = 0;
  MLSolverOptions ml_options;
  int workers = 0;  // 0: RDPG_OOS_WORKERS env var, then hardware concurrency
};

struct TrialRecord {
  int trial = 0;
  int n = 0;
  OOSMethod method = OOSMethod::LLS_ASE;
  int atom = -1;        // atom index of the true OOS latent position
  Vector estimate;      // Procrustes-aligned OOS estimate
  Vector target;        // w_bar for ASE methods, w_tilde for LSE
  double error = 0.0;   // ||estimate - target||
  SolverDiagnostics diagnostics;
  bool failed = false;
  std::string failure;
};

struct SummaryEntry {
  int n = 0;
  OOSMethod method = OOSMethod::LLS_ASE;
  int atom = -1;
  int count = 0;     // successful trials aggregated here
  int failures = 0;
  Vector mean;       // mean aligned estimate
  // Sample covariance of scale*(estimate - target), scale = sqrt(n) for ASE
  // methods and n for LSE, the CLT scalings.
  double scale = 0.0;
  Matrix covariance;
  Matrix predicted_covariance;  // sigma_ase / sigma_lse at this atom
  // Fractions of trials inside the predicted ellipses. The first pair uses
  // Mahalanobis radii 1 and 2 (39.35%/86.47% of the mass in d=2); the second
  // uses the radii enclosing 68%/95% of the chi^2_d mass.
  double coverage_1sigma = 0.0;
  double coverage_2sigma = 0.0;
  double coverage_mass68 = 0.0;
  double coverage_mass95 = 0.0;
  double median_error = 0.0;
  double q90_error = 0.0;
};

struct ExperimentSummary {
  std::vector<SummaryEntry> entries;
};

struct ExperimentResult {
  std::vector<TrialRecord> records;
  ExperimentSummary summary;
};

/// Per trial: draws n+1 latent positions, builds the graph on the first n,
/// embeds, OOS-extends the (n+1)-th vertex with each configured method,
/// aligns embeddings to the sampled truth (Procrustes), and records the
/// aligned estimate. Deterministic in (cfg, master_seed) regardless of the
/// worker count; per-method errors are recorded as per-trial failures rather
/// than aborting the run.
ExperimentResult run_clt_experiment(const ExperimentConfig& cfg);

struct RateRow {
  int n = 0;
  OOSMethod method = OOSMethod::LLS_ASE;
  double median_error = 0.0;
  double q90_error = 0.0;
  int failures = 0;
};

/// Error-quantile table over the configured n grid (at least two values;
/// otherwise Error(InsufficientGrid)).
std::vector<RateRow> run_rate_experiment(const ExperimentConfig& cfg);

/// Sample covariance of scale*(estimate - target) over records that must all
/// share (n, method, atom); denominator count-1.
Matrix empirical_covariance(const std::vector<TrialRecord>& records, double scale);

struct CoverageFractions {
  double coverage_1sigma = 0.0;
  double coverage_2sigma = 0.0;
};

/// Fractions of records whose scaled deviation from `center` has Mahalanobis
/// distance <= 1 (resp. <= 2) under predicted_cov.
CoverageFractions coverage_check(const std::vector<TrialRecord>& records,
                                 const Matrix& predicted_cov,
                                 const Vector& center, double scale);

/// Worker-count resolution used by the harness (cfg value, then the
/// RDPG_OOS_WORKERS environment variable, then hardware concurrency).
int resolve_workers(int requested);

}  // namespace rdpg
