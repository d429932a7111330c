#pragma once

#include <string>
#include <vector>

#include "rdpg/model.hpp"
#include "rdpg/montecarlo.hpp"
#include "rdpg/oos.hpp"
#include "rdpg/spectral.hpp"

namespace rdpg::io {

/// 17 significant digits; round-trips 64-bit floats exactly.
std::string format_double(double x);

// Distribution config: JSON {"dim": int, "atoms": [[...],...], "weights": [...]}.
InnerProductDistribution read_distribution(const std::string& path);
void write_distribution(const std::string& path, const InnerProductDistribution& dist);

// Graph file: first line "n <count>", then one "i j" edge per line with
// 0-based indices and i < j.
AdjacencyMatrix read_edge_list(const std::string& path);
void write_edge_list(const std::string& path, const AdjacencyMatrix& A);

// Latent positions: JSON {"n": int, "dim": int, "positions": [[...],...]}.
LatentPositions read_latent(const std::string& path);
void write_latent(const std::string& path, const LatentPositions& latents);

// Embedding: JSON {"kind":"ase"|"lse", "d": int, "eigenvalues": [...],
// "positions": [[...],...], "degrees": [...] (lse only)}.
Embedding read_embedding(const std::string& path);
void write_embedding(const std::string& path, const Embedding& emb);

// OOS connectivity: JSON {"n": int, "a": [0/1,...], "w_bar": [...] (optional),
// "atom": int (optional)}.
OOSConnectivity read_oos(const std::string& path);
void write_oos(const std::string& path, const OOSConnectivity& conn, int atom = -1);

// OOS result: JSON {"method": ..., "w": [...], "diagnostics": {...}}.
void write_oos_result(const std::string& path, const OOSEstimate& est);

// Experiment config: JSON {"dist": {...} or "dist_file": path, "n_values":
// [...], "trials": int, "methods": [...], "master_seed": int, "ml": {...},
// "workers": int}. Relative dist_file paths resolve against the config file.
ExperimentConfig read_experiment_config(const std::string& path);

// Records CSV: trial,n,method,atom,est_1..est_d,target_1..target_d,error,failed.
void write_records_csv(const std::string& path,
                       const std::vector<TrialRecord>& records, int dim);

void write_summary_json(const std::string& path, const ExperimentSummary& summary);

// Rate table CSV: n,method,median_error,q90_error,failures.
void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows);

struct TradeoffRow {
  int n = 0;
  int m = 0;
  double lambda = 0.0, p = 0.0, q = 0.0;
  double eta_in = 0.0, eta_oos = 0.0, ratio = 0.0;
};

// Trade-off sweep CSV: n,m,lambda,p,q,eta_in,eta_oos,ratio.
void write_tradeoff_csv(const std::string& path, const std::vector<TradeoffRow>& rows);

}  // namespace rdpg::io
