#include "rdpg/montecarlo.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "rdpg/align.hpp"
#include "rdpg/error.hpp"
#include "rdpg/rng.hpp"
#include "rdpg/spectral.hpp"

namespace rdpg {

namespace {

bool is_ase_method(OOSMethod m) { return m != OOSMethod::LLS_LSE; }

double quantile(std::vector<double> v, double q) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(pos);
  if (lo + 1 >= v.size()) return v.back();
  const double frac = pos - static_cast<double>(lo);
  return v[lo] * (1.0 - frac) + v[lo + 1] * frac;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.trials < 1) throw std::invalid_argument("trials must be >= 1");
  if (cfg.n_values.empty()) throw std::invalid_argument("no n values");
  if (!std::is_sorted(cfg.n_values.begin(), cfg.n_values.end()))
    throw std::invalid_argument("n_values must be ascending");
  if (cfg.methods.empty()) throw std::invalid_argument("no methods configured");
  validate_distribution(cfg.dist);
  for (OOSMethod m : cfg.methods) {
    if (m == OOSMethod::LLS_LSE && cfg.dist.eta_margin <= 0.0)
      throw std::invalid_argument("lls-lse requires a distribution with eta_margin > 0");
    if (m == OOSMethod::ML_ASE && cfg.ml_options.epsilon >= cfg.dist.eta_margin)
      throw std::invalid_argument("ml-ase requires epsilon < eta_margin of the distribution");
  }
}

// One trial: returns one record per configured method, in cfg.methods order.
std::vector<TrialRecord> run_trial(const ExperimentConfig& cfg, int n, int trial,
                                   const Vector& mu) {
  const std::uint64_t child =
      derive(cfg.master_seed, stream::kTrial, static_cast<std::uint64_t>(n),
             static_cast<std::uint64_t>(trial));

  const LatentPositions all = sample_latent(cfg.dist, n + 1, derive(child, 0));
  LatentPositions in_sample{all.X.topRows(n)};
  const Vector w_bar = all.X.row(n).transpose();
  const int atom = atom_index(cfg.dist, w_bar);

  const AdjacencyMatrix A = sample_adjacency(in_sample, derive(child, 1));
  const OOSConnectivity conn = sample_oos(in_sample, w_bar, derive(child, 2));

  const bool want_ase = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                    is_ase_method);
  const bool want_lse = std::any_of(cfg.methods.begin(), cfg.methods.end(),
                                    [](OOSMethod m) { return m == OOSMethod::LLS_LSE; });
  const int d = cfg.dist.dim;

  // Shared per-trial state; embedding failures poison only the methods that
  // need the failed embedding.
  Embedding emb_ase, emb_lse;
  Matrix rot_ase, rot_lse;
  std::string ase_failure, lse_failure;
  if (want_ase) {
    try {
      emb_ase = ase(A, d);
      rot_ase = procrustes(emb_ase.positions, in_sample.X).Q;
    } catch (const std::exception& e) {
      ase_failure = e.what();
    }
  }
  Vector target_lse;
  if (want_lse) {
    try {
      emb_lse = lse(A, d);
      // Population Laplacian embedding of the sampled latents: rows of
      // T^{-1/2} X with t_i = sum_j X_j'X_i.
      const Vector t = in_sample.X * in_sample.X.colwise().sum().transpose();
      if (t.minCoeff() <= 0.0)
        throw Error(ErrorCode::ZeroExpectedDegree, "nonpositive expected degree");
      const Matrix xtilde = t.cwiseSqrt().cwiseInverse().asDiagonal() * in_sample.X;
      rot_lse = procrustes(emb_lse.positions, xtilde).Q;
      const double mw = mu.dot(w_bar);
      if (mw <= 0.0)
        throw Error(ErrorCode::NonpositiveMeanInnerProduct, "mu'w_bar <= 0");
      target_lse = w_bar / std::sqrt(static_cast<double>(n) * mw);
    } catch (const std::exception& e) {
      lse_failure = e.what();
    }
  }

  std::vector<TrialRecord> records;
  records.reserve(cfg.methods.size());
  for (OOSMethod method : cfg.methods) {
    TrialRecord rec;
    rec.trial = trial;
    rec.n = n;
    rec.method = method;
    rec.atom = atom;
    try {
      if (is_ase_method(method)) {
        if (!ase_failure.empty()) throw std::runtime_error(ase_failure);
        OOSEstimate est = method == OOSMethod::LLS_ASE
                              ? oos_ase_lls(emb_ase, conn)
                              : oos_ase_ml(emb_ase, conn, cfg.ml_options);
        rec.estimate = rot_ase.transpose() * est.w;
        rec.target = w_bar;
        rec.diagnostics = est.diagnostics;
      } else {
        if (!lse_failure.empty()) throw std::runtime_error(lse_failure);
        OOSEstimate est = oos_lse_lls(emb_lse, conn);
        rec.estimate = rot_lse.transpose() * est.w;
        rec.target = target_lse;
        rec.diagnostics = est.diagnostics;
      }
      rec.error = (rec.estimate - rec.target).norm();
    } catch (const std::exception& e) {
      rec.failed = true;
      rec.failure = e.what();
      rec.estimate = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
      rec.target = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
      rec.error = std::numeric_limits<double>::quiet_NaN();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<TrialRecord> run_all_trials(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const Vector mu = moments(cfg.dist).mu;
  const int workers = resolve_workers(cfg.workers);

  struct Task {
    int n;
    int trial;
  };
  std::vector<Task> tasks;
  for (int n : cfg.n_values)
    for (int t = 0; t < cfg.trials; ++t) tasks.push_back({n, t});

  // Each task writes to its own slot, so the result is independent of how
  // tasks are scheduled across workers.
  std::vector<std::vector<TrialRecord>> slots(tasks.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> panic{false};
  std::string panic_message;
  std::mutex panic_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t k = next.fetch_add(1);
      if (k >= tasks.size() || panic.load()) return;
      try {
        slots[k] = run_trial(cfg, tasks[k].n, tasks[k].trial, mu);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(panic_mutex);
        panic_message = e.what();
        panic.store(true);
        return;
      }
    }
  };

  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (panic.load())
    throw std::runtime_error("experiment worker failed: " + panic_message);

  std::vector<TrialRecord> records;
  records.reserve(tasks.size() * cfg.methods.size());
  for (auto& slot : slots)
    for (auto& rec : slot) records.push_back(std::move(rec));
  return records;
}

ExperimentSummary summarize(const ExperimentConfig& cfg,
                            const std::vector<TrialRecord>& records) {
  ExperimentSummary summary;
  const int d = cfg.dist.dim;
  const double r68 = std::sqrt(chi_squared_quantile(0.68, d));
  const double r95 = std::sqrt(chi_squared_quantile(0.95, d));

  std::map<std::tuple<int, int, int>, std::vector<const TrialRecord*>> groups;
  for (const auto& rec : records)
    groups[{rec.n, static_cast<int>(rec.method), rec.atom}].push_back(&rec);

  for (const auto& [key, group] : groups) {
    SummaryEntry entry;
    entry.n = std::get<0>(key);
    entry.method = static_cast<OOSMethod>(std::get<1>(key));
    entry.atom = std::get<2>(key);
    entry.scale = is_ase_method(entry.method)
                      ? std::sqrt(static_cast<double>(entry.n))
                      : static_cast<double>(entry.n);

    std::vector<TrialRecord> ok;
    for (const TrialRecord* rec : group) {
      if (rec->failed)
        ++entry.failures;
      else
        ok.push_back(*rec);
    }
    entry.count = static_cast<int>(ok.size());

    entry.mean = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
    entry.covariance = Matrix::Constant(d, d, std::numeric_limits<double>::quiet_NaN());
    entry.predicted_covariance =
        Matrix::Constant(d, d, std::numeric_limits<double>::quiet_NaN());

    if (entry.atom >= 0) {
      const Vector atom_pos = cfg.dist.atoms.row(entry.atom).transpose();
      try {
        entry.predicted_covariance = is_ase_method(entry.method)
                                         ? sigma_ase(cfg.dist, atom_pos)
                                         : sigma_lse(cfg.dist, atom_pos);
      } catch (const Error&) {
        // leave NaN: the predictor's hypotheses fail for this distribution
      }
    }

    if (!ok.empty()) {
      entry.mean = Vector::Zero(d);
      for (const auto& rec : ok) entry.mean += rec.estimate;
      entry.mean /= static_cast<double>(ok.size());

      std::vector<double> errors;
      for (const auto& rec : ok) errors.push_back(rec.error);
      entry.median_error = quantile(errors, 0.5);
      entry.q90_error = quantile(errors, 0.9);

      if (ok.size() >= 2) entry.covariance = empirical_covariance(ok, entry.scale);

      if (entry.atom >= 0 && !std::isnan(entry.predicted_covariance(0, 0))) {
        const Vector center = ok.front().target;
        try {
          const auto cov12 =
              coverage_check(ok, entry.predicted_covariance, center, entry.scale);
          entry.coverage_1sigma = cov12.coverage_1sigma;
          entry.coverage_2sigma = cov12.coverage_2sigma;
          // Radii enclosing 68%/95% of the chi^2_d mass, the d=1 reading of
          // "one/two generalized standard deviations".
          int inside68 = 0, inside95 = 0;
          Eigen::LLT<Matrix> llt(entry.predicted_covariance);
          for (const auto& rec : ok) {
            const Vector z = entry.scale * (rec.estimate - center);
            const double m2 = z.dot(llt.solve(z));
            if (m2 <= r68 * r68) ++inside68;
            if (m2 <= r95 * r95) ++inside95;
          }
          entry.coverage_mass68 = static_cast<double>(inside68) / ok.size();
          entry.coverage_mass95 = static_cast<double>(inside95) / ok.size();
        } catch (const Error&) {
          // singular predictor; coverages stay zero
        }
      }
    }
    summary.entries.push_back(std::move(entry));
  }
  return summary;
}

}  // namespace

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("RDPG_OOS_WORKERS")) {
    const int parsed = std::atoi(env);
    if (parsed > 0) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

ExperimentResult run_clt_experiment(const ExperimentConfig& cfg) {
  ExperimentResult result;
  result.records = run_all_trials(cfg);
  result.summary = summarize(cfg, result.records);
  return result;
}

std::vector<RateRow> run_rate_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_values.size() < 2)
    throw Error(ErrorCode::InsufficientGrid,
                "rate experiment needs at least two n values");
  const auto records = run_all_trials(cfg);

  std::map<std::pair<int, int>, std::vector<double>> errors;
  std::map<std::pair<int, int>, int> failures;
  for (const auto& rec : records) {
    const auto key = std::make_pair(rec.n, static_cast<int>(rec.method));
    if (rec.failed)
      ++failures[key];
    else
      errors[key].push_back(rec.error);
  }

  std::vector<RateRow> rows;
  for (int n : cfg.n_values) {
    for (OOSMethod m : cfg.methods) {
      const auto key = std::make_pair(n, static_cast<int>(m));
      RateRow row;
      row.n = n;
      row.method = m;
      row.median_error = quantile(errors[key], 0.5);
      row.q90_error = quantile(errors[key], 0.9);
      row.failures = failures.count(key) ? failures[key] : 0;
      rows.push_back(row);
    }
  }
  return rows;
}

Matrix empirical_covariance(const std::vector<TrialRecord>& records, double scale) {
  if (records.size() < 2)
    throw Error(ErrorCode::InsufficientRecords,
                "need at least two records for a sample covariance");
  for (const auto& rec : records) {
    if (rec.n != records.front().n || rec.method != records.front().method ||
        rec.atom != records.front().atom)
      throw std::invalid_argument("records must share (n, method, atom)");
  }
  const auto d = records.front().estimate.size();
  Vector mean = Vector::Zero(d);
  for (const auto& rec : records) mean += scale * (rec.estimate - rec.target);
  mean /= static_cast<double>(records.size());

  Matrix cov = Matrix::Zero(d, d);
  for (const auto& rec : records) {
    const Vector z = scale * (rec.estimate - rec.target) - mean;
    cov += z * z.transpose();
  }
  return cov / static_cast<double>(records.size() - 1);
}

CoverageFractions coverage_check(const std::vector<TrialRecord>& records,
                                 const Matrix& predicted_cov,
                                 const Vector& center, double scale) {
  if (records.empty())
    throw Error(ErrorCode::InsufficientRecords, "no records to check coverage on");
  Eigen::LLT<Matrix> llt(predicted_cov);
  if (llt.info() != Eigen::Success ||
      predicted_cov.diagonal().minCoeff() <= 0.0)
    throw Error(ErrorCode::SingularCovariance,
                "predicted covariance is not positive definite");

  int inside1 = 0, inside2 = 0;
  for (const auto& rec : records) {
    const Vector z = scale * (rec.estimate - center);
    const double m2 = z.dot(llt.solve(z));
    if (m2 <= 1.0) ++inside1;
    if (m2 <= 4.0) ++inside2;
  }
  CoverageFractions out;
  out.coverage_1sigma = static_cast<double>(inside1) / records.size();
  out.coverage_2sigma = static_cast<double>(inside2) / records.size();
  return out;
}

}  // namespace rdpg
