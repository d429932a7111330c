#include "rdpg/io.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rdpg/error.hpp"

namespace rdpg::io {

namespace {

using nlohmann::json;

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ": " + what);
}

[[noreturn]] void parse_fail(const std::string& path, int line,
                             const std::string& what) {
  std::ostringstream msg;
  msg << path << ":" << line << ": " << what;
  throw Error(ErrorCode::ParseError, msg.str());
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    parse_fail(path, e.what());
  }
}

void save_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  out << j.dump(2) << "\n";
}

json require(const json& j, const char* key, const std::string& path) {
  if (!j.contains(key))
    parse_fail(path, std::string("expected key \"") + key + "\"");
  return j.at(key);
}

Matrix matrix_from_json(const json& rows, const std::string& path,
                        const char* what) {
  if (!rows.is_array() || rows.empty())
    parse_fail(path, std::string(what) + " must be a non-empty array of rows");
  const auto ncols = rows.front().size();
  Matrix M(rows.size(), ncols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].is_array() || rows[i].size() != ncols)
      parse_fail(path, std::string(what) + " rows must all have equal length");
    for (std::size_t j = 0; j < ncols; ++j)
      M(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          rows[i][j].get<double>();
  }
  return M;
}

json matrix_to_json(const Matrix& M) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < M.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < M.cols(); ++j) row.push_back(M(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const json& arr, const std::string& path, const char* what) {
  if (!arr.is_array()) parse_fail(path, std::string(what) + " must be an array");
  Vector v(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i)
    v(static_cast<Eigen::Index>(i)) = arr[i].get<double>();
  return v;
}

json vector_to_json(const Vector& v) {
  json arr = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v(i));
  return arr;
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

InnerProductDistribution read_distribution(const std::string& path) {
  const json j = load_json(path);
  const int dim = require(j, "dim", path).get<int>();
  Matrix atoms = matrix_from_json(require(j, "atoms", path), path, "atoms");
  Vector weights = vector_from_json(require(j, "weights", path), path, "weights");
  if (atoms.cols() != dim)
    parse_fail(path, "atom rows must have length dim");
  try {
    return make_distribution(std::move(atoms), std::move(weights));
  } catch (const std::invalid_argument& e) {
    parse_fail(path, e.what());
  }
}

void write_distribution(const std::string& path,
                        const InnerProductDistribution& dist) {
  json j;
  j["dim"] = dist.dim;
  j["atoms"] = matrix_to_json(dist.atoms);
  j["weights"] = vector_to_json(dist.weights);
  save_json(path, j);
}

AdjacencyMatrix read_edge_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) parse_fail(path, "cannot open file");

  std::string line;
  int lineno = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "expected header \"n <count>\"");
  ++lineno;

  long n = -1;
  {
    std::istringstream hdr(line);
    std::string tag;
    if (!(hdr >> tag >> n) || tag != "n" || n < 0)
      parse_fail(path, lineno, "expected header \"n <count>\"");
    std::string extra;
    if (hdr >> extra) parse_fail(path, lineno, "unexpected trailing token in header");
  }

  AdjacencyMatrix A;
  A.n = static_cast<int>(n);
  A.entries = Matrix::Zero(n, n);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    long i = -1, j = -1;
    if (!(row >> i >> j))
      parse_fail(path, lineno, "expected edge line \"i j\"");
    std::string extra;
    if (row >> extra) parse_fail(path, lineno, "unexpected trailing token");
    if (i < 0 || j < 0 || i >= n || j >= n)
      parse_fail(path, lineno, "vertex index out of range [0, n)");
    if (i >= j) parse_fail(path, lineno, "edges must satisfy i < j");
    if (A.entries(i, j) != 0.0) parse_fail(path, lineno, "duplicate edge");
    A.entries(i, j) = 1.0;
    A.entries(j, i) = 1.0;
  }
  return A;
}

void write_edge_list(const std::string& path, const AdjacencyMatrix& A) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  out << "n " << A.n << "\n";
  for (int i = 0; i < A.n; ++i)
    for (int j = i + 1; j < A.n; ++j)
      if (A.entries(i, j) != 0.0) out << i << " " << j << "\n";
}

LatentPositions read_latent(const std::string& path) {
  const json j = load_json(path);
  Matrix X = matrix_from_json(require(j, "positions", path), path, "positions");
  return LatentPositions{std::move(X)};
}

void write_latent(const std::string& path, const LatentPositions& latents) {
  json j;
  j["n"] = latents.X.rows();
  j["dim"] = latents.X.cols();
  j["positions"] = matrix_to_json(latents.X);
  save_json(path, j);
}

Embedding read_embedding(const std::string& path) {
  const json j = load_json(path);
  const std::string kind = require(j, "kind", path).get<std::string>();
  if (kind != "ase" && kind != "lse")
    parse_fail(path, "kind must be \"ase\" or \"lse\"");

  Embedding emb;
  emb.kind = kind == "ase" ? EmbeddingKind::ASE : EmbeddingKind::LSE;
  emb.eigenvalues = vector_from_json(require(j, "eigenvalues", path), path,
                                     "eigenvalues");
  emb.positions = matrix_from_json(require(j, "positions", path), path, "positions");
  const int d = require(j, "d", path).get<int>();
  if (emb.positions.cols() != d || emb.eigenvalues.size() != d)
    parse_fail(path, "d disagrees with positions/eigenvalues");
  if (emb.kind == EmbeddingKind::LSE) {
    emb.degrees = vector_from_json(require(j, "degrees", path), path, "degrees");
    if (emb.degrees.size() != emb.positions.rows())
      parse_fail(path, "degrees length must equal the number of vertices");
  }
  return emb;
}

void write_embedding(const std::string& path, const Embedding& emb) {
  json j;
  j["kind"] = emb.kind == EmbeddingKind::ASE ? "ase" : "lse";
  j["d"] = emb.eigenvalues.size();
  j["eigenvalues"] = vector_to_json(emb.eigenvalues);
  j["positions"] = matrix_to_json(emb.positions);
  if (emb.kind == EmbeddingKind::LSE) j["degrees"] = vector_to_json(emb.degrees);
  save_json(path, j);
}

OOSConnectivity read_oos(const std::string& path) {
  const json j = load_json(path);
  OOSConnectivity conn;
  conn.a = vector_from_json(require(j, "a", path), path, "a");
  for (Eigen::Index i = 0; i < conn.a.size(); ++i)
    if (conn.a(i) != 0.0 && conn.a(i) != 1.0)
      parse_fail(path, "entries of a must be 0 or 1");
  if (j.contains("w_bar") && !j.at("w_bar").is_null())
    conn.w_bar = vector_from_json(j.at("w_bar"), path, "w_bar");
  return conn;
}

void write_oos(const std::string& path, const OOSConnectivity& conn, int atom) {
  json j;
  j["n"] = conn.a.size();
  j["a"] = json::array();
  for (Eigen::Index i = 0; i < conn.a.size(); ++i)
    j["a"].push_back(conn.a(i) != 0.0 ? 1 : 0);
  if (conn.w_bar) j["w_bar"] = vector_to_json(*conn.w_bar);
  if (atom >= 0) j["atom"] = atom;
  save_json(path, j);
}

void write_oos_result(const std::string& path, const OOSEstimate& est) {
  json j;
  j["method"] = to_string(est.method);
  j["w"] = vector_to_json(est.w);
  j["diagnostics"] = {
      {"iterations", est.diagnostics.iterations},
      {"final_projected_gradient_norm", est.diagnostics.final_projected_gradient_norm},
      {"active_constraints", est.diagnostics.active_constraints},
  };
  save_json(path, j);
}

ExperimentConfig read_experiment_config(const std::string& path) {
  const json j = load_json(path);
  ExperimentConfig cfg;

  if (j.contains("dist_file")) {
    std::filesystem::path dist_path = j.at("dist_file").get<std::string>();
    if (dist_path.is_relative())
      dist_path = std::filesystem::path(path).parent_path() / dist_path;
    cfg.dist = read_distribution(dist_path.string());
  } else if (j.contains("dist")) {
    const json dj = j.at("dist");
    Matrix atoms = matrix_from_json(require(dj, "atoms", path), path, "atoms");
    Vector weights = vector_from_json(require(dj, "weights", path), path, "weights");
    try {
      cfg.dist = make_distribution(std::move(atoms), std::move(weights));
    } catch (const std::invalid_argument& e) {
      parse_fail(path, e.what());
    }
  } else {
    parse_fail(path, "expected \"dist\" or \"dist_file\"");
  }

  for (const auto& n : require(j, "n_values", path)) cfg.n_values.push_back(n.get<int>());
  cfg.trials = require(j, "trials", path).get<int>();
  for (const auto& m : require(j, "methods", path))
    cfg.methods.push_back(oos_method_from_string(m.get<std::string>()));
  cfg.master_seed = require(j, "master_seed", path).get<std::uint64_t>();
  if (j.contains("ml")) {
    const json ml = j.at("ml");
    if (ml.contains("epsilon")) cfg.ml_options.epsilon = ml.at("epsilon").get<double>();
    if (ml.contains("max_iterations"))
      cfg.ml_options.max_iterations = ml.at("max_iterations").get<int>();
    if (ml.contains("gradient_tolerance"))
      cfg.ml_options.gradient_tolerance = ml.at("gradient_tolerance").get<double>();
    if (ml.contains("shrink"))
      cfg.ml_options.backtrack_shrink = ml.at("shrink").get<double>();
    if (ml.contains("sufficient_decrease"))
      cfg.ml_options.sufficient_decrease = ml.at("sufficient_decrease").get<double>();
  }
  if (j.contains("workers")) cfg.workers = j.at("workers").get<int>();
  return cfg;
}

void write_records_csv(const std::string& path,
                       const std::vector<TrialRecord>& records, int dim) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot open for writing");

  out << "trial,n,method,atom";
  for (int k = 1; k <= dim; ++k) out << ",est_" << k;
  for (int k = 1; k <= dim; ++k) out << ",target_" << k;
  out << ",error,failed\n";

  for (const auto& rec : records) {
    out << rec.trial << "," << rec.n << "," << to_string(rec.method) << ","
        << rec.atom;
    for (int k = 0; k < dim; ++k) out << "," << format_double(rec.estimate(k));
    for (int k = 0; k < dim; ++k) out << "," << format_double(rec.target(k));
    out << "," << format_double(rec.error) << "," << (rec.failed ? 1 : 0) << "\n";
  }
}

void write_summary_json(const std::string& path, const ExperimentSummary& summary) {
  json entries = json::array();
  for (const auto& e : summary.entries) {
    json ej;
    ej["n"] = e.n;
    ej["method"] = to_string(e.method);
    ej["atom"] = e.atom;
    ej["count"] = e.count;
    ej["failures"] = e.failures;
    ej["scale"] = e.scale;
    ej["mean"] = vector_to_json(e.mean);
    ej["covariance"] = matrix_to_json(e.covariance);
    ej["predicted_covariance"] = matrix_to_json(e.predicted_covariance);
    ej["coverage_1sigma"] = e.coverage_1sigma;
    ej["coverage_2sigma"] = e.coverage_2sigma;
    ej["coverage_mass68"] = e.coverage_mass68;
    ej["coverage_mass95"] = e.coverage_mass95;
    ej["median_error"] = e.median_error;
    ej["q90_error"] = e.q90_error;
    entries.push_back(std::move(ej));
  }
  json j;
  j["entries"] = std::move(entries);
  save_json(path, j);
}

void write_rates_csv(const std::string& path, const std::vector<RateRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  out << "n,method,median_error,q90_error,failures\n";
  for (const auto& row : rows)
    out << row.n << "," << to_string(row.method) << ","
        << format_double(row.median_error) << "," << format_double(row.q90_error)
        << "," << row.failures << "\n";
}

void write_tradeoff_csv(const std::string& path,
                        const std::vector<TradeoffRow>& rows) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ParseError, path + ": cannot open for writing");
  out << "n,m,lambda,p,q,eta_in,eta_oos,ratio\n";
  for (const auto& row : rows)
    out << row.n << "," << row.m << "," << format_double(row.lambda) << ","
        << format_double(row.p) << "," << format_double(row.q) << ","
        << format_double(row.eta_in) << "," << format_double(row.eta_oos) << ","
        << format_double(row.ratio) << "\n";
}

}  // namespace rdpg::io
