#include "rdpg/model.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <sstream>

#include "rdpg/rng.hpp"

namespace rdpg {

namespace {

// Tolerance for pairwise inner products drifting past [0,1] through rounding.
constexpr double kProbSlack = 1e-12;

double checked_probability(double p, const char* what, int i, int j) {
  if (p < -kProbSlack || p > 1.0 + kProbSlack) {
    std::ostringstream msg;
    msg << what << " (" << i << "," << j << ") = " << p << " outside [0,1]";
    throw Error(ErrorCode::ProbabilityOutOfRange, msg.str());
  }
  return std::min(1.0, std::max(0.0, p));
}

}  // namespace

ValidationReport validate_distribution(const InnerProductDistribution& dist) {
  const auto k = dist.atoms.rows();
  if (k == 0) throw std::invalid_argument("distribution has no atoms");
  if (dist.atoms.cols() != dist.dim)
    throw std::invalid_argument("atom dimension disagrees with dist.dim");

  double margin = 1.0;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (Eigen::Index j = i; j < k; ++j) {
      const double ip = dist.atoms.row(i).dot(dist.atoms.row(j));
      if (ip < 0.0 || ip > 1.0) {
        std::ostringstream msg;
        msg << "atoms " << i << " and " << j << " have inner product " << ip
            << " outside [0,1]";
        throw Error(ErrorCode::InvalidDistribution, msg.str());
      }
      margin = std::min(margin, std::min(ip, 1.0 - ip));
    }
  }
  return ValidationReport{margin};
}

InnerProductDistribution make_distribution(Matrix atoms, Vector weights) {
  if (atoms.rows() == 0) throw std::invalid_argument("no atoms");
  if (weights.size() != atoms.rows())
    throw std::invalid_argument("weights/atoms count mismatch");
  if (weights.minCoeff() <= 0.0)
    throw std::invalid_argument("weights must be strictly positive");
  if (std::abs(weights.sum() - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1 within 1e-12");

  InnerProductDistribution dist;
  dist.dim = static_cast<int>(atoms.cols());
  dist.atoms = std::move(atoms);
  dist.weights = std::move(weights);
  dist.eta_margin = validate_distribution(dist).eta_margin;
  return dist;
}

InnerProductDistribution distribution_from_sbm(const Matrix& block_matrix,
                                               const Vector& block_priors) {
  const auto k = block_matrix.rows();
  if (block_matrix.cols() != k) throw std::invalid_argument("block matrix not square");
  if ((block_matrix - block_matrix.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("block matrix not symmetric");
  if (block_priors.size() != k)
    throw std::invalid_argument("priors/block size mismatch");

  Eigen::SelfAdjointEigenSolver<Matrix> es(block_matrix);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "block matrix eigendecomposition failed");

  const Vector& evals = es.eigenvalues();
  if (evals.minCoeff() < -1e-10) {
    std::ostringstream msg;
    msg << "block matrix has eigenvalue " << evals.minCoeff() << " < -1e-10";
    throw Error(ErrorCode::NotPSD, msg.str());
  }

  // Keep strictly positive directions only; rank-deficient block matrices
  // yield atoms of reduced dimension.
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < k; ++i)
    if (evals(i) > 1e-10) keep.push_back(i);
  if (keep.empty()) throw std::invalid_argument("block matrix is numerically zero");

  Matrix atoms(k, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c)
    atoms.col(static_cast<Eigen::Index>(c)) =
        es.eigenvectors().col(keep[c]) * std::sqrt(evals(keep[c]));

  return make_distribution(std::move(atoms), block_priors);
}

int sample_atom_index(const InnerProductDistribution& dist, std::uint64_t key) {
  const double u = unit_double(key);
  double cum = 0.0;
  const auto k = dist.weights.size();
  for (Eigen::Index i = 0; i < k; ++i) {
    cum += dist.weights(i);
    if (u < cum) return static_cast<int>(i);
  }
  return static_cast<int>(k - 1);  // guard against cumulative rounding
}

LatentPositions sample_latent(const InnerProductDistribution& dist, int n,
                              std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("n must be >= 1");
  Matrix X(n, dist.dim);
  for (int i = 0; i < n; ++i) {
    const int a = sample_atom_index(dist, derive(seed, stream::kLatent, i));
    X.row(i) = dist.atoms.row(a);
  }
  return LatentPositions{std::move(X)};
}

AdjacencyMatrix sample_adjacency(const LatentPositions& latents,
                                 std::uint64_t seed) {
  const auto n = latents.X.rows();
  AdjacencyMatrix A;
  A.n = static_cast<int>(n);
  A.entries = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double p = checked_probability(latents.X.row(i).dot(latents.X.row(j)),
                                           "edge probability", static_cast<int>(i),
                                           static_cast<int>(j));
      const double u = unit_double(derive(seed, stream::kEdge,
                                          static_cast<std::uint64_t>(i),
                                          static_cast<std::uint64_t>(j)));
      if (u < p) {
        A.entries(i, j) = 1.0;
        A.entries(j, i) = 1.0;
      }
    }
  }
  return A;
}

OOSConnectivity sample_oos(const LatentPositions& latents, const Vector& w_bar,
                           std::uint64_t seed) {
  if (w_bar.size() != latents.X.cols())
    throw std::invalid_argument("w_bar dimension mismatch");
  const auto n = latents.X.rows();
  OOSConnectivity out;
  out.a = Vector::Zero(n);
  out.w_bar = w_bar;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double p = checked_probability(latents.X.row(i).dot(w_bar),
                                         "OOS edge probability",
                                         static_cast<int>(i), -1);
    const double u = unit_double(derive(seed, stream::kOos,
                                        static_cast<std::uint64_t>(i)));
    if (u < p) out.a(i) = 1.0;
  }
  return out;
}

int atom_index(const InnerProductDistribution& dist, const Vector& x) {
  for (Eigen::Index i = 0; i < dist.atoms.rows(); ++i)
    if ((dist.atoms.row(i).transpose() - x).cwiseAbs().maxCoeff() == 0.0)
      return static_cast<int>(i);
  return -1;
}

}  // namespace rdpg
