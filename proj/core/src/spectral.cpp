#include "rdpg/spectral.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "rdpg/error.hpp"
#include "rdpg/rng.hpp"

namespace rdpg {

namespace {

constexpr int kDenseCutoff = 256;      // below this, always solve densely
constexpr double kGapTol = 1e-10;      // degenerate-spectrum warning threshold
constexpr double kResidualTol = 1e-9;  // iterative convergence target (rel.)

// Sorting comparator over eigenvalues for the requested ordering. Magnitude
// ties resolve toward the positive eigenvalue.
bool better(double a, double b, EigenOrdering ordering) {
  if (ordering == EigenOrdering::Algebraic) return a > b;
  if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
  return a > b;
}

std::vector<Eigen::Index> ordered_indices(const Vector& values,
                                          EigenOrdering ordering) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(values.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](Eigen::Index a, Eigen::Index b) {
    return better(values(a), values(b), ordering);
  });
  return idx;
}

void fix_signs(Matrix& vectors) {
  for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
    Eigen::Index imax = 0;
    double vmax = 0.0;
    for (Eigen::Index i = 0; i < vectors.rows(); ++i) {
      const double m = std::abs(vectors(i, c));
      if (m > vmax) {
        vmax = m;
        imax = i;
      }
    }
    if (vectors(imax, c) < 0.0) vectors.col(c) = -vectors.col(c);
  }
}

SpectralDecomposition dense_top_d(const Matrix& M, int d, EigenOrdering ordering) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(M);
  if (es.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "dense symmetric eigensolver failed");

  const auto idx = ordered_indices(es.eigenvalues(), ordering);
  SpectralDecomposition dec;
  dec.ordering = ordering;
  dec.values.resize(d);
  dec.vectors.resize(M.rows(), d);
  for (int k = 0; k < d; ++k) {
    dec.values(k) = es.eigenvalues()(idx[static_cast<std::size_t>(k)]);
    dec.vectors.col(k) = es.eigenvectors().col(idx[static_cast<std::size_t>(k)]);
  }
  if (d < M.rows()) {
    const double next = es.eigenvalues()(idx[static_cast<std::size_t>(d)]);
    dec.degenerate_gap = std::abs(dec.values(d - 1) - next) < kGapTol;
  }
  fix_signs(dec.vectors);
  return dec;
}

// Block subspace iteration with Rayleigh-Ritz extraction. Returns nullopt if
// the requested residual tolerance is not reached, in which case the caller
// falls back to the dense path. The start basis is a fixed function of
// (n, block size), so results are reproducible.
std::optional<SpectralDecomposition> subspace_top_d(const Matrix& M, int d,
                                                    EigenOrdering ordering) {
  const Eigen::Index n = M.rows();
  const Eigen::Index block = std::min<Eigen::Index>(n, d + 6);
  constexpr int kMaxIter = 200;

  // For algebraic ordering, iterate on M + cI (Gershgorin shift makes it PSD)
  // so the dominant subspace of the shifted operator is the algebraically
  // largest of M. Magnitude ordering iterates on M directly.
  const double shift = ordering == EigenOrdering::Algebraic
                           ? M.cwiseAbs().rowwise().sum().maxCoeff()
                           : 0.0;

  Matrix V(n, block);
  for (Eigen::Index j = 0; j < block; ++j)
    for (Eigen::Index i = 0; i < n; ++i)
      V(i, j) = 2.0 * unit_double(derive(stream::kEigenInit, static_cast<std::uint64_t>(n),
                                         static_cast<std::uint64_t>(i),
                                         static_cast<std::uint64_t>(j))) - 1.0;
  Eigen::HouseholderQR<Matrix> qr0(V);
  V = qr0.householderQ() * Matrix::Identity(n, block);

  Vector ritz_sorted(block);
  Matrix W;
  for (int iter = 0; iter < kMaxIter; ++iter) {
    const Matrix MV = M * V;
    Matrix H = V.transpose() * MV;
    H = ((H + H.transpose()) / 2.0).eval();
    Eigen::SelfAdjointEigenSolver<Matrix> hs(H);
    if (hs.info() != Eigen::Success) return std::nullopt;

    const auto idx = ordered_indices(hs.eigenvalues(), ordering);
    Matrix G(block, block);
    for (Eigen::Index k = 0; k < block; ++k) {
      ritz_sorted(k) = hs.eigenvalues()(idx[static_cast<std::size_t>(k)]);
      G.col(k) = hs.eigenvectors().col(idx[static_cast<std::size_t>(k)]);
    }

    // Residuals of the d leading Ritz pairs, relative to the spectral scale.
    const double scale =
        std::max(hs.eigenvalues().cwiseAbs().maxCoeff(), 1e-300);
    const Matrix MW = MV * G.leftCols(d);
    W = V * G.leftCols(d);
    double worst = 0.0;
    for (int k = 0; k < d; ++k)
      worst = std::max(worst, (MW.col(k) - ritz_sorted(k) * W.col(k)).norm());
    if (worst <= kResidualTol * scale) {
      SpectralDecomposition dec;
      dec.ordering = ordering;
      dec.values = ritz_sorted.head(d);
      dec.vectors = W;
      if (d < block)
        dec.degenerate_gap = std::abs(ritz_sorted(d - 1) - ritz_sorted(d)) < kGapTol;
      fix_signs(dec.vectors);
      return dec;
    }

    // Power step on the (possibly shifted) operator, then re-orthonormalize.
    Matrix Y = MV + shift * V;
    Eigen::HouseholderQR<Matrix> qr(Y);
    V = qr.householderQ() * Matrix::Identity(n, block);
  }
  return std::nullopt;
}

}  // namespace

SpectralDecomposition top_d_eigen(const Matrix& M, int d, EigenOrdering ordering) {
  const Eigen::Index n = M.rows();
  if (M.cols() != n) throw std::invalid_argument("matrix not square");
  if (d < 1 || d > n) throw std::invalid_argument("d out of range [1, n]");
  if (n > 1 && (M - M.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw std::invalid_argument("matrix not symmetric within 1e-12");

  if (n > kDenseCutoff && d + 6 < n) {
    if (auto dec = subspace_top_d(M, d, ordering)) return std::move(*dec);
  }
  return dense_top_d(M, d, ordering);
}

Embedding ase(const AdjacencyMatrix& A, int d) {
  SpectralDecomposition dec = top_d_eigen(A.entries, d, EigenOrdering::Algebraic);
  for (int k = 0; k < d; ++k) {
    if (dec.values(k) <= 0.0) {
      std::ostringstream msg;
      msg << "eigenvalue " << k << " of A is " << dec.values(k)
          << "; ASE requires the top " << d << " algebraic eigenvalues positive";
      throw Error(ErrorCode::NonPositiveEigenvalue, msg.str());
    }
  }
  Embedding emb;
  emb.kind = EmbeddingKind::ASE;
  emb.eigenvalues = dec.values;
  emb.positions = dec.vectors * dec.values.cwiseSqrt().asDiagonal();
  return emb;
}

Matrix normalized_laplacian(const AdjacencyMatrix& A) {
  const Vector deg = A.degrees();
  Vector dinvsqrt(deg.size());
  for (Eigen::Index i = 0; i < deg.size(); ++i)
    dinvsqrt(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  return dinvsqrt.asDiagonal() * A.entries * dinvsqrt.asDiagonal();
}

Embedding lse(const AdjacencyMatrix& A, int d) {
  const Matrix L = normalized_laplacian(A);
  SpectralDecomposition dec = top_d_eigen(L, d, EigenOrdering::Magnitude);
  for (int k = 0; k < d; ++k) {
    if (dec.values(k) <= 0.0) {
      std::ostringstream msg;
      msg << "eigenvalue " << k << " of L is " << dec.values(k)
          << "; LSE requires the top " << d << " magnitude eigenvalues positive";
      throw Error(ErrorCode::NonPositiveEigenvalue, msg.str());
    }
  }
  Embedding emb;
  emb.kind = EmbeddingKind::LSE;
  emb.eigenvalues = dec.values;
  emb.positions = dec.vectors * dec.values.cwiseSqrt().asDiagonal();
  emb.degrees = A.degrees();
  return emb;
}

PopulationDecomposition population_quantities(
    const LatentPositions& latents, const std::optional<Vector>& w_bar) {
  const Matrix& X = latents.X;
  const int d = static_cast<int>(X.cols());

  PopulationDecomposition pop;
  pop.P = X * X.transpose();

  const Vector colsum = X.colwise().sum();
  pop.T = X * colsum;
  for (Eigen::Index i = 0; i < pop.T.size(); ++i) {
    if (pop.T(i) <= 0.0) {
      std::ostringstream msg;
      msg << "expected degree t_" << i << " = " << pop.T(i) << " is not positive";
      throw Error(ErrorCode::ZeroExpectedDegree, msg.str());
    }
  }

  SpectralDecomposition dec = top_d_eigen(pop.P, d, EigenOrdering::Algebraic);
  pop.U = dec.vectors;
  pop.S = dec.values;

  pop.Xtilde = pop.T.cwiseSqrt().cwiseInverse().asDiagonal() * X;
  if (w_bar) {
    if (w_bar->size() != d) throw std::invalid_argument("w_bar dimension mismatch");
    pop.t_v = colsum.dot(*w_bar);
  }
  return pop;
}

}  // namespace rdpg
