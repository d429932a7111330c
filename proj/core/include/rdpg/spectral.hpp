#pragma once

#include <optional>

#include "rdpg/model.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

enum class EigenOrdering {
  Algebraic,  // largest signed eigenvalues first
  Magnitude,  // largest |eigenvalue| first; ties broken toward positive
};

struct SpectralDecomposition {
  Vector values;   // d entries, sorted per `ordering`
  Matrix vectors;  // n x d, orthonormal columns, sign-fixed
  EigenOrdering ordering = EigenOrdering::Algebraic;
  // Set when |lambda_d - lambda_{d+1}| < 1e-10 under the chosen ordering;
  // the retained eigenvector basis is then ill-defined up to rotation.
  bool degenerate_gap = false;
};

/// Top-d eigenpairs of a symmetric matrix. Residuals satisfy
/// ||M v - lambda v|| <= 1e-8 ||M|| per pair. Large inputs go through a
/// deterministic block subspace iteration with a dense fallback; small inputs
/// are solved densely. Each eigenvector's sign is fixed so that its
/// largest-magnitude entry is positive, making results reproducible.
SpectralDecomposition top_d_eigen(const Matrix& M, int d, EigenOrdering ordering);

enum class EmbeddingKind { ASE, LSE };

struct Embedding {
  Matrix positions;   // n x d, rows are estimated latent positions
  Vector eigenvalues; // d retained eigenvalues
  EmbeddingKind kind = EmbeddingKind::ASE;
  Vector degrees;     // in-sample degree vector, retained for LSE only
};

/// Adjacency spectral embedding U S^{1/2} from the top-d algebraic eigenpairs
/// of A. Throws Error(NonPositiveEigenvalue) if any retained eigenvalue fails
/// to be strictly positive.
Embedding ase(const AdjacencyMatrix& A, int d);

/// L = D^{-1/2} A D^{-1/2} with 0^{-1/2} = 0, so rows and columns of isolated
/// vertices are zero.
Matrix normalized_laplacian(const AdjacencyMatrix& A);

/// Laplacian spectral embedding from the top-d largest-magnitude eigenpairs
/// of the normalized Laplacian; retains the in-sample degree vector for the
/// out-of-sample extension.
Embedding lse(const AdjacencyMatrix& A, int d);

/// Noise-free counterparts computed from known latent positions.
struct PopulationDecomposition {
  Matrix P;       // n x n, X X'
  Matrix U;       // n x d, top-d eigenvectors of P
  Vector S;       // d, corresponding eigenvalues
  Vector T;       // n, expected degrees t_i = sum_j X_j'X_i
  Matrix Xtilde;  // n x d, T^{-1/2} X
  double t_v = 0.0;  // expected OOS degree sum_j X_j'w_bar (when w_bar given)
};

PopulationDecomposition population_quantities(
    const LatentPositions& latents, const std::optional<Vector>& w_bar = {});

}  // namespace rdpg
