#pragma once

#include "rdpg/types.hpp"

namespace rdpg {

struct OrthogonalAlignment {
  Matrix Q;             // d x d orthogonal
  double residual = 0;  // Frobenius objective at the optimum
};

/// Orthogonal Procrustes: Q minimizing ||source Q - target||_F over the full
/// orthogonal group (reflections allowed), from the SVD of source' target.
OrthogonalAlignment procrustes(const Matrix& source, const Matrix& target);

/// Alignment matrix Q = V1 V2' from the SVD V1 L V2' of U_pop' U_hat, for
/// column-orthonormal inputs; residual is ||U_pop' U_hat - Q||_F.
OrthogonalAlignment paper_q(const Matrix& U_pop, const Matrix& U_hat);

/// Maximum Euclidean row norm of M.
double two_to_infty(const Matrix& M);

}  // namespace rdpg
