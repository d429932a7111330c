#pragma once

#include <cstdint>
#include <optional>

#include "rdpg/error.hpp"
#include "rdpg/types.hpp"

namespace rdpg {

/// Finite mixture of point masses in R^d whose pairwise inner products are
/// valid edge probabilities. Atoms are stored one per row.
struct InnerProductDistribution {
  int dim = 0;
  Matrix atoms;    // k x dim
  Vector weights;  // k entries, each > 0, summing to 1
  // min over ordered atom pairs of min(x'y, 1 - x'y); consumers that need the
  // eta-bounded condition require this to be strictly positive.
  double eta_margin = 0.0;
};

struct ValidationReport {
  double eta_margin = 0.0;
};

/// Checks that every pairwise atom inner product lies in [0, 1] and returns
/// the eta margin. Throws Error(InvalidDistribution) naming the first
/// offending pair.
ValidationReport validate_distribution(const InnerProductDistribution& dist);

/// Builds a distribution from raw atoms/weights, checking the weight and
/// inner-product invariants and filling in eta_margin.
InnerProductDistribution make_distribution(Matrix atoms, Vector weights);

/// Factors a PSD block probability matrix B = V diag(s) V' into atoms
/// rows(V_+ diag(sqrt(s_+))), keeping only eigenvalues > 1e-10. The atom Gram
/// matrix reproduces B. Throws Error(NotPSD) if B has an eigenvalue < -1e-10.
InnerProductDistribution distribution_from_sbm(const Matrix& block_matrix,
                                               const Vector& block_priors);

struct LatentPositions {
  Matrix X;  // n x d, one latent position per row
};

/// Symmetric hollow 0/1 adjacency matrix of a simple graph.
struct AdjacencyMatrix {
  int n = 0;
  Matrix entries;

  Vector degrees() const { return entries.rowwise().sum(); }
};

/// Edge indicator vector between an out-of-sample vertex and the n in-sample
/// vertices. The true latent position is retained when it is known
/// (simulation); absent on real data.
struct OOSConnectivity {
  Vector a;  // in {0,1}^n
  std::optional<Vector> w_bar;
};

/// Draws n rows i.i.d. from the atom mixture. Deterministic in (dist, n, seed).
LatentPositions sample_latent(const InnerProductDistribution& dist, int n,
                              std::uint64_t seed);

/// Samples A_ij ~ Bernoulli(X_i'X_j) independently for i < j; the result is
/// exactly symmetric and hollow. Throws Error(ProbabilityOutOfRange) if some
/// pairwise inner product escapes [0, 1].
AdjacencyMatrix sample_adjacency(const LatentPositions& latents,
                                 std::uint64_t seed);

/// Samples a_i ~ Bernoulli(X_i'w_bar) independently and stores w_bar.
OOSConnectivity sample_oos(const LatentPositions& latents, const Vector& w_bar,
                           std::uint64_t seed);

/// Index of the atom equal to x (exact comparison; sampled rows are copies of
/// atoms), or -1 if x matches no atom.
int atom_index(const InnerProductDistribution& dist, const Vector& x);

/// Categorical draw from the mixture weights keyed by `key`.
int sample_atom_index(const InnerProductDistribution& dist, std::uint64_t key);

}  // namespace rdpg
