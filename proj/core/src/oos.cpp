#include "rdpg/oos.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include "rdpg/error.hpp"

namespace rdpg {

const char* to_string(OOSMethod method) {
  switch (method) {
    case OOSMethod::LLS_ASE: return "lls-ase";
    case OOSMethod::ML_ASE: return "ml-ase";
    case OOSMethod::LLS_LSE: return "lls-lse";
  }
  return "unknown";
}

OOSMethod oos_method_from_string(const std::string& name) {
  if (name == "lls-ase") return OOSMethod::LLS_ASE;
  if (name == "ml-ase") return OOSMethod::ML_ASE;
  if (name == "lls-lse") return OOSMethod::LLS_LSE;
  throw std::invalid_argument("unknown OOS method: " + name);
}

namespace {

void check_lengths(const Embedding& emb, const OOSConnectivity& conn) {
  if (conn.a.size() != emb.positions.rows()) {
    std::ostringstream msg;
    msg << "edge vector length " << conn.a.size() << " vs " << emb.positions.rows()
        << " embedded vertices";
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
}

void check_full_rank(const Embedding& emb) {
  if (emb.eigenvalues.size() == 0 || emb.eigenvalues.minCoeff() <= 0.0)
    throw Error(ErrorCode::RankDeficient,
                "embedding has a non-positive retained eigenvalue");
}

// Closed form S^{-1/2} U' r = S^{-1} X' r for positions X = U S^{1/2}.
Vector lls_solve(const Embedding& emb, const Vector& responses) {
  return emb.eigenvalues.cwiseInverse().asDiagonal() *
         (emb.positions.transpose() * responses);
}

// ---- constrained ML solver -------------------------------------------------

// Largest violation of the [eps, 1-eps] probability slabs at w.
double max_violation(const Matrix& X, double eps, const Vector& w) {
  const Vector p = X * w;
  double worst = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    worst = std::max({worst, eps - p(i), p(i) - (1.0 - eps)});
  return worst;
}

// Successive projection onto violated slabs (Gauss-Seidel sweeps). The
// feasible set is an intersection of slabs in w-space, so each clip moves w
// along the violated constraint's normal.
Vector project_feasible(const Matrix& X, const Vector& row_sqnorm, double eps,
                        Vector w) {
  constexpr int kMaxPasses = 200;
  for (int pass = 0; pass < kMaxPasses; ++pass) {
    double worst = 0.0;
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
      const double p = X.row(i).dot(w);
      if (p < eps) {
        w += X.row(i).transpose() * ((eps - p) / row_sqnorm(i));
        worst = std::max(worst, eps - p);
      } else if (p > 1.0 - eps) {
        w -= X.row(i).transpose() * ((p - (1.0 - eps)) / row_sqnorm(i));
        worst = std::max(worst, p - (1.0 - eps));
      }
    }
    if (worst <= 1e-14) break;
  }
  return w;
}

// Feasible start: the LLS solution if already feasible, otherwise the closest
// blend of it with a strictly interior point t*(mean embedded row) found by
// intersecting the per-constraint intervals for t.
Vector feasible_start(const Matrix& X, const Vector& row_sqnorm, double eps,
                      Vector w_lls) {
  if (max_violation(X, eps, w_lls) <= 0.0) return w_lls;

  const Vector m = X.colwise().mean();
  const Vector c = X * m;
  double lo = -std::numeric_limits<double>::infinity();
  double hi = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < c.size(); ++i) {
    if (c(i) > 0.0) {
      lo = std::max(lo, eps / c(i));
      hi = std::min(hi, (1.0 - eps) / c(i));
    } else if (c(i) < 0.0) {
      lo = std::max(lo, (1.0 - eps) / c(i));
      hi = std::min(hi, eps / c(i));
    } else {
      throw Error(ErrorCode::InfeasibleConstraintSet,
                  "an embedded vertex is orthogonal to the mean direction; no "
                  "interior point found along it");
    }
  }
  if (!(lo < hi))
    throw Error(ErrorCode::InfeasibleConstraintSet,
                "constraint intervals along the mean direction do not intersect");
  const Vector w_center = 0.5 * (lo + hi) * m;

  // Smallest s in [0,1] for which (1-s) w_lls + s w_center is feasible.
  const Vector g = X * w_lls;
  const Vector h = X * w_center;
  double s = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (g(i) < eps) s = std::max(s, (eps - g(i)) / (h(i) - g(i)));
    if (g(i) > 1.0 - eps) s = std::max(s, (g(i) - (1.0 - eps)) / (g(i) - h(i)));
  }
  s = std::min(1.0, s * (1.0 + 1e-9) + 1e-12);
  Vector w = (1.0 - s) * w_lls + s * w_center;
  if (max_violation(X, eps, w) > 1e-9) w = w_center;
  (void)row_sqnorm;
  return w;
}

// Projection of the gradient onto the tangent cone of the active constraints:
// r = g - N lambda with lambda >= 0 minimizing ||g - N lambda||, solved by
// cyclic coordinate descent over the active outward normals. An interior
// point returns g unchanged; at a KKT point the residual vanishes.
Vector projected_gradient(const Matrix& X, double eps, const Vector& w,
                          const Vector& g, int* active_count) {
  constexpr double kActiveTol = 1e-8;
  const Vector p = X * w;
  std::vector<Eigen::Index> active;
  std::vector<double> side;  // +1: upper slab face, -1: lower
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (p(i) <= eps + kActiveTol) {
      active.push_back(i);
      side.push_back(-1.0);
    } else if (p(i) >= 1.0 - eps - kActiveTol) {
      active.push_back(i);
      side.push_back(+1.0);
    }
  }
  *active_count = static_cast<int>(active.size());
  if (active.empty()) return g;

  Vector lambda = Vector::Zero(static_cast<Eigen::Index>(active.size()));
  Vector r = g;
  const double gscale = 1.0 + g.norm();
  for (int sweep = 0; sweep < 400; ++sweep) {
    double moved = 0.0;
    for (std::size_t k = 0; k < active.size(); ++k) {
      const Vector nk = side[k] * X.row(active[k]).transpose();
      const double nn = nk.squaredNorm();
      if (nn == 0.0) continue;
      const double next = std::max(0.0, lambda(static_cast<Eigen::Index>(k)) +
                                            nk.dot(r) / nn);
      const double delta = next - lambda(static_cast<Eigen::Index>(k));
      if (delta != 0.0) {
        r -= delta * nk;
        lambda(static_cast<Eigen::Index>(k)) = next;
        moved = std::max(moved, std::abs(delta) * std::sqrt(nn));
      }
    }
    if (moved <= 1e-13 * gscale) break;
  }
  return r;
}

double loglik_value(const Matrix& X, const Vector& a, const Vector& w) {
  const Vector p = X * w;
  double value = 0.0;
  for (Eigen::Index i = 0; i < p.size(); ++i)
    value += a(i) > 0.5 ? std::log(p(i)) : std::log(1.0 - p(i));
  return value;
}

}  // namespace

OOSEstimate oos_ase_lls(const Embedding& emb, const OOSConnectivity& conn) {
  if (emb.kind != EmbeddingKind::ASE)
    throw Error(ErrorCode::MethodMismatch, "lls-ase requires an ASE embedding");
  check_lengths(emb, conn);
  check_full_rank(emb);
  OOSEstimate est;
  est.method = OOSMethod::LLS_ASE;
  est.w = lls_solve(emb, conn.a);
  return est;
}

LogLikelihood loglik(const Embedding& emb, const OOSConnectivity& conn,
                     const Vector& w) {
  check_lengths(emb, conn);
  if (w.size() != emb.positions.cols())
    throw Error(ErrorCode::ShapeMismatch, "w dimension mismatch");

  const Matrix& X = emb.positions;
  const Vector p = X * w;
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    if (!(p(i) > 0.0 && p(i) < 1.0)) {
      std::ostringstream msg;
      msg << "estimated probability for vertex " << i << " is " << p(i)
          << ", outside (0,1)";
      throw Error(ErrorCode::DomainViolation, msg.str());
    }
  }

  LogLikelihood out;
  out.gradient = Vector::Zero(w.size());
  out.hessian = Matrix::Zero(w.size(), w.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pi = p(i);
    const double ai = conn.a(i);
    out.value += ai > 0.5 ? std::log(pi) : std::log(1.0 - pi);
    out.gradient += ((ai - pi) / (pi * (1.0 - pi))) * X.row(i).transpose();
    const double curv = ai > 0.5 ? 1.0 / (pi * pi) : 1.0 / ((1.0 - pi) * (1.0 - pi));
    out.hessian -= curv * (X.row(i).transpose() * X.row(i));
  }
  return out;
}

OOSEstimate oos_ase_ml(const Embedding& emb, const OOSConnectivity& conn,
                       const MLSolverOptions& opts) {
  if (emb.kind != EmbeddingKind::ASE)
    throw Error(ErrorCode::MethodMismatch, "ml-ase requires an ASE embedding");
  check_lengths(emb, conn);
  check_full_rank(emb);
  if (!(opts.epsilon > 0.0 && opts.epsilon < 0.5))
    throw std::invalid_argument("epsilon must lie in (0, 1/2)");

  const Matrix& X = emb.positions;
  const double eps = opts.epsilon;

  Vector row_sqnorm(X.rows());
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    row_sqnorm(i) = X.row(i).squaredNorm();
    if (row_sqnorm(i) == 0.0)
      throw Error(ErrorCode::InfeasibleConstraintSet,
                  "embedded vertex with zero position makes the constraint set empty");
  }

  Vector w = feasible_start(X, row_sqnorm, eps, lls_solve(emb, conn.a));

  OOSEstimate est;
  est.method = OOSMethod::ML_ASE;

  double alpha = 0.0;
  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    const double value = loglik_value(X, conn.a, w);
    Vector grad = Vector::Zero(w.size());
    {
      const Vector p = X * w;
      for (Eigen::Index i = 0; i < p.size(); ++i)
        grad += ((conn.a(i) - p(i)) / (p(i) * (1.0 - p(i)))) * X.row(i).transpose();
    }

    int active = 0;
    const Vector pg = projected_gradient(X, eps, w, grad, &active);
    est.diagnostics.iterations = iter;
    est.diagnostics.final_projected_gradient_norm = pg.norm();
    est.diagnostics.active_constraints = active;
    if (pg.norm() <= opts.gradient_tolerance) {
      est.w = w;
      return est;
    }

    if (alpha == 0.0) alpha = 1.0 / (1.0 + grad.norm());
    alpha = std::min(alpha * 4.0, 1e12);

    bool stepped = false;
    for (int ls = 0; ls < 80; ++ls) {
      Vector cand = project_feasible(X, row_sqnorm, eps, w + alpha * grad);
      if (max_violation(X, eps, cand) > 1e-9) {
        alpha *= opts.backtrack_shrink;
        continue;
      }
      const Vector dw = cand - w;
      if (dw.norm() <= 1e-16 * (1.0 + w.norm())) break;  // step fully blocked
      const double cand_value = loglik_value(X, conn.a, cand);
      if (cand_value >= value &&
          cand_value >= value + opts.sufficient_decrease * grad.dot(dw)) {
        w = cand;
        stepped = true;
        break;
      }
      alpha *= opts.backtrack_shrink;
    }
    if (!stepped) break;  // stalled; stationarity re-checked below
  }

  // Either the iteration budget ran out or the line search cannot make
  // progress. Re-evaluate stationarity once before giving up.
  {
    Vector grad = Vector::Zero(w.size());
    const Vector p = X * w;
    for (Eigen::Index i = 0; i < p.size(); ++i)
      grad += ((conn.a(i) - p(i)) / (p(i) * (1.0 - p(i)))) * X.row(i).transpose();
    int active = 0;
    const Vector pg = projected_gradient(X, eps, w, grad, &active);
    if (pg.norm() <= opts.gradient_tolerance) {
      est.w = w;
      est.diagnostics.iterations = iter;
      est.diagnostics.final_projected_gradient_norm = pg.norm();
      est.diagnostics.active_constraints = active;
      return est;
    }
    std::ostringstream msg;
    msg << "no KKT point within " << opts.max_iterations
        << " iterations (projected gradient norm " << pg.norm() << ")";
    throw Error(ErrorCode::MaxIterationsExceeded, msg.str(),
                std::vector<double>(w.data(), w.data() + w.size()));
  }
}

OOSEstimate oos_lse_lls(const Embedding& emb, const OOSConnectivity& conn) {
  if (emb.kind != EmbeddingKind::LSE || emb.degrees.size() != emb.positions.rows())
    throw Error(ErrorCode::MethodMismatch,
                "lls-lse requires an LSE embedding carrying the degree vector");
  check_lengths(emb, conn);
  check_full_rank(emb);

  const double d_v = conn.a.sum();
  if (d_v <= 0.0)
    throw Error(ErrorCode::IsolatedOOSVertex,
                "out-of-sample vertex has no edges to the in-sample graph");

  Vector b = Vector::Zero(conn.a.size());
  for (Eigen::Index i = 0; i < conn.a.size(); ++i) {
    if (conn.a(i) > 0.5) {
      if (emb.degrees(i) <= 0.0) {
        std::ostringstream msg;
        msg << "in-sample vertex " << i << " has degree 0 but an OOS edge";
        throw Error(ErrorCode::ZeroDegreeNeighbor, msg.str());
      }
      b(i) = 1.0 / std::sqrt(d_v * emb.degrees(i));
    }
  }

  OOSEstimate est;
  est.method = OOSMethod::LLS_LSE;
  est.w = lls_solve(emb, b);
  return est;
}

}  // namespace rdpg
