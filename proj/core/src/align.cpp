#include "rdpg/align.hpp"

#include <Eigen/SVD>
#include <sstream>

#include "rdpg/error.hpp"

namespace rdpg {

namespace {

void check_shapes(const Matrix& a, const Matrix& b, const char* who) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    std::ostringstream msg;
    msg << who << ": " << a.rows() << "x" << a.cols() << " vs " << b.rows()
        << "x" << b.cols();
    throw Error(ErrorCode::ShapeMismatch, msg.str());
  }
}

}  // namespace

OrthogonalAlignment procrustes(const Matrix& source, const Matrix& target) {
  check_shapes(source, target, "procrustes");
  if (source.cwiseAbs().maxCoeff() == 0.0)
    throw std::invalid_argument("procrustes: source matrix is identically zero");

  Eigen::JacobiSVD<Matrix> svd(source.transpose() * target,
                               Eigen::ComputeFullU | Eigen::ComputeFullV);
  OrthogonalAlignment out;
  out.Q = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (source * out.Q - target).norm();
  return out;
}

OrthogonalAlignment paper_q(const Matrix& U_pop, const Matrix& U_hat) {
  check_shapes(U_pop, U_hat, "paper_q");
  const auto d = U_pop.cols();
  const double orth_pop = (U_pop.transpose() * U_pop - Matrix::Identity(d, d))
                              .cwiseAbs()
                              .maxCoeff();
  const double orth_hat = (U_hat.transpose() * U_hat - Matrix::Identity(d, d))
                              .cwiseAbs()
                              .maxCoeff();
  if (orth_pop > 1e-6 || orth_hat > 1e-6)
    throw std::invalid_argument("paper_q: inputs must be column-orthonormal");

  const Matrix cross = U_pop.transpose() * U_hat;
  Eigen::JacobiSVD<Matrix> svd(cross, Eigen::ComputeFullU | Eigen::ComputeFullV);
  OrthogonalAlignment out;
  out.Q = svd.matrixU() * svd.matrixV().transpose();
  out.residual = (cross - out.Q).norm();
  return out;
}

double two_to_infty(const Matrix& M) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < M.rows(); ++i)
    best = std::max(best, M.row(i).norm());
  return best;
}

}  // namespace rdpg
