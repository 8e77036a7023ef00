#include "dpp/linalg.hpp"

#include <Eigen/SVD>
#include <cmath>

namespace dpp {

HermitianMatrix::HermitianMatrix(Eigen::MatrixXd m, double tol) : m_(std::move(m)) {
  if (m_.rows() != m_.cols()) {
    throw LinalgError("HermitianMatrix: input is " + std::to_string(m_.rows()) + "x" +
                      std::to_string(m_.cols()) + ", expected square");
  }
  const double scale = std::max(1.0, m_.cwiseAbs().maxCoeff());
  const double asym = (m_ - m_.transpose()).cwiseAbs().maxCoeff();
  if (asym > tol * scale) {
    throw LinalgError("HermitianMatrix: asymmetry " + std::to_string(asym) +
                      " exceeds tolerance");
  }
  // symmetrize residual roundoff so downstream solvers see an exact symmetric matrix
  m_ = 0.5 * (m_ + m_.transpose().eval());
}

SpectralDecomposition eigendecompose(const HermitianMatrix& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.mat());
  if (es.info() != Eigen::Success) {
    throw LinalgError("eigendecompose: iteration did not converge");
  }
  const int n = m.dim();
  SpectralDecomposition out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (int i = 0; i < n; ++i) {  // Eigen sorts ascending; we want descending
    out.eigenvalues(i) = es.eigenvalues()(n - 1 - i);
    out.eigenvectors.col(i) = es.eigenvectors().col(n - 1 - i);
  }
  return out;
}

double determinant(const HermitianMatrix& m) {
  if (m.dim() == 0) return 1.0;
  return eigendecompose(m).eigenvalues.prod();
}

double determinant_general(const Eigen::MatrixXd& m) {
  if (m.rows() == 0) return 1.0;
  return Eigen::PartialPivLU<Eigen::MatrixXd>(m).determinant();
}

Eigen::MatrixXd solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                      double cond_cap) {
  if (m.rows() != m.cols() || m.rows() != b.rows()) {
    throw LinalgError("solve: dimension mismatch");
  }
  // Column-pivoted QR: the sorted |R| diagonal gives a cheap, reliable
  // condition estimate at a fraction of the cost of a full SVD.
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::VectorXd rdiag = qr.matrixR().diagonal().cwiseAbs();
  const double rmax = rdiag(0);
  const double rmin = rdiag(rdiag.size() - 1);
  if (!(rmin > 0.0) || rmax / rmin > cond_cap) {
    throw LinalgError("solve: matrix singular to tolerance, smallest pivot " +
                      std::to_string(rmin));
  }
  return qr.solve(b);
}

HermitianMatrix project_clip(const HermitianMatrix& m, double tol) {
  const auto sd = eigendecompose(m);
  const int n = m.dim();
  Eigen::VectorXd rounded(n);
  for (int i = 0; i < n; ++i) {
    const double lam = sd.eigenvalues(i);
    if (lam < -tol || lam > 1.0 + tol) {
      throw LinalgError("project_clip: eigenvalue " + std::to_string(lam) +
                        " outside [-tol, 1+tol], discretization too coarse");
    }
    rounded(i) = lam > 0.5 ? 1.0 : 0.0;
  }
  Eigen::MatrixXd p =
      sd.eigenvectors * rounded.asDiagonal() * sd.eigenvectors.transpose();
  return HermitianMatrix(std::move(p), 1e-9);
}

double inverse_operator_norm(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  if (!(smin > 0.0)) throw LinalgError("inverse_operator_norm: singular matrix");
  return 1.0 / smin;
}

}  // namespace dpp
