#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace dpp {

// Thrown when a linear-algebra precondition fails (non-Hermitian input,
// singular system, eigenvalues outside the admissible band, ...).
class LinalgError : public std::runtime_error {
 public:
  explicit LinalgError(const std::string& what) : std::runtime_error(what) {}
};

// Real symmetric matrix validated at construction. All kernels in this
// project are real-symmetric; a complex build is not provided.
class HermitianMatrix {
 public:
  explicit HermitianMatrix(Eigen::MatrixXd m, double tol = 1e-12);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& mat() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

 private:
  Eigen::MatrixXd m_;
};

struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;  // descending
  Eigen::MatrixXd eigenvectors; // orthonormal columns, matching order
};

SpectralDecomposition eigendecompose(const HermitianMatrix& m);

// Product of eigenvalues; 0 is a valid return.
double determinant(const HermitianMatrix& m);

// Determinant of a general square matrix via LU (used for 1+(g-1)P,
// which is not symmetric).
double determinant_general(const Eigen::MatrixXd& m);

// Solve M x = b for general square M. Fails loudly when the condition
// number exceeds cond_cap: past that point downstream Radon-Nikodym
// values are numerically meaningless.
Eigen::MatrixXd solve(const Eigen::MatrixXd& m, const Eigen::MatrixXd& b,
                      double cond_cap = 1e12);

// Round eigenvalues to {0,1} (threshold 0.5) and rebuild. Rejects input
// whose spectrum leaves [-tol, 1+tol].
HermitianMatrix project_clip(const HermitianMatrix& m, double tol);

// Largest |lambda| over the spectrum of a general matrix's inverse,
// i.e. the operator 2-norm of M^{-1}; used by the diagonal bound check.
double inverse_operator_norm(const Eigen::MatrixXd& m);

}  // namespace dpp
