#include "ssm/numeric.hpp"

#include <Eigen/Eigenvalues>

namespace ssm::numeric {

Matrix symmetrize(const Matrix& M) { return 0.5 * (M + M.transpose()); }

double asymmetry(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  double dev = (M - M.transpose()).cwiseAbs().maxCoeff();
  return dev / (1.0 + M.cwiseAbs().maxCoeff());
}

double min_eigenvalue(const Matrix& M) {
  if (M.size() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> es(symmetrize(M), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

Matrix psd_sqrt(const Matrix& M) {
  const Index n = M.rows();
  if (n == 0) return Matrix(0, 0);
  Matrix sym = symmetrize(M);
  Eigen::LDLT<Matrix> ldlt(sym);
  if (ldlt.info() == Eigen::Success) {
    Vector d = ldlt.vectorD().cwiseMax(0.0).cwiseSqrt();
    Matrix L = ldlt.matrixL();
    return ldlt.transpositionsP().transpose() * (L * d.asDiagonal());
  }
  // LDLT can reject matrices that are indefinite at rounding level; fall back
  // to a clamped eigendecomposition.
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  Vector d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * d.asDiagonal();
}

}  // namespace ssm::numeric
