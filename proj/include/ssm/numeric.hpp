#pragma once

#include <Eigen/Dense>

namespace ssm {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

namespace numeric {

/// (M + M^T) / 2.
Matrix symmetrize(const Matrix& M);

/// Max-abs deviation from symmetry relative to 1 + max-abs entry.
double asymmetry(const Matrix& M);

/// Smallest eigenvalue of a symmetric matrix.
double min_eigenvalue(const Matrix& M);

/// Factor S with S * S^T == M for a symmetric positive semidefinite M.
/// Uses pivoted LDL^T with negative pivots clamped to zero, so rank-deficient
/// and zero matrices are handled; the result is not necessarily triangular.
Matrix psd_sqrt(const Matrix& M);

}  // namespace numeric
}  // namespace ssm
