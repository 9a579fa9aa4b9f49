#pragma once

#include <vector>

#include "ssm/numeric.hpp"

namespace ssm::detail {

inline constexpr double kLog2Pi = 1.8378770664093454836;

// Covariance freezing threshold once the Riccati recursion has settled.
// Deliberately far below any reporting tolerance: freezing is an
// optimization and must not perturb results beyond rounding level.
inline constexpr double kFreezeTol = 1e-13;

inline Matrix select_rows(const Matrix& M, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), M.cols());
  for (size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Index>(i)) = M.row(rows[i]);
  return out;
}

inline Matrix select_square(const Matrix& M, const std::vector<Index>& idx) {
  const Index k = static_cast<Index>(idx.size());
  Matrix out(k, k);
  for (Index i = 0; i < k; ++i)
    for (Index j = 0; j < k; ++j) out(i, j) = M(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  return out;
}

inline Vector select_row_entries(const Matrix& M, Index row, const std::vector<Index>& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (size_t i = 0; i < idx.size(); ++i) out(static_cast<Index>(i)) = M(row, idx[i]);
  return out;
}

inline double max_abs_diff(const Matrix& A, const Matrix& B) {
  return (A - B).cwiseAbs().maxCoeff();
}

}  // namespace ssm::detail
