// Copyright 2026 The irpca Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Dense kernels shared by every other module: SVD with a deterministic sign
// convention, the two hard-thresholding projections, pseudoinverse, norms,
// sparsity counts and the symmetric embedding.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "irpca/error.hpp"

namespace irpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Relative singular-value cutoff used for every rank decision.
inline constexpr double kRankGate = 1e-12;

/// Reconstruction tolerance an SVD must meet before it is returned.
inline constexpr double kSvdResidualGate = 1e-8;

inline std::string shape_string(const Matrix& A) {
  std::ostringstream os;
  os << A.rows() << "x" << A.cols();
  return os.str();
}

inline void require_finite(const Matrix& A, const char* what) {
  if (!A.allFinite()) {
    throw InvalidArgument(std::string(what) + ": matrix has non-finite entries");
  }
}

inline void require_nonempty(const Matrix& A, const char* what) {
  if (A.rows() == 0 || A.cols() == 0) {
    throw DimensionError(std::string(what) + ": matrix must have positive dimensions");
  }
}

inline void require_same_shape(const Matrix& A, const Matrix& B, const char* what) {
  if (A.rows() != B.rows() || A.cols() != B.cols()) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_string(A) +
                         " vs " + shape_string(B));
  }
}

/// Thin SVD, A = U * diag(singular_values) * V^T with k = min(rows, cols).
struct SvdFactors {
  Matrix U;
  Vector singular_values;
  Matrix V;

  Index rank_bound() const { return singular_values.size(); }

  Matrix reconstruct() const {
    return U * singular_values.asDiagonal() * V.transpose();
  }

  /// Best rank-r approximation from the cached factors.
  Matrix truncated(Index r) const {
    return U.leftCols(r) * singular_values.head(r).asDiagonal() *
           V.leftCols(r).transpose();
  }
};

namespace detail {

inline double relative_reconstruction_error(const Matrix& A, const SvdFactors& f) {
  const double scale = A.norm();
  const double err = (A - f.reconstruct()).norm();
  return scale > 0.0 ? err / scale : err;
}

// Each pair (u_k, v_k) is flipped so that the largest-magnitude entry of u_k
// is positive; ties go to the lowest row index.
inline void orient(SvdFactors& f) {
  for (Index k = 0; k < f.U.cols(); ++k) {
    Index best = 0;
    double best_abs = -1.0;
    for (Index i = 0; i < f.U.rows(); ++i) {
      const double a = std::abs(f.U(i, k));
      if (a > best_abs) {
        best_abs = a;
        best = i;
      }
    }
    if (f.U(best, k) < 0.0) {
      f.U.col(k) = -f.U.col(k);
      f.V.col(k) = -f.V.col(k);
    }
  }
}

template <typename Decomposition>
SvdFactors run_svd(const Matrix& A, double& residual, bool& ok) {
  Decomposition dec(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  SvdFactors f{dec.matrixU(), dec.singularValues(), dec.matrixV()};
  ok = dec.info() == Eigen::Success && f.U.allFinite() && f.V.allFinite() &&
       f.singular_values.allFinite();
  residual = ok ? relative_reconstruction_error(A, f)
                : std::numeric_limits<double>::infinity();
  ok = ok && residual <= kSvdResidualGate;
  return f;
}

}  // namespace detail

/// Deterministic thin SVD. Divide-and-conquer first, one-sided Jacobi as a
/// fallback; throws ConvergenceError when neither reconstructs A to 1e-8.
inline SvdFactors svd(const Matrix& A) {
  require_nonempty(A, "svd");
  require_finite(A, "svd");
  double residual = 0.0;
  bool ok = false;
  SvdFactors f = detail::run_svd<Eigen::BDCSVD<Matrix>>(A, residual, ok);
  if (!ok) {
    const double first_residual = residual;
    f = detail::run_svd<Eigen::JacobiSVD<Matrix>>(A, residual, ok);
    if (!ok) {
      throw ConvergenceError("svd: factorization did not converge (residual " +
                                 std::to_string(std::min(first_residual, residual)) + ")",
                             std::min(first_residual, residual));
    }
  }
  detail::orient(f);
  return f;
}

/// Singular values only, nonincreasing.
inline Vector singular_values(const Matrix& A) {
  require_nonempty(A, "singular_values");
  require_finite(A, "singular_values");
  Eigen::BDCSVD<Matrix> dec(A);
  if (dec.info() != Eigen::Success || !dec.singularValues().allFinite()) {
    Eigen::JacobiSVD<Matrix> jac(A);
    if (jac.info() != Eigen::Success) {
      throw ConvergenceError("singular_values: factorization did not converge",
                             std::numeric_limits<double>::infinity());
    }
    return jac.singularValues();
  }
  return dec.singularValues();
}

/// Number of singular values above kRankGate * sigma_max.
inline Index numerical_rank(const Matrix& A) {
  const Vector s = singular_values(A);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > kRankGate * s(0)) ++r;
  }
  return r;
}

/// Spectral hard thresholding: the best rank-r approximation of A.
inline Matrix rank_project(const Matrix& A, Index r) {
  require_nonempty(A, "rank_project");
  const Index k = std::min(A.rows(), A.cols());
  if (r < 1 || r > k) {
    throw InvalidArgument("rank_project: rank " + std::to_string(r) +
                          " outside [1, " + std::to_string(k) + "]");
  }
  require_finite(A, "rank_project");
  if (r == k) return A;
  return svd(A).truncated(r);
}

/// Entry-wise hard thresholding: keeps A_ij when |A_ij| > a, zero otherwise.
inline Matrix entry_threshold(const Matrix& A, double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw InvalidArgument("entry_threshold: threshold must be finite and nonnegative");
  }
  require_finite(A, "entry_threshold");
  return A.unaryExpr([a](double x) { return std::abs(x) > a ? x : 0.0; });
}

/// Moore-Penrose inverse of a full-rank matrix: the left inverse
/// (A^T A)^-1 A^T when tall, the right inverse A^T (A A^T)^-1 when wide.
/// Computed from the SVD as V * diag(1/sigma) * U^T.
inline Matrix pseudoinverse(const Matrix& A) {
  const SvdFactors f = svd(A);
  const Vector& s = f.singular_values;
  if (s(0) == 0.0 || s(s.size() - 1) <= kRankGate * s(0)) {
    throw RankDeficiencyError("pseudoinverse: matrix " + shape_string(A) +
                              " is rank deficient");
  }
  return f.V * s.cwiseInverse().asDiagonal() * f.U.transpose();
}

inline double inf_norm(const Matrix& A) {
  return A.size() == 0 ? 0.0 : A.cwiseAbs().maxCoeff();
}

inline double frob_norm(const Matrix& A) { return A.norm(); }

inline double spectral_norm(const Matrix& A) {
  if (A.size() == 0) return 0.0;
  return singular_values(A)(0);
}

/// Maximum nonzero count over rows (z1) and over columns (z2).
struct Sparsity {
  Index z1 = 0;
  Index z2 = 0;
};

/// Entries with |a| > tol count as nonzero; tol = 0 is exact-zero counting.
inline Sparsity row_col_sparsity(const Matrix& A, double tol = 0.0) {
  const auto nz = (A.array().abs() > tol).cast<Index>();
  Sparsity s;
  if (A.size() == 0) return s;
  s.z1 = nz.rowwise().sum().maxCoeff();
  s.z2 = nz.colwise().sum().maxCoeff();
  return s;
}

/// Number of nonzero entries with |a| > tol.
inline Index count_nonzero(const Matrix& A, double tol = 0.0) {
  return (A.array().abs() > tol).count();
}

/// [[0, M], [M^T, 0]].
inline Matrix sym_embed(const Matrix& M) {
  const Index n1 = M.rows();
  const Index n2 = M.cols();
  Matrix out = Matrix::Zero(n1 + n2, n1 + n2);
  out.topRightCorner(n1, n2) = M;
  out.bottomLeftCorner(n2, n1) = M.transpose();
  return out;
}

/// [[A, 0], [0, B]].
inline Matrix block_diag(const Matrix& A, const Matrix& B) {
  Matrix out = Matrix::Zero(A.rows() + B.rows(), A.cols() + B.cols());
  out.topLeftCorner(A.rows(), A.cols()) = A;
  out.bottomRightCorner(B.rows(), B.cols()) = B;
  return out;
}

/// sigma_max / sigma_min over the min(rows, cols) singular values.
inline double condition_number(const Matrix& A) {
  const Vector s = singular_values(A);
  const double smin = s(s.size() - 1);
  if (s(0) == 0.0 || smin <= kRankGate * s(0)) {
    throw RankDeficiencyError("condition_number: matrix " + shape_string(A) +
                              " is rank deficient");
  }
  return s(0) / smin;
}

}  // namespace irpca
