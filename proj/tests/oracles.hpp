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

// Reference implementations used only by the tests. None of them share code
// with the library: eigenvalues come from a cyclic Jacobi sweep, inverses
// from Gauss-Jordan elimination, thresholding and the identity-feature loop
// from plain index loops.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "irpca/matrix_ops.hpp"

namespace irpca::oracle {

/// Eigenvalues (descending) and eigenvectors (columns) of a symmetric matrix.
struct Eigen {
  std::vector<double> values;
  Matrix vectors;
};

inline Eigen jacobi_eigen(Matrix A, int max_sweeps = 100) {
  const Index n = A.rows();
  Matrix V = Matrix::Identity(n, n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = p + 1; q < n; ++q) off += A(p, q) * A(p, q);
    if (off < 1e-30 * std::max(1.0, A.squaredNorm())) break;
    for (Index p = 0; p < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        if (A(p, q) == 0.0) continue;
        const double theta = (A(q, q) - A(p, p)) / (2.0 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return A(a, a) > A(b, b); });
  Eigen out;
  out.vectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index i = order[static_cast<std::size_t>(k)];
    out.values.push_back(A(i, i));
    out.vectors.col(k) = V.col(i);
  }
  return out;
}

/// Singular values of A, descending, as the top min(m, n) eigenvalues of
/// the symmetric embedding [[0, A], [A^T, 0]].
inline std::vector<double> singular_values(const Matrix& A) {
  const Index m = A.rows(), n = A.cols();
  Matrix E = Matrix::Zero(m + n, m + n);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < n; ++j) E(i, m + j) = E(m + j, i) = A(i, j);
  const Eigen e = jacobi_eigen(E);
  std::vector<double> s(e.values.begin(), e.values.begin() + std::min(m, n));
  for (double& x : s) x = std::max(x, 0.0);
  return s;
}

inline Matrix gauss_jordan_inverse(Matrix A) {
  const Index n = A.rows();
  Matrix B = Matrix::Identity(n, n);
  for (Index c = 0; c < n; ++c) {
    Index piv = c;
    for (Index r = c + 1; r < n; ++r)
      if (std::abs(A(r, c)) > std::abs(A(piv, c))) piv = r;
    if (A(piv, c) == 0.0) throw std::runtime_error("oracle: singular matrix");
    A.row(c).swap(A.row(piv));
    B.row(c).swap(B.row(piv));
    const double d = A(c, c);
    A.row(c) /= d;
    B.row(c) /= d;
    for (Index r = 0; r < n; ++r) {
      if (r == c) continue;
      const double f = A(r, c);
      A.row(r) -= f * A.row(c);
      B.row(r) -= f * B.row(c);
    }
  }
  return B;
}

/// (A^T A)^{-1} A^T for tall A, A^T (A A^T)^{-1} for wide A.
inline Matrix normal_equation_pinv(const Matrix& A) {
  if (A.rows() >= A.cols()) {
    const Matrix AtA = A.transpose() * A;
    return gauss_jordan_inverse(AtA) * A.transpose();
  }
  const Matrix AAt = A * A.transpose();
  return A.transpose() * gauss_jordan_inverse(AAt);
}

inline Matrix threshold(const Matrix& A, double a) {
  Matrix B = Matrix::Zero(A.rows(), A.cols());
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j)
      if (std::abs(A(i, j)) > a) B(i, j) = A(i, j);
  return B;
}

/// Best rank-r approximation from the Jacobi eigendecomposition of A^T A.
inline Matrix rank_project(const Matrix& A, Index r) {
  const Eigen e = jacobi_eigen(A.transpose() * A);
  const Matrix Vr = e.vectors.leftCols(r);
  return A * Vr * Vr.transpose();
}

/// The solver loop with no features: S = threshold(M - L, zeta_t),
/// L = rank_project(M - S, r).
inline std::pair<Matrix, Matrix> identity_loop(const Matrix& M, Index r, std::size_t T,
                                               const std::function<double(std::size_t)>& zeta,
                                               const std::function<Matrix(const Matrix&, Index)>& project) {
  Matrix L = Matrix::Zero(M.rows(), M.cols());
  Matrix S = L;
  for (std::size_t t = 1; t <= T; ++t) {
    S = threshold(M - L, zeta(t));
    L = project(M - S, r);
  }
  return {L, S};
}

inline Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g;
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) A(i, j) = g(rng);
  return A;
}

}  // namespace irpca::oracle
