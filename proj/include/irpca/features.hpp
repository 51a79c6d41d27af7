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

#pragma once

#include <algorithm>
#include <cmath>
#include <string>

#include "irpca/error.hpp"
#include "irpca/matrix_ops.hpp"

namespace irpca {

/// Tightest incoherence constant of a d x n feature matrix from its SVD:
/// max_j ||row j of V|| * sqrt(n / d).
inline double incoherence(const SvdFactors& f) {
  const double d = static_cast<double>(f.V.cols());
  const double n = static_cast<double>(f.V.rows());
  return f.V.rowwise().norm().maxCoeff() * std::sqrt(n / d);
}

/// A prepared feature pair (F1: d1 x n1, F2: d2 x n2) with cached
/// factorizations, incoherence constants, singular-value extremes and the
/// pseudoinverses (F1^T)^+ and F2^+. Immutable once built by prepare().
class FeaturePair {
public:
  const Matrix& F1() const { return F1_; }
  const Matrix& F2() const { return F2_; }
  const SvdFactors& svd_F1() const { return svd_F1_; }
  const SvdFactors& svd_F2() const { return svd_F2_; }
  const Matrix& pinv_F1T() const { return pinv_F1T_; }
  const Matrix& pinv_F2() const { return pinv_F2_; }

  Index d1() const { return F1_.rows(); }
  Index n1() const { return F1_.cols(); }
  Index d2() const { return F2_.rows(); }
  Index n2() const { return F2_.cols(); }

  double mu_F1() const { return mu_F1_; }
  double mu_F2() const { return mu_F2_; }
  double mu() const { return std::max(mu_F1_, mu_F2_); }

  double sigma_max_F1() const { return svd_F1_.singular_values(0); }
  double sigma_min_F1() const { return svd_F1_.singular_values(d1() - 1); }
  double sigma_max_F2() const { return svd_F2_.singular_values(0); }
  double sigma_min_F2() const { return svd_F2_.singular_values(d2() - 1); }

  double kappa_F1() const { return sigma_max_F1() / sigma_min_F1(); }
  double kappa_F2() const { return sigma_max_F2() / sigma_min_F2(); }
  double kappa() const { return std::max(kappa_F1(), kappa_F2()); }

  /// True when both features are exact identities (transductive setting).
  bool identity() const { return identity_; }

  /// (F1^T)^+ X F2^+, the d1 x d2 feature-space image of an n1 x n2 matrix.
  Matrix compress(const Matrix& X) const {
    if (identity_) return X;
    return pinv_F1T_ * X * pinv_F2_;
  }

  /// F1^T W F2.
  Matrix lift(const Matrix& W) const {
    if (identity_) return W;
    return F1_.transpose() * W * F2_;
  }

  friend FeaturePair prepare(const Matrix& F1, const Matrix& F2);

private:
  FeaturePair() = default;

  Matrix F1_, F2_;
  SvdFactors svd_F1_, svd_F2_;
  double mu_F1_ = 1.0;
  double mu_F2_ = 1.0;
  Matrix pinv_F1T_, pinv_F2_;
  bool identity_ = false;
};

namespace detail {

inline bool is_identity(const Matrix& F) {
  return F.rows() == F.cols() && F == Matrix::Identity(F.rows(), F.cols());
}

inline SvdFactors feature_svd(const Matrix& F, const char* name) {
  require_nonempty(F, name);
  require_finite(F, name);
  if (F.rows() > F.cols()) {
    throw DimensionError(std::string(name) + ": feature dimension " +
                         std::to_string(F.rows()) + " exceeds ambient dimension " +
                         std::to_string(F.cols()));
  }
  if (is_identity(F)) {
    const Index n = F.rows();
    return SvdFactors{Matrix::Identity(n, n), Vector::Ones(n), Matrix::Identity(n, n)};
  }
  SvdFactors f = svd(F);
  const Vector& s = f.singular_values;
  if (s(0) == 0.0 || s(s.size() - 1) <= kRankGate * s(0)) {
    throw RankDeficiencyError(std::string(name) + ": feature matrix is not full row rank");
  }
  return f;
}

}  // namespace detail

/// Validates and characterizes a feature pair. Requires d_i <= n_i and full
/// row rank for both matrices.
inline FeaturePair prepare(const Matrix& F1, const Matrix& F2) {
  FeaturePair fp;
  fp.svd_F1_ = detail::feature_svd(F1, "prepare(F1)");
  fp.svd_F2_ = detail::feature_svd(F2, "prepare(F2)");
  fp.F1_ = F1;
  fp.F2_ = F2;
  fp.identity_ = detail::is_identity(F1) && detail::is_identity(F2);
  fp.mu_F1_ = incoherence(fp.svd_F1_);
  fp.mu_F2_ = incoherence(fp.svd_F2_);

  // F1^T = V1 S1 U1^T, so (F1^T)^+ = U1 S1^-1 V1^T; F2^+ = V2 S2^-1 U2^T.
  const auto& f1 = fp.svd_F1_;
  const auto& f2 = fp.svd_F2_;
  fp.pinv_F1T_ = f1.U * f1.singular_values.cwiseInverse().asDiagonal() * f1.V.transpose();
  fp.pinv_F2_ = f2.V * f2.singular_values.cwiseInverse().asDiagonal() * f2.U.transpose();
  return fp;
}

/// Feature pair for the transductive problem: F1 = I_n1, F2 = I_n2.
inline FeaturePair identity_features(Index n1, Index n2) {
  return prepare(Matrix::Identity(n1, n1), Matrix::Identity(n2, n2));
}

/// ||L - F1^T (F1^T)^+ L F2^+ F2||_F / max(1, ||L||_F). Zero exactly when
/// col(L) lies in col(F1^T) and row(L) lies in row(F2).
inline double feasibility_residual(const Matrix& L, const FeaturePair& fp) {
  if (L.rows() != fp.n1() || L.cols() != fp.n2()) {
    throw DimensionError("feasibility_residual: L is " + shape_string(L) + ", features expect " +
                         std::to_string(fp.n1()) + "x" + std::to_string(fp.n2()));
  }
  const Matrix residual = L - fp.lift(fp.compress(L));
  return residual.norm() / std::max(1.0, L.norm());
}

}  // namespace irpca
