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

// Seeded ground-truth generation: random features with a prescribed
// condition number, rank-r latent matrices, Bernoulli-support sparse
// corruption, bounded noise, and SVD-derived features for a given
// complete baseline matrix.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <utility>

#include "irpca/error.hpp"
#include "irpca/features.hpp"
#include "irpca/matrix_ops.hpp"
#include "irpca/solver.hpp"

namespace irpca {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent child seed for stream `stream` of `seed`. Used for every
/// generator and for bench cells, so any draw is reproducible from
/// (seed, stream) alone.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream));
}

enum class Stream : std::uint64_t {
  features_left = 1,
  features_right = 2,
  latent = 3,
  sparse = 4,
  noise = 5,
  rotation_left = 6,
  rotation_right = 7,
  baseline = 8,
};

inline std::uint64_t derive_seed(std::uint64_t seed, Stream s) {
  return derive_seed(seed, static_cast<std::uint64_t>(s));
}

namespace detail {

inline Matrix gaussian(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix G(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) G(i, j) = normal(rng);
  return G;
}

// Open interval (0, 1).
inline double uniform_open(Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = 0.0;
  while (x == 0.0) x = u(rng);
  return x;
}

}  // namespace detail

/// rows x cols matrix with orthonormal columns from a Gaussian draw; the
/// implicit R factor is made to have a positive diagonal.
inline Matrix orthonormal_columns(Index rows, Index cols, Rng& rng) {
  if (cols > rows) throw InvalidArgument("orthonormal_columns: cols exceeds rows");
  const Matrix G = detail::gaussian(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(G);
  Matrix Q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Matrix R = qr.matrixQR().topRows(cols).triangularView<Eigen::Upper>();
  for (Index k = 0; k < cols; ++k) {
    if (R(k, k) < 0.0) Q.col(k) = -Q.col(k);
  }
  return Q;
}

/// Uniformly random element of SO(d).
inline Matrix random_rotation(Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix Q = orthonormal_columns(d, d, rng);
  if (Q.determinant() < 0.0) Q.col(0) = -Q.col(0);
  return Q;
}

/// d x n feature matrix U diag(sigma) V^T with orthonormal Gaussian U, V and
/// singular values spaced geometrically from kappa_target down to 1.
inline Matrix gen_features(Index d, Index n, double kappa_target, std::uint64_t seed) {
  if (d < 1 || d > n) {
    throw InvalidArgument("gen_features: need 1 <= d <= n, got d=" + std::to_string(d) +
                          " n=" + std::to_string(n));
  }
  if (!(kappa_target >= 1.0) || !std::isfinite(kappa_target)) {
    throw InvalidArgument("gen_features: kappa_target must be finite and >= 1");
  }
  if (d == 1 && kappa_target != 1.0) {
    throw InvalidArgument("gen_features: a single-row feature matrix has condition number 1");
  }
  Rng rng(seed);
  const Matrix U = orthonormal_columns(d, d, rng);
  const Matrix V = orthonormal_columns(n, d, rng);
  Vector sigma = Vector::Ones(d);
  if (d > 1) {
    for (Index i = 0; i < d; ++i) {
      const double frac = static_cast<double>(d - 1 - i) / static_cast<double>(d - 1);
      sigma(i) = std::pow(kappa_target, frac);
    }
  }
  return U * sigma.asDiagonal() * V.transpose();
}

/// d1 x d2 matrix of rank r: uniform (0, 1) entries truncated to the top r
/// singular values. The symmetric variant (d1 == d2) symmetrizes first and
/// re-projects to rank r.
inline Matrix gen_latent(Index d1, Index d2, Index r, std::uint64_t seed, bool symmetric = false) {
  if (r < 1 || r > std::min(d1, d2)) {
    throw InvalidArgument("gen_latent: rank " + std::to_string(r) + " outside [1, min(d1, d2)]");
  }
  if (symmetric && d1 != d2) throw InvalidArgument("gen_latent: symmetric variant needs d1 == d2");
  Rng rng(seed);
  Matrix A(d1, d2);
  for (Index i = 0; i < d1; ++i)
    for (Index j = 0; j < d2; ++j) A(i, j) = detail::uniform_open(rng);
  if (!symmetric) return rank_project(A, r);
  Matrix W = rank_project(0.5 * (A + A.transpose()), r);
  return 0.5 * (W + W.transpose());
}

/// Default corruption magnitude band (5r / sqrt(n1 n2), 10r / sqrt(n1 n2)).
inline std::pair<double, double> default_magnitude_band(Index n1, Index n2, Index r) {
  const double scale = static_cast<double>(r) / std::sqrt(static_cast<double>(n1) * n2);
  return {5.0 * scale, 10.0 * scale};
}

/// Each entry joins the support independently with probability
/// z / max(n1, n2); its magnitude is uniform in (mag_low, mag_high) and its
/// sign is uniform.
inline Matrix gen_sparse(Index n1, Index n2, double z, double mag_low, double mag_high,
                         std::uint64_t seed) {
  if (n1 < 1 || n2 < 1) throw InvalidArgument("gen_sparse: dimensions must be positive");
  if (!(z >= 0.0) || z > static_cast<double>(std::min(n1, n2))) {
    throw InvalidArgument("gen_sparse: level z must lie in [0, min(n1, n2)]");
  }
  if (!(mag_low > 0.0) || !(mag_high > mag_low) || !std::isfinite(mag_high)) {
    throw InvalidArgument("gen_sparse: magnitude band must satisfy 0 < low < high");
  }
  const double p = z / static_cast<double>(std::max(n1, n2));
  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> mag(mag_low, mag_high);
  Matrix S = Matrix::Zero(n1, n2);
  for (Index i = 0; i < n1; ++i) {
    for (Index j = 0; j < n2; ++j) {
      if (unit(rng) >= p) continue;
      double m = mag_low;
      while (m <= mag_low || m >= mag_high) m = mag(rng);
      S(i, j) = (rng() & 1ULL) ? m : -m;
    }
  }
  return S;
}

/// i.i.d. uniform entries in [-inf_bound, inf_bound].
inline Matrix gen_noise(Index n1, Index n2, double inf_bound, std::uint64_t seed) {
  if (!(inf_bound >= 0.0) || !std::isfinite(inf_bound)) {
    throw InvalidArgument("gen_noise: bound must be finite and >= 0");
  }
  Matrix N = Matrix::Zero(n1, n2);
  if (inf_bound == 0.0) return N;
  Rng rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (Index i = 0; i < n1; ++i)
    for (Index j = 0; j < n2; ++j) N(i, j) = inf_bound * u(rng);
  return N;
}

struct SynthSpec {
  Index n1 = 1000;
  Index n2 = 1000;
  Index d1 = 10;
  Index d2 = 10;
  Index r = 3;
  double z = 1.0;
  std::optional<double> magnitude_low;   ///< default: 5r / sqrt(n1 n2)
  std::optional<double> magnitude_high;  ///< default: 10r / sqrt(n1 n2)
  double kappa_target = 1.0;
  double noise_inf_bound = 0.0;
  double c_W = 1.0;
  /// F1 = F2, symmetric W*, S*, N* (requires n1 == n2, d1 == d2).
  bool symmetric = false;
  std::uint64_t seed = 0;

  std::pair<double, double> magnitude_band() const {
    const auto def = default_magnitude_band(n1, n2, r);
    return {magnitude_low.value_or(def.first), magnitude_high.value_or(def.second)};
  }

  void validate() const {
    if (n1 < 1 || n2 < 1 || d1 < 1 || d2 < 1) throw InvalidArgument("synth spec: dimensions must be positive");
    if (d1 > n1 || d2 > n2) throw InvalidArgument("synth spec: need d1 <= n1 and d2 <= n2");
    if (r < 1 || r > std::min(d1, d2)) throw InvalidArgument("synth spec: need 1 <= r <= min(d1, d2)");
    if (!(z >= 0.0) || z > static_cast<double>(std::min(n1, n2))) {
      throw InvalidArgument("synth spec: z must lie in [0, min(n1, n2)]");
    }
    const auto [lo, hi] = magnitude_band();
    if (!(lo > 0.0) || !(hi > lo)) throw InvalidArgument("synth spec: magnitude band must satisfy 0 < low < high");
    if (!(kappa_target >= 1.0)) throw InvalidArgument("synth spec: kappa_target must be >= 1");
    if (!(noise_inf_bound >= 0.0)) throw InvalidArgument("synth spec: noise bound must be >= 0");
    if (!(c_W > 0.0)) throw InvalidArgument("synth spec: c_W must be > 0");
    if (symmetric && (n1 != n2 || d1 != d2)) {
      throw InvalidArgument("synth spec: symmetric instances need n1 == n2 and d1 == d2");
    }
  }
};

struct ProblemInstance {
  Matrix M;
  FeaturePair fp;
  std::optional<GroundTruth> truth;
};

namespace detail {

inline Matrix mirror_upper(const Matrix& A) {
  Matrix out = A.triangularView<Eigen::Upper>();
  out.triangularView<Eigen::StrictlyLower>() = out.transpose();
  return out;
}

}  // namespace detail

/// Feature pair drawn exactly as assemble(spec) draws it.
inline FeaturePair synth_features(const SynthSpec& spec) {
  spec.validate();
  const Matrix F1 = gen_features(spec.d1, spec.n1, spec.kappa_target,
                                 derive_seed(spec.seed, Stream::features_left));
  if (spec.symmetric) return prepare(F1, F1);
  const Matrix F2 = gen_features(spec.d2, spec.n2, spec.kappa_target,
                                 derive_seed(spec.seed, Stream::features_right));
  return prepare(F1, F2);
}

/// Builds M = F1^T W* F2 + S* + N* on the given features, with W* scaled so
/// that ||W*||_2 = c_W.
inline ProblemInstance assemble(const SynthSpec& spec, const FeaturePair& fp) {
  spec.validate();
  if (fp.d1() != spec.d1 || fp.n1() != spec.n1 || fp.d2() != spec.d2 || fp.n2() != spec.n2) {
    throw DimensionError("assemble: features do not match the spec dimensions");
  }
  GroundTruth truth;
  truth.W = gen_latent(spec.d1, spec.d2, spec.r, derive_seed(spec.seed, Stream::latent),
                       spec.symmetric);
  truth.W *= spec.c_W / spectral_norm(truth.W);
  truth.L = fp.lift(truth.W);

  const auto [lo, hi] = spec.magnitude_band();
  truth.S = gen_sparse(spec.n1, spec.n2, spec.z, lo, hi, derive_seed(spec.seed, Stream::sparse));
  truth.N = gen_noise(spec.n1, spec.n2, spec.noise_inf_bound,
                      derive_seed(spec.seed, Stream::noise));
  if (spec.symmetric) {
    truth.L = 0.5 * (truth.L + truth.L.transpose());
    truth.S = detail::mirror_upper(truth.S);
    truth.N = detail::mirror_upper(truth.N);
  }

  ProblemInstance inst{truth.L + truth.S + truth.N, fp, std::nullopt};
  inst.truth = std::move(truth);
  return inst;
}

inline ProblemInstance assemble(const SynthSpec& spec) {
  return assemble(spec, synth_features(spec));
}

struct SvdFeatures {
  Matrix F1;  ///< d1 x n1
  Matrix F2;  ///< d2 x n2
  Index latent_rank = 0;
  /// True when d1 or d2 exceeds rank(L): the extra directions are arbitrary
  /// singular vectors of the null space and carry no signal.
  bool beyond_rank = false;
};

/// F1 = (U_L[:, :d1] Q_U)^T, F2 = (V_L[:, :d2] Q_V)^T with seeded random
/// rotations Q_U in SO(d1), Q_V in SO(d2). L is feasible for the result
/// whenever rank(L) <= min(d1, d2).
inline SvdFeatures features_from_svd(const Matrix& L, Index d1, Index d2, std::uint64_t seed) {
  require_nonempty(L, "features_from_svd");
  const Index k = std::min(L.rows(), L.cols());
  if (d1 < 1 || d2 < 1 || d1 > k || d2 > k) {
    throw InvalidArgument("features_from_svd: need 1 <= d1, d2 <= min(n1, n2) = " +
                          std::to_string(k));
  }
  const SvdFactors f = svd(L);
  SvdFeatures out;
  const Vector& s = f.singular_values;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(0) > 0.0 && s(i) > kRankGate * s(0)) ++out.latent_rank;
  }
  out.beyond_rank = std::max(d1, d2) > out.latent_rank;
  const Matrix QU = random_rotation(d1, derive_seed(seed, Stream::rotation_left));
  const Matrix QV = random_rotation(d2, derive_seed(seed, Stream::rotation_right));
  out.F1 = (f.U.leftCols(d1) * QU).transpose();
  out.F2 = (f.V.leftCols(d2) * QV).transpose();
  return out;
}

/// Complete n1 x n2 rank-r "ratings" matrix: product of uniform (0, 1)
/// factors rescaled so its largest entry equals max_value.
inline Matrix gen_low_rank_baseline(Index n1, Index n2, Index r, double max_value,
                                    std::uint64_t seed) {
  if (r < 1 || r > std::min(n1, n2)) throw InvalidArgument("gen_low_rank_baseline: bad rank");
  if (!(max_value > 0.0)) throw InvalidArgument("gen_low_rank_baseline: max_value must be > 0");
  Rng rng(seed);
  Matrix A(n1, r), B(n2, r);
  for (Index i = 0; i < n1; ++i)
    for (Index k = 0; k < r; ++k) A(i, k) = detail::uniform_open(rng);
  for (Index j = 0; j < n2; ++j)
    for (Index k = 0; k < r; ++k) B(j, k) = detail::uniform_open(rng);
  Matrix L = A * B.transpose();
  return L * (max_value / L.maxCoeff());
}

/// Semi-real instance around a complete baseline L: SVD-derived features,
/// W* = (F1^T)^+ L F2^+, sparse corruption with Bernoulli level z.
inline ProblemInstance assemble_from_baseline(const Matrix& L, Index d1, Index d2, Index r,
                                              double z, std::optional<double> mag_low,
                                              std::optional<double> mag_high,
                                              std::uint64_t seed) {
  const SvdFeatures sf = features_from_svd(L, d1, d2, derive_seed(seed, Stream::features_left));
  FeaturePair fp = prepare(sf.F1, sf.F2);
  const auto def = default_magnitude_band(L.rows(), L.cols(), r);
  GroundTruth truth;
  truth.W = fp.compress(L);
  truth.L = L;
  truth.S = gen_sparse(L.rows(), L.cols(), z, mag_low.value_or(def.first),
                       mag_high.value_or(def.second), derive_seed(seed, Stream::sparse));
  truth.N = Matrix::Zero(L.rows(), L.cols());
  ProblemInstance inst{truth.L + truth.S, std::move(fp), std::nullopt};
  inst.truth = std::move(truth);
  return inst;
}

}  // namespace irpca
