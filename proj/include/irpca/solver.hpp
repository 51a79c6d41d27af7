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

// Inductive robust PCA by iterative hard thresholding. Starting from L_0 = 0,
// each iteration alternates
//   S_t = P_{zeta_t}(M - L_{t-1})                  (entry-wise threshold)
//   W_t = P_r((F1^T)^+ (M - S_t) F2^+)            (rank-r truncation, d1 x d2)
//   L_t = F1^T W_t F2
// with a threshold zeta_t that shrinks geometrically by 5 toward nu.

#pragma once

#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "irpca/error.hpp"
#include "irpca/features.hpp"
#include "irpca/matrix_ops.hpp"

namespace irpca {

enum class StopRule {
  fixed,     ///< run exactly max_iters iterations
  residual,  ///< stop once ||M - L_t - S_t||_F / ||M||_F <= residual_tol
};

inline const char* to_string(StopRule rule) {
  return rule == StopRule::fixed ? "fixed" : "residual";
}

inline StopRule parse_stop_rule(const std::string& s) {
  if (s == "fixed") return StopRule::fixed;
  if (s == "residual") return StopRule::residual;
  throw InvalidArgument("unknown stop rule '" + s + "' (expected fixed|residual)");
}

struct SolverConfig {
  Index rank = 1;
  double nu = 0.0;
  double c_W = 1.0;
  double epsilon = 1e-6;
  /// Iteration cap; when empty, required_iters() supplies it.
  std::optional<std::size_t> max_iters;
  StopRule stop_rule = StopRule::residual;
  double residual_tol = 1e-3;

  void validate() const {
    if (rank < 1) throw InvalidArgument("solver config: rank must be >= 1");
    if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("solver config: nu must be >= 0");
    if (!(c_W > 0.0) || !std::isfinite(c_W)) throw InvalidArgument("solver config: c_W must be > 0");
    if (!(epsilon > 0.0)) throw InvalidArgument("solver config: epsilon must be > 0");
    if (max_iters && *max_iters < 1) throw InvalidArgument("solver config: max_iters must be >= 1");
    if (!(residual_tol >= 0.0)) throw InvalidArgument("solver config: residual_tol must be >= 0");
  }

  /// Validates against a feature pair as well (rank <= min(d1, d2)).
  void validate(const FeaturePair& fp) const {
    validate();
    const Index cap = std::min(fp.d1(), fp.d2());
    if (rank > cap) {
      throw InvalidArgument("solver config: rank " + std::to_string(rank) +
                            " exceeds min(d1, d2) = " + std::to_string(cap));
    }
  }
};

/// Ground-truth components of a generated instance, M = L + S + N, L = F1^T W F2.
struct GroundTruth {
  Matrix W;
  Matrix L;
  Matrix S;
  Matrix N;
};

struct IterationRecord {
  std::size_t t = 0;
  double zeta = 0.0;
  double residual = 0.0;
  std::optional<double> err_L_inf;
  std::optional<double> err_S_inf;
  std::optional<Index> support_false_positives;
  double wall_time = 0.0;  ///< seconds, ground-truth bookkeeping excluded
};

struct SolveResult {
  Matrix W_hat;
  Matrix S_hat;
  Matrix L_hat;
  std::vector<IterationRecord> trace;
  std::size_t iterations_run = 0;
  bool converged = false;

  double wall_time_total() const {
    double total = 0.0;
    for (const auto& rec : trace) total += rec.wall_time;
    return total;
  }
};

/// mu_F1 mu_F2 sigma_max(F1) sigma_max(F2) sqrt(d1 d2 / (n1 n2)) c_W, which
/// bounds ||L*||_inf for any feasible L* with ||W*||_2 <= c_W.
inline double envelope_base(const FeaturePair& fp, double c_W) {
  const double dims = static_cast<double>(fp.d1()) * static_cast<double>(fp.d2()) /
                      (static_cast<double>(fp.n1()) * static_cast<double>(fp.n2()));
  return fp.mu_F1() * fp.mu_F2() * fp.sigma_max_F1() * fp.sigma_max_F2() * std::sqrt(dims) * c_W;
}

/// Noiseless bound on ||L* - L_t||_inf after t iterations: base / 5^t.
inline double convergence_envelope(std::size_t t, const FeaturePair& fp, double c_W) {
  return envelope_base(fp, c_W) / std::pow(5.0, static_cast<double>(t));
}

/// Threshold schedule: zeta_0 = 5 base + nu, zeta_t = base / 5^(t-1) + nu.
inline double zeta(std::size_t t, const FeaturePair& fp, const SolverConfig& cfg) {
  const double base = envelope_base(fp, cfg.c_W);
  if (t == 0) return 5.0 * base + cfg.nu;
  return base / std::pow(5.0, static_cast<double>(t - 1)) + cfg.nu;
}

/// Smallest T strictly above ceil(log_5(2 base / epsilon)) + 1, or 1 when
/// epsilon already dominates 2 base.
inline std::size_t required_iters(const FeaturePair& fp, const SolverConfig& cfg) {
  if (!(cfg.epsilon > 0.0)) throw InvalidArgument("required_iters: epsilon must be > 0");
  const double ratio = 2.0 * envelope_base(fp, cfg.c_W) / cfg.epsilon;
  if (ratio <= 1.0) return 1;
  // ceil(log_5(ratio)) by exact stepping; powers of 5 are exact doubles here.
  std::size_t k = 0;
  double p = 1.0;
  while (p < ratio) {
    p *= 5.0;
    ++k;
  }
  return k + 2;
}

/// nu = (3 mu^2 d kappa^2 + 1) * noise_inf_bound, the threshold floor that
/// absorbs dense noise with ||N||_inf <= noise_inf_bound.
inline double noise_parameter(const FeaturePair& fp, double noise_inf_bound) {
  if (!(noise_inf_bound >= 0.0)) throw InvalidArgument("noise_parameter: bound must be >= 0");
  const double mu = fp.mu();
  const double d = static_cast<double>(std::max(fp.d1(), fp.d2()));
  const double kappa = fp.kappa();
  return (3.0 * mu * mu * d * kappa * kappa + 1.0) * noise_inf_bound;
}

inline std::size_t effective_max_iters(const FeaturePair& fp, const SolverConfig& cfg) {
  return cfg.max_iters ? *cfg.max_iters : required_iters(fp, cfg);
}

namespace detail {

inline void check_truth_shape(const GroundTruth& truth, const Matrix& M) {
  require_same_shape(truth.L, M, "ground truth L");
  require_same_shape(truth.S, M, "ground truth S");
}

inline double relative_residual(const Matrix& M, const Matrix& L, const Matrix& S,
                                double m_norm) {
  const double r = (M - L - S).norm();
  return m_norm > 0.0 ? r / m_norm : r;
}

}  // namespace detail

/// Runs the iteration on M with the given features. Ground truth, when
/// supplied, only feeds the error columns of the trace.
inline SolveResult irpca_iht(const Matrix& M, const FeaturePair& fp, const SolverConfig& cfg,
                             const GroundTruth* truth = nullptr) {
  cfg.validate(fp);
  require_nonempty(M, "irpca_iht");
  require_finite(M, "irpca_iht");
  if (M.rows() != fp.n1() || M.cols() != fp.n2()) {
    throw DimensionError("irpca_iht: M is " + shape_string(M) + ", features expect " +
                         std::to_string(fp.n1()) + "x" + std::to_string(fp.n2()));
  }
  if (truth) detail::check_truth_shape(*truth, M);

  using clock = std::chrono::steady_clock;
  const std::size_t T = effective_max_iters(fp, cfg);
  const double m_norm = M.norm();

  SolveResult out;
  out.trace.reserve(T);
  Matrix L = Matrix::Zero(M.rows(), M.cols());
  Matrix S = Matrix::Zero(M.rows(), M.cols());
  Matrix W = Matrix::Zero(fp.d1(), fp.d2());

  for (std::size_t t = 1; t <= T; ++t) {
    const auto start = clock::now();
    IterationRecord rec;
    rec.t = t;
    rec.zeta = zeta(t, fp, cfg);
    S = entry_threshold(M - L, rec.zeta);
    W = rank_project(fp.compress(M - S), cfg.rank);
    L = fp.lift(W);
    rec.residual = detail::relative_residual(M, L, S, m_norm);
    rec.wall_time = std::chrono::duration<double>(clock::now() - start).count();

    if (truth) {
      rec.err_L_inf = inf_norm(truth->L - L);
      rec.err_S_inf = inf_norm(truth->S - S);
      rec.support_false_positives =
          ((S.array() != 0.0) && (truth->S.array() == 0.0)).count();
    }
    out.trace.push_back(rec);
    out.iterations_run = t;
    if (cfg.stop_rule == StopRule::residual && rec.residual <= cfg.residual_tol) {
      out.converged = true;
      break;
    }
  }
  if (cfg.stop_rule == StopRule::fixed) out.converged = out.iterations_run == T;

  out.W_hat = std::move(W);
  out.S_hat = std::move(S);
  out.L_hat = std::move(L);
  return out;
}

/// No side information: identity features, W = L.
inline SolveResult transductive_solve(const Matrix& M, const SolverConfig& cfg,
                                      const GroundTruth* truth = nullptr) {
  require_nonempty(M, "transductive_solve");
  return irpca_iht(M, identity_features(M.rows(), M.cols()), cfg, truth);
}

/// Embedded feature pair for sym(M): both sides use blockdiag(F1, F2).
inline FeaturePair embed_features(const FeaturePair& fp) {
  const Matrix F = block_diag(fp.F1(), fp.F2());
  return prepare(F, F);
}

/// Ground truth mapped through the symmetric embedding; W becomes
/// [[0, W], [W^T, 0]] and has twice the rank.
inline GroundTruth embed_truth(const GroundTruth& truth) {
  return GroundTruth{sym_embed(truth.W), sym_embed(truth.L), sym_embed(truth.S),
                     truth.N.size() ? sym_embed(truth.N) : Matrix()};
}

/// Runs the iteration on sym(M) with blockdiag features and rank 2r, then
/// extracts the upper-right blocks. Cross-check for the direct path.
inline SolveResult solve_asymmetric_via_embedding(const Matrix& M, const FeaturePair& fp,
                                                  const SolverConfig& cfg,
                                                  const GroundTruth* truth = nullptr) {
  cfg.validate(fp);
  if (M.rows() != fp.n1() || M.cols() != fp.n2()) {
    throw DimensionError("solve_asymmetric_via_embedding: M is " + shape_string(M) +
                         ", features expect " + std::to_string(fp.n1()) + "x" +
                         std::to_string(fp.n2()));
  }
  const FeaturePair efp = embed_features(fp);
  SolverConfig ecfg = cfg;
  ecfg.rank = 2 * cfg.rank;

  std::optional<GroundTruth> etruth;
  if (truth) {
    detail::check_truth_shape(*truth, M);
    etruth = embed_truth(*truth);
  }
  SolveResult emb = irpca_iht(sym_embed(M), efp, ecfg, etruth ? &*etruth : nullptr);

  SolveResult out;
  out.W_hat = emb.W_hat.topRightCorner(fp.d1(), fp.d2());
  out.S_hat = emb.S_hat.topRightCorner(fp.n1(), fp.n2());
  out.L_hat = fp.lift(out.W_hat);
  out.trace = std::move(emb.trace);
  out.iterations_run = emb.iterations_run;
  out.converged = emb.converged;
  return out;
}

}  // namespace irpca
