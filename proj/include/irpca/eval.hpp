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
#include <tuple>
#include <utility>

#include "irpca/error.hpp"
#include "irpca/features.hpp"
#include "irpca/matrix_ops.hpp"
#include "irpca/solver.hpp"
#include "irpca/synth.hpp"

namespace irpca {

/// Feasibility residual at or below this counts as feasible.
inline constexpr double kFeasibilityGate = 1e-8;

/// Quantified verdicts on the identifiability conditions. mu, kappa and d
/// are the maxima over the two sides. The sparsity limits use kappa and the
/// noise limit kappa^2, exactly as the conditions are stated.
struct AssumptionReport {
  double feasibility_residual = 0.0;
  bool feasible = false;
  double mu_F1 = 0.0;
  double mu_F2 = 0.0;
  double mu = 0.0;
  double kappa = 0.0;
  Index z1_observed = 0;
  Index z2_observed = 0;
  double z1_bound = 0.0;  ///< n1 / (20 mu^2 d1 kappa)
  double z2_bound = 0.0;  ///< n2 / (20 mu^2 d2 kappa)
  bool sparsity_ok = false;
  double w_norm = 0.0;
  double c_W = 0.0;
  Index w_rank = 0;
  Index r = 0;
  bool rank_ok = false;
  bool latent_ok = false;  ///< ||W*||_2 <= c_W and rank(W*) <= r
  double noise_inf = 0.0;
  double noise_bound = 0.0;  ///< 1 / (40 mu^2 d kappa^2)
  bool noise_ok = false;
  bool overall_ok = false;
};

/// Upper limits on per-row / per-column corruption counts for a feature pair.
inline std::pair<double, double> sparsity_bounds(const FeaturePair& fp) {
  const double mu2 = fp.mu() * fp.mu();
  const double kappa = fp.kappa();
  return {static_cast<double>(fp.n1()) / (20.0 * mu2 * static_cast<double>(fp.d1()) * kappa),
          static_cast<double>(fp.n2()) / (20.0 * mu2 * static_cast<double>(fp.d2()) * kappa)};
}

inline double noise_bound(const FeaturePair& fp) {
  const double mu2 = fp.mu() * fp.mu();
  const double kappa = fp.kappa();
  const double d = static_cast<double>(std::max(fp.d1(), fp.d2()));
  return 1.0 / (40.0 * mu2 * d * kappa * kappa);
}

inline AssumptionReport check_assumptions(const ProblemInstance& inst, Index r, double c_W) {
  if (!inst.truth) throw MissingGroundTruth("check_assumptions: instance has no ground truth");
  const GroundTruth& truth = *inst.truth;
  const FeaturePair& fp = inst.fp;

  AssumptionReport rep;
  rep.feasibility_residual = feasibility_residual(truth.L, fp);
  rep.feasible = rep.feasibility_residual <= kFeasibilityGate;
  rep.mu_F1 = fp.mu_F1();
  rep.mu_F2 = fp.mu_F2();
  rep.mu = fp.mu();
  rep.kappa = fp.kappa();

  const Sparsity sp = row_col_sparsity(truth.S);
  rep.z1_observed = sp.z1;
  rep.z2_observed = sp.z2;
  std::tie(rep.z1_bound, rep.z2_bound) = sparsity_bounds(fp);
  rep.sparsity_ok = static_cast<double>(rep.z1_observed) <= rep.z1_bound &&
                    static_cast<double>(rep.z2_observed) <= rep.z2_bound;

  rep.c_W = c_W;
  rep.r = r;
  rep.w_norm = spectral_norm(truth.W);
  rep.w_rank = truth.W.size() ? numerical_rank(truth.W) : 0;
  rep.rank_ok = rep.w_rank <= r;
  // assemble() scales W* to c_W exactly; allow for the last rounding step.
  rep.latent_ok = rep.w_norm <= c_W * (1.0 + 1e-10) && rep.rank_ok;

  rep.noise_inf = truth.N.size() ? inf_norm(truth.N) : 0.0;
  rep.noise_bound = noise_bound(fp);
  rep.noise_ok = rep.noise_inf <= rep.noise_bound;

  rep.overall_ok = rep.feasible && rep.sparsity_ok && rep.latent_ok &&
                   (rep.noise_inf == 0.0 || rep.noise_ok);
  return rep;
}

struct Metrics {
  double err_L_inf = 0.0;
  double err_L_frob_rel = 0.0;
  double err_S_inf = 0.0;
  double err_S_frob_rel = 0.0;
  double support_precision = 1.0;
  double support_recall = 1.0;
  double residual_rel = 0.0;
  double wall_time_total = 0.0;
  std::size_t iterations = 0;
};

namespace detail {

inline double relative_error(const Matrix& truth, const Matrix& estimate) {
  const double denom = truth.norm();
  const double err = (truth - estimate).norm();
  return denom > 0.0 ? err / denom : err;
}

}  // namespace detail

/// Metrics of estimates (L_hat, S_hat) against the truth. Supports compare
/// exact zeros; an empty predicted support has precision 1, an empty true
/// support has recall 1.
inline Metrics recovery_metrics(const Matrix& L_hat, const Matrix& S_hat, const Matrix& M,
                                const GroundTruth& truth) {
  require_same_shape(L_hat, truth.L, "recovery_metrics(L)");
  require_same_shape(S_hat, truth.S, "recovery_metrics(S)");
  require_same_shape(M, truth.L, "recovery_metrics(M)");
  Metrics m;
  m.err_L_inf = inf_norm(truth.L - L_hat);
  m.err_L_frob_rel = detail::relative_error(truth.L, L_hat);
  m.err_S_inf = inf_norm(truth.S - S_hat);
  m.err_S_frob_rel = detail::relative_error(truth.S, S_hat);

  const auto predicted = (S_hat.array() != 0.0);
  const auto actual = (truth.S.array() != 0.0);
  const Index n_pred = predicted.count();
  const Index n_true = actual.count();
  const Index n_hit = (predicted && actual).count();
  m.support_precision = n_pred ? static_cast<double>(n_hit) / static_cast<double>(n_pred) : 1.0;
  m.support_recall = n_true ? static_cast<double>(n_hit) / static_cast<double>(n_true) : 1.0;

  const double m_norm = M.norm();
  const double res = (M - L_hat - S_hat).norm();
  m.residual_rel = m_norm > 0.0 ? res / m_norm : res;
  return m;
}

inline Metrics recovery_metrics(const SolveResult& result, const ProblemInstance& inst) {
  if (!inst.truth) throw MissingGroundTruth("recovery_metrics: instance has no ground truth");
  Metrics m = recovery_metrics(result.L_hat, result.S_hat, inst.M, *inst.truth);
  m.wall_time_total = result.wall_time_total();
  m.iterations = result.iterations_run;
  return m;
}

}  // namespace irpca
