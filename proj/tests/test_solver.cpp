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

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "irpca/eval.hpp"
#include "irpca/solver.hpp"
#include "irpca/synth.hpp"
#include "oracles.hpp"

namespace irpca {
namespace {

// d x n features whose right singular vectors have equal row energy d / n
// and unit singular values, so mu = sigma_max = 1. Columns of V: constant,
// alternating, and one cos/sin pair.
Matrix equal_energy_features(Index n) {
  Matrix V(n, 4);
  const double dn = static_cast<double>(n);
  for (Index j = 0; j < n; ++j) {
    const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / dn;
    V(j, 0) = 1.0 / std::sqrt(dn);
    V(j, 1) = (j % 2 ? -1.0 : 1.0) / std::sqrt(dn);
    V(j, 2) = std::sqrt(2.0 / dn) * std::cos(a);
    V(j, 3) = std::sqrt(2.0 / dn) * std::sin(a);
  }
  return V.transpose();
}

FeaturePair unit_pair() {
  const Matrix F = equal_energy_features(100);
  return prepare(F, F);
}

SolverConfig fixed_config(Index r, double eps = 1e-6) {
  SolverConfig cfg;
  cfg.rank = r;
  cfg.epsilon = eps;
  cfg.stop_rule = StopRule::fixed;
  return cfg;
}

TEST(Schedule, UnitFeaturesAreUnit) {
  const FeaturePair fp = unit_pair();
  EXPECT_NEAR(fp.mu(), 1.0, 1e-12);
  EXPECT_NEAR(fp.sigma_max_F1(), 1.0, 1e-12);
  EXPECT_NEAR(fp.kappa(), 1.0, 1e-12);
}

TEST(Schedule, ZetaValues) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  EXPECT_NEAR(zeta(0, fp, cfg), 0.2, 1e-12);
  EXPECT_NEAR(zeta(1, fp, cfg), 0.04, 1e-13);
  EXPECT_NEAR(zeta(3, fp, cfg), 0.0016, 1e-14);
  cfg.nu = 0.5;
  EXPECT_NEAR(zeta(1, fp, cfg), 0.54, 1e-13);
}

TEST(Schedule, ZetaStrictlyDecreasesTowardNu) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  cfg.nu = 0.01;
  // 0.2 / 5^15 is still resolvable against nu in double precision.
  for (std::size_t t = 0; t < 15; ++t) {
    EXPECT_LT(zeta(t + 1, fp, cfg), zeta(t, fp, cfg));
    EXPECT_GT(zeta(t + 1, fp, cfg), cfg.nu);
  }
  EXPECT_NEAR(zeta(60, fp, cfg), cfg.nu, 1e-15);
}

TEST(Schedule, EnvelopeIsZetaShifted) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  cfg.c_W = 2.5;
  for (std::size_t t = 1; t < 6; ++t) {
    EXPECT_NEAR(zeta(t, fp, cfg), convergence_envelope(t - 1, fp, cfg.c_W), 1e-15);
  }
}

TEST(Schedule, RequiredIters) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  cfg.epsilon = 1e-6;
  EXPECT_EQ(required_iters(fp, cfg), 10u);
  cfg.epsilon = 0.08 * (1.0 + 1e-12);  // 2 * base, past rounding in base
  EXPECT_EQ(required_iters(fp, cfg), 1u);
  cfg.epsilon = 1.0;
  EXPECT_EQ(required_iters(fp, cfg), 1u);
  cfg.epsilon = 0.0;
  EXPECT_THROW(required_iters(fp, cfg), InvalidArgument);
}

TEST(Schedule, HalvingEpsilonAddsAtMostOneIteration) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  // Above the clamp (2 base / eps > 1) the count is ceil(log_5) + 2.
  for (double eps = 0.07; eps > 1e-12; eps /= 2.0) {
    cfg.epsilon = eps;
    const std::size_t a = required_iters(fp, cfg);
    cfg.epsilon = eps / 2.0;
    const std::size_t b = required_iters(fp, cfg);
    EXPECT_GE(b, a);
    EXPECT_LE(b, a + 1);
  }
}

TEST(Schedule, NoiseParameter) {
  const FeaturePair fp = unit_pair();
  // mu = kappa = 1, d = 4: nu = (3 * 4 + 1) * b.
  EXPECT_NEAR(noise_parameter(fp, 0.01), 0.13, 1e-14);
  EXPECT_EQ(noise_parameter(fp, 0.0), 0.0);
  EXPECT_THROW(noise_parameter(fp, -1.0), InvalidArgument);
}

TEST(Config, Validation) {
  SolverConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.rank = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SolverConfig{};
  cfg.nu = -1.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SolverConfig{};
  cfg.c_W = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SolverConfig{};
  cfg.epsilon = 0.0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SolverConfig{};
  cfg.max_iters = 0;
  EXPECT_THROW(cfg.validate(), InvalidArgument);
  cfg = SolverConfig{};
  cfg.rank = 5;
  EXPECT_THROW(cfg.validate(unit_pair()), InvalidArgument);
  EXPECT_EQ(parse_stop_rule("fixed"), StopRule::fixed);
  EXPECT_EQ(parse_stop_rule("residual"), StopRule::residual);
  EXPECT_THROW(parse_stop_rule("never"), InvalidArgument);
}

TEST(Iht, NoCorruptionRecoversInOneIteration) {
  const FeaturePair fp = unit_pair();
  Matrix W = oracle::random_matrix(4, 4, 5);
  W = rank_project(W, 2);
  W /= spectral_norm(W);
  const Matrix M = fp.lift(W);
  SolverConfig cfg;
  cfg.rank = 2;
  const SolveResult res = irpca_iht(M, fp, cfg);
  EXPECT_EQ(res.iterations_run, 1u);
  EXPECT_TRUE(res.converged);
  EXPECT_TRUE(res.S_hat.isZero(0.0));
  EXPECT_LE(inf_norm(res.W_hat - W), 1e-12);
}

TEST(Iht, SeededNoiselessInstance) {
  SynthSpec spec;
  spec.n1 = spec.n2 = 100;
  spec.d1 = spec.d2 = 5;
  spec.r = 2;
  spec.z = 0.3;
  spec.seed = 4;
  const ProblemInstance inst = assemble(spec);
  const SolverConfig cfg = fixed_config(2);
  const SolveResult res = irpca_iht(inst.M, inst.fp, cfg, &*inst.truth);
  EXPECT_EQ(res.iterations_run, required_iters(inst.fp, cfg));
  EXPECT_LE(inf_norm(inst.truth->L - res.L_hat), 1e-6);
  for (const auto& rec : res.trace) EXPECT_EQ(*rec.support_false_positives, 0);
  EXPECT_TRUE(((res.S_hat.array() != 0.0) && (inst.truth->S.array() == 0.0)).count() == 0);
}

TEST(Iht, AssumptionPassingInstancesObeyEnvelopes) {
  int passing = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SynthSpec spec;
    spec.n1 = spec.n2 = 400;
    spec.d1 = spec.d2 = 2;
    spec.r = 1;
    spec.z = 0.05;
    spec.seed = seed;
    const ProblemInstance inst = assemble(spec);
    if (!check_assumptions(inst, spec.r, spec.c_W).overall_ok) continue;
    ++passing;
    const SolverConfig cfg = fixed_config(1);
    const SolveResult res = irpca_iht(inst.M, inst.fp, cfg, &*inst.truth);
    for (const auto& rec : res.trace) {
      EXPECT_LE(*rec.err_L_inf, convergence_envelope(rec.t, inst.fp, cfg.c_W) + 1e-9);
      EXPECT_LE(*rec.err_S_inf, 2.0 * convergence_envelope(rec.t - 1, inst.fp, cfg.c_W) + 1e-9);
      EXPECT_EQ(*rec.support_false_positives, 0);
    }
    const Metrics m = recovery_metrics(res, inst);
    EXPECT_LE(m.err_L_inf, 1e-6);
    EXPECT_LE(m.err_S_inf, 1e-6);
    EXPECT_EQ(m.support_precision, 1.0);
  }
  EXPECT_GE(passing, 3);
}

TEST(Iht, IdentityFeaturesMatchFeaturelessLoop) {
  const Index n = 30;
  const Matrix L = rank_project(oracle::random_matrix(n, n, 8), 2);
  Matrix M = L / spectral_norm(L);
  M(3, 4) += 2.0;
  M(10, 20) -= 1.5;
  const FeaturePair fp = identity_features(n, n);
  SolverConfig cfg = fixed_config(2);
  cfg.max_iters = 12;
  const SolveResult res = irpca_iht(M, fp, cfg);
  auto z = [&](std::size_t t) { return zeta(t, fp, cfg); };

  const auto [L_lib, S_lib] = oracle::identity_loop(M, 2, 12, z, [](const Matrix& A, Index r) {
    return rank_project(A, r);
  });
  EXPECT_TRUE(res.L_hat == L_lib);
  EXPECT_TRUE(res.S_hat == S_lib);
  EXPECT_TRUE(res.W_hat == res.L_hat);

  const auto [L_ref, S_ref] = oracle::identity_loop(M, 2, 12, z, oracle::rank_project);
  EXPECT_LE(inf_norm(res.L_hat - L_ref), 1e-9);
  EXPECT_TRUE((res.S_hat.array() != 0.0).cwiseEqual(S_ref.array() != 0.0).all());
}

TEST(Iht, TransductiveEqualsIdentityFeatures) {
  const Matrix M = oracle::random_matrix(12, 9, 31);
  SolverConfig cfg = fixed_config(2);
  cfg.max_iters = 6;
  const SolveResult a = transductive_solve(M, cfg);
  const SolveResult b = irpca_iht(M, identity_features(12, 9), cfg);
  EXPECT_TRUE(a.L_hat == b.L_hat);
  EXPECT_TRUE(a.S_hat == b.S_hat);
  EXPECT_TRUE(a.W_hat == b.W_hat);
}

TEST(Iht, TransductiveRankOnePlusSpike) {
  // L*(1, 2) = 0, so removing the spike at zeta_1 = 1 leaves L* itself.
  Vector u(5), v(5);
  u << 1.0, 0.0, 2.0, -1.0, 1.0;
  v << 2.0, 1.0, 1.0, -1.0, 0.5;
  const Matrix L = 0.5 * (u.normalized() * v.normalized().transpose());  // ||L||_2 = 0.5
  Matrix S = Matrix::Zero(5, 5);
  S(1, 2) = 3.0;
  const SolveResult res = transductive_solve(L + S, fixed_config(1));
  EXPECT_LE(inf_norm(res.L_hat - L), 1e-12);
  EXPECT_LE(inf_norm(res.S_hat - S), 1e-12);
  EXPECT_EQ(count_nonzero(res.S_hat), 1);
}

TEST(Iht, SpikeOnSupportOfDenseRankOneIsBiased) {
  // One spike per row is 4x the transductive sparsity bound of 1/20; the
  // thresholds outpace the error and spurious entries enter S.
  const Matrix L = Matrix::Constant(5, 5, 0.2);
  Matrix S = Matrix::Zero(5, 5);
  S(1, 2) = 3.0;
  const SolveResult res = transductive_solve(L + S, fixed_config(1));
  EXPECT_GT(inf_norm(res.L_hat - L), 1e-6);
  EXPECT_LE(inf_norm(res.L_hat - L), 1e-2);
  EXPECT_LT(res.trace.back().residual, 1e-10);
}

TEST(Iht, ZeroInput) {
  const SolveResult res = transductive_solve(Matrix::Zero(4, 6), fixed_config(1));
  EXPECT_TRUE(res.W_hat.isZero(0.0));
  EXPECT_TRUE(res.S_hat.isZero(0.0));
  SolverConfig cfg;
  const SolveResult r2 = transductive_solve(Matrix::Zero(4, 6), cfg);
  EXPECT_TRUE(r2.converged);
  EXPECT_EQ(r2.iterations_run, 1u);
}

TEST(Iht, OutputInvariantsAndDeterminism) {
  SynthSpec spec;
  spec.n1 = 80;
  spec.n2 = 120;
  spec.d1 = 4;
  spec.d2 = 6;
  spec.r = 2;
  spec.z = 1.0;
  spec.seed = 12;
  const ProblemInstance inst = assemble(spec);
  SolverConfig cfg = fixed_config(2);
  const SolveResult a = irpca_iht(inst.M, inst.fp, cfg, &*inst.truth);
  const SolveResult b = irpca_iht(inst.M, inst.fp, cfg, &*inst.truth);
  EXPECT_LE(numerical_rank(a.W_hat), 2);
  EXPECT_LE(inf_norm(a.L_hat - inst.fp.lift(a.W_hat)), 1e-10);
  EXPECT_EQ(a.W_hat.rows(), 4);
  EXPECT_EQ(a.W_hat.cols(), 6);
  ASSERT_EQ(a.trace.size(), b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    EXPECT_EQ(a.trace[i].t, i + 1);
    EXPECT_EQ(a.trace[i].zeta, b.trace[i].zeta);
    EXPECT_EQ(a.trace[i].residual, b.trace[i].residual);
    EXPECT_EQ(*a.trace[i].err_L_inf, *b.trace[i].err_L_inf);
    EXPECT_GE(a.trace[i].wall_time, 0.0);
    if (i > 0) EXPECT_LT(a.trace[i].zeta, a.trace[i - 1].zeta);
  }
  EXPECT_TRUE(a.W_hat == b.W_hat);
  EXPECT_TRUE(a.S_hat == b.S_hat);
}

TEST(Iht, TraceColumnsNeedGroundTruth) {
  const ProblemInstance inst = assemble(SynthSpec{60, 60, 3, 3, 1, 0.5});
  const SolveResult res = irpca_iht(inst.M, inst.fp, fixed_config(1));
  for (const auto& rec : res.trace) {
    EXPECT_FALSE(rec.err_L_inf.has_value());
    EXPECT_FALSE(rec.err_S_inf.has_value());
    EXPECT_FALSE(rec.support_false_positives.has_value());
  }
}

TEST(Iht, StopRules) {
  const ProblemInstance inst = assemble(SynthSpec{60, 60, 3, 3, 1, 0.5});
  SolverConfig cfg;
  cfg.residual_tol = 0.0;
  cfg.max_iters = 3;
  const SolveResult budget = irpca_iht(inst.M, inst.fp, cfg);
  EXPECT_EQ(budget.iterations_run, 3u);
  EXPECT_FALSE(budget.converged);

  cfg.residual_tol = 1e-3;
  cfg.max_iters.reset();
  const SolveResult early = irpca_iht(inst.M, inst.fp, cfg);
  EXPECT_TRUE(early.converged);
  EXPECT_LE(early.trace.back().residual, 1e-3);
  EXPECT_LE(early.iterations_run, required_iters(inst.fp, cfg));

  cfg.stop_rule = StopRule::fixed;
  const SolveResult fixed = irpca_iht(inst.M, inst.fp, cfg);
  EXPECT_TRUE(fixed.converged);
  EXPECT_EQ(fixed.iterations_run, required_iters(inst.fp, cfg));
}

TEST(Iht, Errors) {
  const FeaturePair fp = unit_pair();
  SolverConfig cfg;
  EXPECT_THROW(irpca_iht(Matrix::Zero(100, 99), fp, cfg), DimensionError);
  cfg.rank = 5;
  EXPECT_THROW(irpca_iht(Matrix::Zero(100, 100), fp, cfg), InvalidArgument);
  cfg.rank = 1;
  Matrix M = Matrix::Zero(100, 100);
  M(0, 0) = std::nan("");
  EXPECT_THROW(irpca_iht(M, fp, cfg), InvalidArgument);
  GroundTruth bad{Matrix::Zero(4, 4), Matrix::Zero(3, 3), Matrix::Zero(3, 3), Matrix()};
  EXPECT_THROW(irpca_iht(Matrix::Zero(100, 100), fp, cfg, &bad), DimensionError);
}

TEST(Embedding, SymmetricInputAgreesWithDirect) {
  SynthSpec spec;
  spec.n1 = spec.n2 = 60;
  spec.d1 = spec.d2 = 4;
  spec.r = 2;
  spec.z = 0.5;
  spec.symmetric = true;
  spec.seed = 3;
  const ProblemInstance inst = assemble(spec);
  const SolverConfig cfg = fixed_config(2, 1e-8);
  const SolveResult direct = irpca_iht(inst.M, inst.fp, cfg);
  const SolveResult emb = solve_asymmetric_via_embedding(inst.M, inst.fp, cfg);
  EXPECT_EQ(emb.L_hat.rows(), 60);
  EXPECT_EQ(emb.W_hat.rows(), 4);
  EXPECT_LE(inf_norm(direct.L_hat - emb.L_hat), 1e-8);
}

TEST(Embedding, GroundTruthStructure) {
  SynthSpec spec;
  spec.n1 = 40;
  spec.n2 = 60;
  spec.d1 = 2;
  spec.d2 = 3;
  spec.r = 2;
  spec.z = 3.0;
  spec.seed = 1;
  const ProblemInstance inst = assemble(spec);
  const GroundTruth e = embed_truth(*inst.truth);
  EXPECT_EQ(numerical_rank(e.W), 2 * numerical_rank(inst.truth->W));
  EXPECT_EQ(inf_norm(e.S), inf_norm(inst.truth->S));
  const Sparsity s = row_col_sparsity(inst.truth->S);
  EXPECT_EQ(row_col_sparsity(e.S).z1, std::max(s.z1, s.z2));
  const FeaturePair efp = embed_features(inst.fp);
  EXPECT_LE(feasibility_residual(e.L, efp), 1e-8);
  EXPECT_LE(inf_norm(efp.lift(e.W) - e.L), 1e-10);
}

}  // namespace
}  // namespace irpca
