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

// Command-line front end: synth, solve, check, bench, eval. Kept in a header
// so the test suite can drive the commands in-process.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "irpca/irpca.hpp"

namespace irpca::cli {

namespace fs = std::filesystem;

inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 0;
  std::string out = ".";
  unsigned threads = 1;
};

struct SynthOptions {
  SynthSpec spec;
  std::string format = "bin";
  std::string baseline;  ///< complete matrix; switches to SVD-derived features
};

struct SolveOptions {
  std::string instance;
  std::string matrix;
  std::string f1;
  std::string f2;
  SolverConfig cfg;
  bool cw_given = false;
  std::optional<double> noise_bound;
  bool embedded = false;
};

struct CheckOptions {
  std::string instance;
  Index rank = 1;
  std::optional<double> c_W;
};

struct BenchOptions {
  SynthSpec base;
  std::string axis = "z";
  std::vector<double> values;
  std::size_t seeds = 5;
  SolverConfig cfg;
};

struct EvalOptions {
  std::string result;
  std::string instance;
};

// ---------------------------------------------------------------------------
// Instance directories

inline std::optional<fs::path> find_matrix(const fs::path& dir, const std::string& stem) {
  for (const char* ext : {".bin", ".csv"}) {
    fs::path p = dir / (stem + ext);
    if (fs::exists(p)) return p;
  }
  return std::nullopt;
}

inline fs::path require_matrix(const fs::path& dir, const std::string& stem) {
  auto p = find_matrix(dir, stem);
  if (!p) throw IoError("no " + stem + ".bin or " + stem + ".csv in '" + dir.string() + "'");
  return *p;
}

struct LoadedInstance {
  Matrix M;
  std::optional<Matrix> F1;
  std::optional<Matrix> F2;
  std::optional<GroundTruth> truth;
  json manifest = json::object();
};

inline LoadedInstance load_instance_dir(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("instance directory '" + dir.string() + "' not found");
  LoadedInstance li;
  li.M = read_matrix(require_matrix(dir, "M"));
  if (auto p = find_matrix(dir, "F1")) li.F1 = read_matrix(*p);
  if (auto p = find_matrix(dir, "F2")) li.F2 = read_matrix(*p);
  auto L = find_matrix(dir, "L_star");
  auto S = find_matrix(dir, "S_star");
  if (L && S) {
    GroundTruth t;
    t.L = read_matrix(*L);
    t.S = read_matrix(*S);
    auto W = find_matrix(dir, "W_star");
    t.W = W ? read_matrix(*W) : t.L;
    auto N = find_matrix(dir, "N_star");
    t.N = N ? read_matrix(*N) : Matrix::Zero(t.L.rows(), t.L.cols());
    li.truth = std::move(t);
  }
  if (fs::exists(dir / "manifest.json")) li.manifest = read_json(dir / "manifest.json");
  return li;
}

/// Features for a loaded instance: both given (inductive) or neither
/// (transductive, identity features).
inline FeaturePair features_for(const Matrix& M, const std::optional<Matrix>& F1,
                                const std::optional<Matrix>& F2) {
  if (F1.has_value() != F2.has_value()) {
    throw InvalidArgument("features: supply both F1 and F2, or neither for transductive mode");
  }
  if (!F1) return identity_features(M.rows(), M.cols());
  return prepare(*F1, *F2);
}

inline void check_feature_shapes(const Matrix& M, const Matrix& F1, const Matrix& F2) {
  if (F1.cols() != M.rows() || F2.cols() != M.cols()) {
    throw DimensionError("features " + shape_string(F1) + " / " + shape_string(F2) +
                         " do not match M " + shape_string(M));
  }
}

// ---------------------------------------------------------------------------
// synth

inline int cmd_synth(const SynthOptions& opt, const CommonOptions& common, std::ostream& out) {
  if (opt.format != "bin" && opt.format != "csv") {
    throw InvalidArgument("synth: --format must be bin or csv");
  }
  const std::string ext = "." + opt.format;
  const fs::path dir(common.out);
  SynthSpec spec = opt.spec;
  spec.seed = common.seed;

  json manifest;
  manifest["schema_version"] = kResultSchemaVersion;
  manifest["kind"] = "instance";
  manifest["seed"] = spec.seed;

  ProblemInstance inst = [&] {
    if (opt.baseline.empty()) {
      spec.validate();
      manifest["mode"] = "synthetic";
      return assemble(spec);
    }
    const Matrix L = read_matrix(opt.baseline);
    spec.n1 = L.rows();
    spec.n2 = L.cols();
    spec.noise_inf_bound = 0.0;
    spec.symmetric = false;
    spec.validate();
    manifest["mode"] = "baseline";
    manifest["baseline"] = opt.baseline;
    return assemble_from_baseline(L, spec.d1, spec.d2, spec.r, spec.z, spec.magnitude_low,
                                  spec.magnitude_high, spec.seed);
  }();
  const GroundTruth& t = *inst.truth;
  const double c_W = opt.baseline.empty() ? spec.c_W : spectral_norm(t.W);
  if (!opt.baseline.empty()) spec.c_W = c_W;
  manifest["spec"] = spec;
  manifest["c_W"] = c_W;

  fs::create_directories(dir);
  const std::pair<const char*, const Matrix*> files[] = {
      {"M", &inst.M},      {"F1", &inst.fp.F1()}, {"F2", &inst.fp.F2()}, {"W_star", &t.W},
      {"L_star", &t.L},    {"S_star", &t.S},      {"N_star", &t.N}};
  json listing = json::object();
  for (const auto& [stem, mat] : files) {
    const std::string name = std::string(stem) + ext;
    write_matrix(*mat, dir / name);
    listing[stem] = name;
  }
  manifest["files"] = listing;
  const Sparsity sp = row_col_sparsity(t.S);
  manifest["realized"] = {{"z1", sp.z1},
                          {"z2", sp.z2},
                          {"nnz_S", count_nonzero(t.S)},
                          {"mu_F1", inst.fp.mu_F1()},
                          {"mu_F2", inst.fp.mu_F2()},
                          {"kappa", inst.fp.kappa()}};
  write_json(manifest, dir / "manifest.json");
  out << "synth: wrote " << spec.n1 << "x" << spec.n2 << " instance (d1=" << spec.d1
      << ", d2=" << spec.d2 << ", r=" << spec.r << ", seed=" << spec.seed << ") to "
      << dir.string() << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// solve

inline int cmd_solve(const SolveOptions& opt, const CommonOptions& common, std::ostream& out) {
  LoadedInstance li;
  json inputs = json::object();
  if (!opt.instance.empty()) {
    li = load_instance_dir(opt.instance);
    inputs["instance"] = opt.instance;
  } else {
    if (opt.matrix.empty()) throw InvalidArgument("solve: need --instance or --matrix");
    li.M = read_matrix(opt.matrix);
    if (!opt.f1.empty()) li.F1 = read_matrix(opt.f1);
    if (!opt.f2.empty()) li.F2 = read_matrix(opt.f2);
    inputs["matrix"] = opt.matrix;
    if (!opt.f1.empty()) inputs["f1"] = opt.f1;
    if (!opt.f2.empty()) inputs["f2"] = opt.f2;
  }

  SolverConfig cfg = opt.cfg;
  if (!opt.cw_given && li.manifest.contains("c_W")) cfg.c_W = li.manifest.at("c_W").get<double>();
  cfg.validate();

  // Shape and rank checks happen before any factorization.
  if (li.F1.has_value() != li.F2.has_value()) {
    throw InvalidArgument("solve: supply both F1 and F2, or neither for transductive mode");
  }
  const bool transductive = !li.F1.has_value();
  if (!transductive) {
    check_feature_shapes(li.M, *li.F1, *li.F2);
    const Index cap = std::min(li.F1->rows(), li.F2->rows());
    if (cfg.rank > cap) {
      throw InvalidArgument("solve: rank " + std::to_string(cfg.rank) + " exceeds min(d1, d2) = " +
                            std::to_string(cap));
    }
  } else if (cfg.rank > std::min(li.M.rows(), li.M.cols())) {
    throw InvalidArgument("solve: rank exceeds min(n1, n2)");
  }
  if (li.truth) {
    require_same_shape(li.truth->L, li.M, "solve: L_star");
    require_same_shape(li.truth->S, li.M, "solve: S_star");
  }

  const FeaturePair fp = features_for(li.M, li.F1, li.F2);
  if (opt.noise_bound) cfg.nu = noise_parameter(fp, *opt.noise_bound);
  if (!cfg.max_iters) cfg.max_iters = required_iters(fp, cfg);

  const GroundTruth* truth = li.truth ? &*li.truth : nullptr;
  const SolveResult res = opt.embedded ? solve_asymmetric_via_embedding(li.M, fp, cfg, truth)
                                       : irpca_iht(li.M, fp, cfg, truth);

  ResultContext ctx;
  ctx.mode = transductive ? "transductive" : (opt.embedded ? "embedded" : "inductive");
  if (li.manifest.contains("seed")) {
    ctx.seed = li.manifest.at("seed").get<std::uint64_t>();
  } else {
    ctx.seed = common.seed;
  }
  if (truth) {
    ProblemInstance inst{li.M, fp, li.truth};
    ctx.metrics = recovery_metrics(res, inst);
    ctx.report = check_assumptions(inst, cfg.rank, cfg.c_W);
  }
  ctx.extra = inputs;

  const fs::path dir(common.out);
  fs::create_directories(dir);
  write_matrix_bin(res.W_hat, dir / "W_hat.bin");
  write_matrix_bin(res.S_hat, dir / "S_hat.bin");
  write_matrix_bin(res.L_hat, dir / "L_hat.bin");
  write_trace_csv(res.trace, dir / "trace.csv");
  write_result_json(res, cfg, ctx, dir / "result.json");

  const double final_residual = res.trace.empty() ? 0.0 : res.trace.back().residual;
  out << "solve: mode=" << ctx.mode << " iterations=" << res.iterations_run
      << " residual=" << final_residual << " converged=" << (res.converged ? "yes" : "no");
  if (ctx.metrics) out << " err_L_inf=" << ctx.metrics->err_L_inf;
  out << "\n";
  return res.converged ? kExitOk : kExitNotConverged;
}

// ---------------------------------------------------------------------------
// check

inline int cmd_check(const CheckOptions& opt, const CommonOptions& common, std::ostream& out) {
  if (opt.instance.empty()) throw InvalidArgument("check: --instance is required");
  LoadedInstance li = load_instance_dir(opt.instance);
  if (!li.truth) throw MissingGroundTruth("check: instance has no L_star/S_star ground truth");
  if (li.F1 && li.F2) check_feature_shapes(li.M, *li.F1, *li.F2);
  double c_W = 1.0;
  if (opt.c_W) {
    c_W = *opt.c_W;
  } else if (li.manifest.contains("c_W")) {
    c_W = li.manifest.at("c_W").get<double>();
  }
  ProblemInstance inst{li.M, features_for(li.M, li.F1, li.F2), li.truth};
  const AssumptionReport rep = check_assumptions(inst, opt.rank, c_W);
  json j;
  j["schema_version"] = kResultSchemaVersion;
  j["instance"] = opt.instance;
  j["rank"] = opt.rank;
  j["assumptions"] = rep;
  const fs::path dir(common.out);
  fs::create_directories(dir);
  write_json(j, dir / "assumptions.json");
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// bench

struct BenchCell {
  std::size_t point = 0;
  std::size_t rep = 0;
  double value = 0.0;
  double wall_time = 0.0;
  double iter_time = 0.0;
  std::size_t iterations = 0;
  double err_L_inf = 0.0;
  double err_S_frob_rel = 0.0;
  bool success = false;
  bool assumptions_ok = false;
};

inline SynthSpec apply_axis(SynthSpec spec, const std::string& axis, double v) {
  auto as_index = [&](const char* name) {
    if (v < 1.0 || v != std::floor(v)) {
      throw InvalidArgument("bench: axis " + std::string(name) + " needs positive integer values");
    }
    return static_cast<Index>(v);
  };
  if (axis == "z") {
    spec.z = v;
  } else if (axis == "r") {
    spec.r = as_index("r");
  } else if (axis == "d") {
    spec.d1 = spec.d2 = as_index("d");
  } else if (axis == "kappa") {
    spec.kappa_target = v;
  } else if (axis == "n") {
    spec.n1 = spec.n2 = as_index("n");
  } else {
    throw InvalidArgument("bench: unknown axis '" + axis + "' (expected z|r|d|kappa|n)");
  }
  return spec;
}

/// Seed of repetition `rep` at grid point `point`.
inline std::uint64_t cell_seed(std::uint64_t base, std::size_t point, std::size_t rep) {
  return derive_seed(derive_seed(base, point + 1), rep);
}

inline BenchCell run_bench_cell(const BenchOptions& opt, std::uint64_t base_seed,
                                std::size_t point, std::size_t rep) {
  BenchCell cell;
  cell.point = point;
  cell.rep = rep;
  cell.value = opt.values[point];
  SynthSpec spec = apply_axis(opt.base, opt.axis, cell.value);
  spec.seed = cell_seed(base_seed, point, rep);
  const ProblemInstance inst = assemble(spec);

  SolverConfig cfg = opt.cfg;
  cfg.rank = spec.r;
  cfg.c_W = spec.c_W;
  if (spec.noise_inf_bound > 0.0) cfg.nu = noise_parameter(inst.fp, spec.noise_inf_bound);
  const SolveResult res = irpca_iht(inst.M, inst.fp, cfg, &*inst.truth);
  const Metrics m = recovery_metrics(res, inst);

  std::vector<double> per_iter;
  for (const auto& rec : res.trace) per_iter.push_back(rec.wall_time);
  std::sort(per_iter.begin(), per_iter.end());
  cell.iter_time = per_iter.empty() ? 0.0 : per_iter[per_iter.size() / 2];
  cell.wall_time = m.wall_time_total;
  cell.iterations = m.iterations;
  cell.err_L_inf = m.err_L_inf;
  cell.err_S_frob_rel = m.err_S_frob_rel;
  cell.success = m.err_L_inf <= cfg.epsilon;
  cell.assumptions_ok = check_assumptions(inst, cfg.rank, cfg.c_W).overall_ok;
  return cell;
}

namespace detail {

inline std::pair<double, double> mean_std(const std::vector<double>& xs) {
  if (xs.empty()) return {0.0, 0.0};
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

inline double median(std::vector<double> xs) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  const std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace detail

inline constexpr const char* kBenchHeader =
    "axis,value,runs,time_mean,time_std,iter_time_median,iterations_mean,err_L_inf_mean,"
    "err_L_inf_std,err_S_frob_rel_mean,success_rate,assumptions_ok_rate";

inline int cmd_bench(const BenchOptions& opt, const CommonOptions& common, std::ostream& out) {
  if (opt.values.empty()) throw InvalidArgument("bench: empty grid (give --values)");
  if (opt.seeds < 1) throw InvalidArgument("bench: --seeds must be >= 1");
  opt.cfg.validate();
  for (double v : opt.values) apply_axis(opt.base, opt.axis, v).validate();

  const std::size_t points = opt.values.size();
  const std::size_t total = points * opt.seeds;
  std::vector<BenchCell> cells(total);
  std::atomic<std::size_t> next{0};
  std::vector<std::string> failures(total);
  auto worker = [&] {
    for (std::size_t i = next++; i < total; i = next++) {
      try {
        cells[i] = run_bench_cell(opt, common.seed, i / opt.seeds, i % opt.seeds);
      } catch (const std::exception& e) {
        failures[i] = e.what();
      }
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(common.threads, total));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& f : failures) {
    if (!f.empty()) throw Error("bench: cell failed: " + f);
  }

  std::ostringstream csv;
  csv << kBenchHeader << "\n";
  csv.precision(17);
  for (std::size_t p = 0; p < points; ++p) {
    std::vector<double> times, iter_times, iters, errs, serrs;
    double successes = 0.0, ok = 0.0;
    for (std::size_t s = 0; s < opt.seeds; ++s) {
      const BenchCell& c = cells[p * opt.seeds + s];
      times.push_back(c.wall_time);
      iter_times.push_back(c.iter_time);
      iters.push_back(static_cast<double>(c.iterations));
      errs.push_back(c.err_L_inf);
      serrs.push_back(c.err_S_frob_rel);
      successes += c.success ? 1.0 : 0.0;
      ok += c.assumptions_ok ? 1.0 : 0.0;
    }
    const auto [tm, ts] = detail::mean_std(times);
    const auto [em, es] = detail::mean_std(errs);
    const double runs = static_cast<double>(opt.seeds);
    csv << opt.axis << ',' << opt.values[p] << ',' << opt.seeds << ',' << tm << ',' << ts << ','
        << detail::median(iter_times) << ',' << detail::mean_std(iters).first << ',' << em << ','
        << es << ',' << detail::mean_std(serrs).first << ',' << successes / runs << ','
        << ok / runs << "\n";
  }

  const fs::path dir(common.out);
  fs::create_directories(dir);
  irpca::detail::spit(dir / "bench.csv", csv.str());
  json manifest;
  manifest["schema_version"] = kResultSchemaVersion;
  manifest["kind"] = "bench";
  manifest["seed"] = common.seed;
  manifest["seeding"] = "cell seed = derive_seed(derive_seed(seed, point + 1), rep)";
  manifest["axis"] = opt.axis;
  manifest["values"] = opt.values;
  manifest["seeds_per_point"] = opt.seeds;
  manifest["base_spec"] = opt.base;
  manifest["solver"] = opt.cfg;
  manifest["threads"] = nthreads;
  write_json(manifest, dir / "bench_manifest.json");
  out << csv.str();
  return kExitOk;
}

// ---------------------------------------------------------------------------
// eval

inline bool metrics_match(const Metrics& a, const Metrics& b) {
  auto close = [](double x, double y) {
    return std::abs(x - y) <= 1e-12 * std::max({1.0, std::abs(x), std::abs(y)});
  };
  return close(a.err_L_inf, b.err_L_inf) && close(a.err_L_frob_rel, b.err_L_frob_rel) &&
         close(a.err_S_inf, b.err_S_inf) && close(a.err_S_frob_rel, b.err_S_frob_rel) &&
         close(a.support_precision, b.support_precision) &&
         close(a.support_recall, b.support_recall) && close(a.residual_rel, b.residual_rel);
}

inline int cmd_eval(const EvalOptions& opt, const CommonOptions& common, std::ostream& out) {
  if (opt.result.empty() || opt.instance.empty()) {
    throw InvalidArgument("eval: --result and --instance are required");
  }
  const fs::path rdir(opt.result);
  const Matrix L_hat = read_matrix(require_matrix(rdir, "L_hat"));
  const Matrix S_hat = read_matrix(require_matrix(rdir, "S_hat"));
  const LoadedInstance li = load_instance_dir(opt.instance);
  if (!li.truth) throw MissingGroundTruth("eval: instance has no L_star/S_star ground truth");

  Metrics m = recovery_metrics(L_hat, S_hat, li.M, *li.truth);
  json original = json(nullptr);
  if (fs::exists(rdir / "result.json")) {
    const json r = read_json(rdir / "result.json");
    if (r.contains("trace_summary")) {
      m.iterations = r["trace_summary"].value("iterations_run", std::size_t{0});
      m.wall_time_total = r["trace_summary"].value("wall_time_total", 0.0);
    }
    if (r.contains("metrics")) original = r["metrics"];
  }
  json j;
  j["schema_version"] = kResultSchemaVersion;
  j["result"] = opt.result;
  j["instance"] = opt.instance;
  j["metrics"] = m;
  if (!original.is_null()) j["matches_original"] = metrics_match(m, original.get<Metrics>());
  const fs::path dir(common.out);
  fs::create_directories(dir);
  write_json(j, dir / "metrics.json");
  out << j.dump(2) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// Argument parsing

/// Value of --config from argv, if any; read before CLI11 so that flags
/// given on the command line override the file.
inline std::optional<std::string> prescan_config(int argc, const char* const* argv) {
  for (int i = 1; i < argc; ++i) {
    const std::string_view a = argv[i];
    if (a == "--config" && i + 1 < argc) return std::string(argv[i + 1]);
    if (a.rfind("--config=", 0) == 0) return std::string(a.substr(9));
  }
  return std::nullopt;
}

inline std::vector<double> parse_value_list(const std::string& s) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto t = irpca::detail::trim(item);
    if (t.empty()) continue;
    double v = 0.0;
    if (!irpca::detail::parse_number(t, v)) throw InvalidArgument("bad value '" + std::string(t) + "'");
    out.push_back(v);
  }
  return out;
}

inline void add_common(CLI::App* sub, CommonOptions& c) {
  sub->add_option("--config", c.config, "JSON config file; command-line flags override it");
  sub->add_option("--seed", c.seed, "PRNG seed");
  sub->add_option("--out", c.out, "output directory");
  sub->add_option("--threads", c.threads, "worker threads (bench only; timing runs want 1)")
      ->check(CLI::PositiveNumber);
}

inline void add_spec_flags(CLI::App* sub, SynthSpec& s, std::optional<double>& mag_lo,
                           std::optional<double>& mag_hi, std::optional<Index>& n,
                           std::optional<Index>& d) {
  sub->add_option("--n1", s.n1, "rows");
  sub->add_option("--n2", s.n2, "columns");
  sub->add_option_function<Index>("--n", [&n](const Index& v) { n = v; }, "n1 = n2 = n");
  sub->add_option("--d1", s.d1, "row feature dimension");
  sub->add_option("--d2", s.d2, "column feature dimension");
  sub->add_option_function<Index>("--d", [&d](const Index& v) { d = v; }, "d1 = d2 = d");
  sub->add_option("--rank", s.r, "latent rank r");
  sub->add_option("--z", s.z, "corruption level (Bernoulli z / max(n1, n2))");
  sub->add_option("--kappa", s.kappa_target, "feature condition number");
  sub->add_option("--noise", s.noise_inf_bound, "noise infinity-norm bound");
  sub->add_option("--cw", s.c_W, "spectral norm of W*");
  sub->add_option_function<double>("--mag-low", [&mag_lo](const double& v) { mag_lo = v; },
                                   "corruption magnitude lower bound");
  sub->add_option_function<double>("--mag-high", [&mag_hi](const double& v) { mag_hi = v; },
                                   "corruption magnitude upper bound");
  sub->add_flag("--symmetric", s.symmetric, "F1 = F2 and symmetric components");
}

inline void add_solver_flags(CLI::App* sub, SolverConfig& c, CLI::Option*& cw_opt,
                             std::string& stop, std::optional<std::size_t>& max_iters) {
  sub->add_option("--rank", c.rank, "target rank r");
  sub->add_option("--nu", c.nu, "noise parameter nu");
  cw_opt = sub->add_option("--cw", c.c_W, "bound on ||W*||_2");
  sub->add_option("--eps", c.epsilon, "target accuracy epsilon");
  sub->add_option_function<std::size_t>(
      "--max-iters", [&max_iters](const std::size_t& v) { max_iters = v; },
      "iteration cap (default: required_iters)");
  sub->add_option("--stop", stop, "stopping rule")->check(CLI::IsMember({"fixed", "residual"}));
  sub->add_option("--residual-tol", c.residual_tol, "relative residual tolerance");
}

inline int run(int argc, const char* const* argv, std::ostream& out = std::cout,
               std::ostream& err = std::cerr) {
  try {
    json config = json::object();
    if (auto path = prescan_config(argc, argv)) config = read_json(*path);
    auto section = [&](const char* key) {
      return config.contains(key) ? config.at(key) : json::object();
    };

    CommonOptions common;
    common.seed = config.value("seed", std::uint64_t{0});
    common.out = config.value("out", std::string("."));
    common.threads = config.value("threads", 1u);

    SynthOptions synth;
    section("spec").get_to(synth.spec);
    SolveOptions solve;
    section("solver").get_to(solve.cfg);
    solve.cw_given = section("solver").contains("c_W");
    {
      const json s = section("solve");
      solve.instance = s.value("instance", solve.instance);
      solve.matrix = s.value("matrix", solve.matrix);
      solve.f1 = s.value("f1", solve.f1);
      solve.f2 = s.value("f2", solve.f2);
      if (s.contains("noise_bound")) solve.noise_bound = s.at("noise_bound").get<double>();
      solve.embedded = s.value("embedded", false);
    }
    CheckOptions check;
    check.rank = section("solver").value("rank", check.rank);
    if (section("solver").contains("c_W")) check.c_W = section("solver").at("c_W").get<double>();
    check.instance = section("check").value("instance", solve.instance);
    BenchOptions bench;
    bench.base = synth.spec;
    bench.cfg = solve.cfg;
    {
      const json b = section("bench");
      bench.axis = b.value("axis", bench.axis);
      bench.values = b.value("values", bench.values);
      bench.seeds = b.value("seeds", bench.seeds);
    }
    EvalOptions eval;
    eval.result = section("eval").value("result", eval.result);
    eval.instance = section("eval").value("instance", eval.instance);

    CLI::App app{"irpca - inductive robust PCA via iterative hard thresholding"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "irpca 1.0.0");

    std::optional<double> mag_lo, mag_hi, bmag_lo, bmag_hi;
    std::optional<Index> n_both, d_both, bn_both, bd_both;

    auto* s_synth = app.add_subcommand("synth", "generate a seeded ground-truth instance");
    add_common(s_synth, common);
    add_spec_flags(s_synth, synth.spec, mag_lo, mag_hi, n_both, d_both);
    s_synth->add_option("--format", synth.format, "matrix file format")
        ->check(CLI::IsMember({"bin", "csv"}));
    s_synth->add_option("--baseline", synth.baseline,
                        "complete baseline matrix; features come from its SVD");

    std::string solve_stop = to_string(solve.cfg.stop_rule);
    std::optional<std::size_t> solve_max_iters = solve.cfg.max_iters;
    CLI::Option* solve_cw = nullptr;
    std::optional<double> noise_flag;
    auto* s_solve = app.add_subcommand("solve", "recover W, S, L from M (and features)");
    add_common(s_solve, common);
    s_solve->add_option("--instance", solve.instance, "directory written by synth");
    s_solve->add_option("--matrix", solve.matrix, "observed matrix M");
    s_solve->add_option("--f1", solve.f1, "row features F1 (d1 x n1)");
    s_solve->add_option("--f2", solve.f2, "column features F2 (d2 x n2)");
    add_solver_flags(s_solve, solve.cfg, solve_cw, solve_stop, solve_max_iters);
    s_solve->add_option_function<double>(
        "--noise-bound", [&noise_flag](const double& v) { noise_flag = v; },
        "bound on ||N||_inf; sets nu = (3 mu^2 d kappa^2 + 1) * bound");
    s_solve->add_flag("--embedded", solve.embedded, "solve through the symmetric embedding");

    auto* s_check = app.add_subcommand("check", "report the identifiability conditions");
    add_common(s_check, common);
    s_check->add_option("--instance", check.instance, "directory written by synth");
    s_check->add_option("--rank", check.rank, "rank r");
    s_check->add_option_function<double>("--cw", [&check](const double& v) { check.c_W = v; },
                                         "bound on ||W*||_2");

    std::string bench_stop = to_string(bench.cfg.stop_rule);
    std::optional<std::size_t> bench_max_iters = bench.cfg.max_iters;
    CLI::Option* bench_cw_unused = nullptr;
    std::string bench_values;
    auto* s_bench = app.add_subcommand("bench", "sweep one parameter, seeds per point, CSV out");
    add_common(s_bench, common);
    add_spec_flags(s_bench, bench.base, bmag_lo, bmag_hi, bn_both, bd_both);
    s_bench->add_option("--axis", bench.axis, "swept parameter")
        ->check(CLI::IsMember({"z", "r", "d", "kappa", "n"}));
    s_bench->add_option("--values", bench_values, "comma-separated grid values");
    s_bench->add_option("--seeds", bench.seeds, "runs per grid point");
    s_bench->add_option("--nu", bench.cfg.nu, "noise parameter nu");
    s_bench->add_option("--eps", bench.cfg.epsilon, "target accuracy epsilon");
    s_bench->add_option_function<std::size_t>(
        "--max-iters", [&bench_max_iters](const std::size_t& v) { bench_max_iters = v; },
        "iteration cap");
    s_bench->add_option("--stop", bench_stop, "stopping rule")
        ->check(CLI::IsMember({"fixed", "residual"}));
    s_bench->add_option("--residual-tol", bench.cfg.residual_tol, "relative residual tolerance");
    (void)bench_cw_unused;

    auto* s_eval = app.add_subcommand("eval", "recompute metrics from saved artifacts");
    add_common(s_eval, common);
    s_eval->add_option("--result", eval.result, "directory written by solve");
    s_eval->add_option("--instance", eval.instance, "directory written by synth");

    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      return app.exit(e, out, err) == 0 ? kExitOk : kExitError;
    }

    if (s_synth->parsed()) {
      if (n_both) synth.spec.n1 = synth.spec.n2 = *n_both;
      if (d_both) synth.spec.d1 = synth.spec.d2 = *d_both;
      if (mag_lo) synth.spec.magnitude_low = mag_lo;
      if (mag_hi) synth.spec.magnitude_high = mag_hi;
      if (!s_synth->get_option("--seed")->count() && config.contains("spec") &&
          !config.contains("seed")) {
        common.seed = synth.spec.seed;
      }
      return cmd_synth(synth, common, out);
    }
    if (s_solve->parsed()) {
      solve.cfg.stop_rule = parse_stop_rule(solve_stop);
      solve.cfg.max_iters = solve_max_iters;
      solve.cw_given = solve.cw_given || solve_cw->count() > 0;
      if (noise_flag) solve.noise_bound = noise_flag;
      return cmd_solve(solve, common, out);
    }
    if (s_check->parsed()) return cmd_check(check, common, out);
    if (s_bench->parsed()) {
      if (bn_both) bench.base.n1 = bench.base.n2 = *bn_both;
      if (bd_both) bench.base.d1 = bench.base.d2 = *bd_both;
      if (bmag_lo) bench.base.magnitude_low = bmag_lo;
      if (bmag_hi) bench.base.magnitude_high = bmag_hi;
      if (!bench_values.empty()) bench.values = parse_value_list(bench_values);
      bench.cfg.stop_rule = parse_stop_rule(bench_stop);
      bench.cfg.max_iters = bench_max_iters;
      return cmd_bench(bench, common, out);
    }
    if (s_eval->parsed()) return cmd_eval(eval, common, out);
    return kExitError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

}  // namespace irpca::cli
