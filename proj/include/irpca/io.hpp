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

// File formats: matrices as CSV (17 significant digits) or the "IRPM"
// little-endian binary layout, whitespace-separated rating triples, the
// per-iteration trace CSV and the versioned result JSON.

#pragma once

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "irpca/error.hpp"
#include "irpca/eval.hpp"
#include "irpca/matrix_ops.hpp"
#include "irpca/solver.hpp"
#include "irpca/synth.hpp"

namespace irpca {

namespace fs = std::filesystem;
using json = nlohmann::json;

inline constexpr int kResultSchemaVersion = 1;
inline constexpr std::uint32_t kBinaryVersion = 1;
inline constexpr char kBinaryMagic[4] = {'I', 'R', 'P', 'M'};

namespace detail {

inline std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return ss.str();
}

inline void spit(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().find_first_not_of(" \t") == std::string_view::npos) {
    lines.pop_back();
  }
  return lines;
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(std::string_view field, T& value) {
  const char* first = field.data();
  const char* last = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  return ec == std::errc() && ptr == last;
}

inline std::string format_double(double x) {
  char buf[32];
  const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
  return std::string(buf, static_cast<std::size_t>(n));
}

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFFu));
}

inline std::uint64_t get_le(const std::string& in, std::size_t offset, int bytes) {
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Matrices

inline void write_matrix_csv(const Matrix& A, const fs::path& path) {
  std::string out;
  out.reserve(static_cast<std::size_t>(A.size()) * 24);
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j) {
      if (j) out.push_back(',');
      out += detail::format_double(A(i, j));
    }
    out.push_back('\n');
  }
  detail::spit(path, out);
}

inline Matrix read_matrix_csv(const fs::path& path) {
  const std::string text = detail::slurp(path);
  const auto lines = detail::split_lines(text);
  if (lines.empty()) throw FormatError("'" + path.string() + "': empty input");

  std::vector<double> values;
  Index cols = -1;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    Index count = 0;
    std::size_t pos = 0;
    const std::string_view line = lines[ln];
    while (true) {
      std::size_t end = line.find(',', pos);
      const std::string_view field =
          detail::trim(line.substr(pos, end == std::string_view::npos ? line.npos : end - pos));
      double v = 0.0;
      if (!detail::parse_number(field, v) || !std::isfinite(v)) {
        throw FormatError(where + ": non-numeric field '" + std::string(field) + "'");
      }
      values.push_back(v);
      ++count;
      if (end == std::string_view::npos) break;
      pos = end + 1;
    }
    if (cols < 0) {
      cols = count;
    } else if (count != cols) {
      throw FormatError(where + ": ragged row (" + std::to_string(count) + " fields, expected " +
                        std::to_string(cols) + ")");
    }
  }
  const Index rows = static_cast<Index>(lines.size());
  Matrix A(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) A(i, j) = values[static_cast<std::size_t>(i * cols + j)];
  return A;
}

/// "IRPM", u32 version, u64 rows, u64 cols, rows*cols f64; little-endian,
/// row-major.
inline void write_matrix_bin(const Matrix& A, const fs::path& path) {
  std::string out;
  out.reserve(24 + static_cast<std::size_t>(A.size()) * 8);
  out.append(kBinaryMagic, 4);
  detail::put_u32(out, kBinaryVersion);
  detail::put_u64(out, static_cast<std::uint64_t>(A.rows()));
  detail::put_u64(out, static_cast<std::uint64_t>(A.cols()));
  for (Index i = 0; i < A.rows(); ++i)
    for (Index j = 0; j < A.cols(); ++j) detail::put_u64(out, std::bit_cast<std::uint64_t>(A(i, j)));
  detail::spit(path, out);
}

inline Matrix read_matrix_bin(const fs::path& path) {
  const std::string in = detail::slurp(path);
  const std::string name = "'" + path.string() + "'";
  if (in.size() < 24) throw FormatError(name + ": truncated header");
  if (std::memcmp(in.data(), kBinaryMagic, 4) != 0) throw FormatError(name + ": bad magic");
  const auto version = static_cast<std::uint32_t>(detail::get_le(in, 4, 4));
  if (version != kBinaryVersion) {
    throw FormatError(name + ": unsupported version " + std::to_string(version));
  }
  const std::uint64_t rows = detail::get_le(in, 8, 8);
  const std::uint64_t cols = detail::get_le(in, 16, 8);
  if (rows == 0 || cols == 0) throw FormatError(name + ": zero dimension");
  const std::uint64_t payload = (in.size() - 24) / 8;
  if (rows > payload || cols > payload / rows || rows * cols > payload) {
    throw FormatError(name + ": truncated payload (" + std::to_string(rows) + "x" +
                      std::to_string(cols) + " declared, " + std::to_string(payload) +
                      " values present)");
  }
  if (in.size() != 24 + rows * cols * 8) throw FormatError(name + ": trailing bytes after payload");
  Matrix A(static_cast<Index>(rows), static_cast<Index>(cols));
  std::size_t off = 24;
  for (Index i = 0; i < A.rows(); ++i) {
    for (Index j = 0; j < A.cols(); ++j, off += 8) {
      A(i, j) = std::bit_cast<double>(detail::get_le(in, off, 8));
    }
  }
  if (!A.allFinite()) throw FormatError(name + ": non-finite entries");
  return A;
}

/// Dispatches on extension: ".csv" is text, anything else binary.
inline Matrix read_matrix(const fs::path& path) {
  return path.extension() == ".csv" ? read_matrix_csv(path) : read_matrix_bin(path);
}

inline void write_matrix(const Matrix& A, const fs::path& path) {
  if (path.extension() == ".csv") {
    write_matrix_csv(A, path);
  } else {
    write_matrix_bin(A, path);
  }
}

// ---------------------------------------------------------------------------
// Ratings

struct RatingTriple {
  Index user = 0;  ///< 1-based
  Index item = 0;  ///< 1-based
  double rating = 0.0;
};

struct RatingsTriples {
  Index n_users = 0;
  Index n_items = 0;
  std::vector<RatingTriple> triples;
};

/// Lines of "user item rating [ignored...]", whitespace separated, 1-based.
inline RatingsTriples parse_ratings(const fs::path& path, Index n_users, Index n_items) {
  if (n_users < 1 || n_items < 1) throw InvalidArgument("read_ratings: dimensions must be positive");
  const std::string text = detail::slurp(path);
  RatingsTriples out{n_users, n_items, {}};
  std::set<std::pair<Index, Index>> seen;
  const auto lines = detail::split_lines(text);
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string where = path.string() + ":" + std::to_string(ln + 1);
    std::istringstream fields{std::string(lines[ln])};
    std::string u, i, r;
    if (!(fields >> u >> i >> r)) throw FormatError(where + ": expected 'user item rating'");
    RatingTriple t;
    long long uu = 0, ii = 0;
    if (!detail::parse_number(std::string_view(u), uu) ||
        !detail::parse_number(std::string_view(i), ii) ||
        !detail::parse_number(std::string_view(r), t.rating) || !std::isfinite(t.rating)) {
      throw FormatError(where + ": malformed triple '" + std::string(lines[ln]) + "'");
    }
    if (uu < 1 || uu > n_users || ii < 1 || ii > n_items) {
      throw FormatError(where + ": index (" + u + ", " + i + ") out of range [1.." +
                        std::to_string(n_users) + "] x [1.." + std::to_string(n_items) + "]");
    }
    t.user = static_cast<Index>(uu);
    t.item = static_cast<Index>(ii);
    if (!seen.emplace(t.user, t.item).second) {
      throw FormatError(where + ": duplicate pair (" + u + ", " + i + ")");
    }
    out.triples.push_back(t);
  }
  return out;
}

struct RatingsMatrix {
  Matrix values;  ///< observed ratings, 0 where unobserved
  Matrix mask;    ///< 1 where observed
};

inline RatingsMatrix to_dense(const RatingsTriples& rt) {
  RatingsMatrix out{Matrix::Zero(rt.n_users, rt.n_items), Matrix::Zero(rt.n_users, rt.n_items)};
  for (const auto& t : rt.triples) {
    out.values(t.user - 1, t.item - 1) = t.rating;
    out.mask(t.user - 1, t.item - 1) = 1.0;
  }
  return out;
}

inline RatingsMatrix read_ratings(const fs::path& path, Index n_users, Index n_items) {
  return to_dense(parse_ratings(path, n_users, n_items));
}

// ---------------------------------------------------------------------------
// Trace and results

inline constexpr const char* kTraceHeader =
    "t,zeta_t,residual,err_L_inf,err_S_inf,support_false_positives,wall_time";

/// One row per iteration; ground-truth columns are left empty when absent.
inline std::string trace_csv(const std::vector<IterationRecord>& trace) {
  std::string out = kTraceHeader;
  out.push_back('\n');
  for (const auto& rec : trace) {
    out += std::to_string(rec.t);
    out += ',' + detail::format_double(rec.zeta);
    out += ',' + detail::format_double(rec.residual);
    out += ',' + (rec.err_L_inf ? detail::format_double(*rec.err_L_inf) : std::string());
    out += ',' + (rec.err_S_inf ? detail::format_double(*rec.err_S_inf) : std::string());
    out += ',' + (rec.support_false_positives ? std::to_string(*rec.support_false_positives)
                                              : std::string());
    out += ',' + detail::format_double(rec.wall_time);
    out.push_back('\n');
  }
  return out;
}

inline void write_trace_csv(const std::vector<IterationRecord>& trace, const fs::path& path) {
  detail::spit(path, trace_csv(trace));
}

inline void to_json(json& j, const SolverConfig& c) {
  j = json{{"rank", c.rank},           {"nu", c.nu},
           {"c_W", c.c_W},             {"epsilon", c.epsilon},
           {"stop_rule", to_string(c.stop_rule)},
           {"residual_tol", c.residual_tol}};
  j["max_iters"] = c.max_iters ? json(*c.max_iters) : json(nullptr);
}

inline void from_json(const json& j, SolverConfig& c) {
  c.rank = j.value("rank", c.rank);
  c.nu = j.value("nu", c.nu);
  c.c_W = j.value("c_W", c.c_W);
  c.epsilon = j.value("epsilon", c.epsilon);
  c.residual_tol = j.value("residual_tol", c.residual_tol);
  if (j.contains("stop_rule")) c.stop_rule = parse_stop_rule(j.at("stop_rule").get<std::string>());
  if (j.contains("max_iters") && !j.at("max_iters").is_null()) {
    c.max_iters = j.at("max_iters").get<std::size_t>();
  }
}

inline void to_json(json& j, const SynthSpec& s) {
  const auto [lo, hi] = s.magnitude_band();
  j = json{{"n1", s.n1},       {"n2", s.n2},
           {"d1", s.d1},       {"d2", s.d2},
           {"r", s.r},         {"z", s.z},
           {"magnitude_low", lo}, {"magnitude_high", hi},
           {"kappa_target", s.kappa_target},
           {"noise_inf_bound", s.noise_inf_bound},
           {"c_W", s.c_W},     {"symmetric", s.symmetric},
           {"seed", s.seed}};
}

inline void from_json(const json& j, SynthSpec& s) {
  s.n1 = j.value("n1", s.n1);
  s.n2 = j.value("n2", s.n2);
  s.d1 = j.value("d1", s.d1);
  s.d2 = j.value("d2", s.d2);
  s.r = j.value("r", s.r);
  s.z = j.value("z", s.z);
  if (j.contains("magnitude_low")) s.magnitude_low = j.at("magnitude_low").get<double>();
  if (j.contains("magnitude_high")) s.magnitude_high = j.at("magnitude_high").get<double>();
  s.kappa_target = j.value("kappa_target", s.kappa_target);
  s.noise_inf_bound = j.value("noise_inf_bound", s.noise_inf_bound);
  s.c_W = j.value("c_W", s.c_W);
  s.symmetric = j.value("symmetric", s.symmetric);
  s.seed = j.value("seed", s.seed);
}

#define IRPCA_REPORT_FIELDS(X)                                                                  \
  X(feasibility_residual) X(feasible) X(mu_F1) X(mu_F2) X(mu) X(kappa) X(z1_observed)           \
  X(z2_observed) X(z1_bound) X(z2_bound) X(sparsity_ok) X(w_norm) X(c_W) X(w_rank) X(r)         \
  X(rank_ok) X(latent_ok) X(noise_inf) X(noise_bound) X(noise_ok) X(overall_ok)

inline void to_json(json& j, const AssumptionReport& r) {
  j = json::object();
#define X(f) j[#f] = r.f;
  IRPCA_REPORT_FIELDS(X)
#undef X
}

inline void from_json(const json& j, AssumptionReport& r) {
#define X(f) j.at(#f).get_to(r.f);
  IRPCA_REPORT_FIELDS(X)
#undef X
}

#undef IRPCA_REPORT_FIELDS

inline void to_json(json& j, const Metrics& m) {
  j = json{{"err_L_inf", m.err_L_inf},
           {"err_L_frob_rel", m.err_L_frob_rel},
           {"err_S_inf", m.err_S_inf},
           {"err_S_frob_rel", m.err_S_frob_rel},
           {"support_precision", m.support_precision},
           {"support_recall", m.support_recall},
           {"residual_rel", m.residual_rel},
           {"wall_time_total", m.wall_time_total},
           {"iterations", m.iterations}};
}

inline void from_json(const json& j, Metrics& m) {
  j.at("err_L_inf").get_to(m.err_L_inf);
  j.at("err_L_frob_rel").get_to(m.err_L_frob_rel);
  j.at("err_S_inf").get_to(m.err_S_inf);
  j.at("err_S_frob_rel").get_to(m.err_S_frob_rel);
  j.at("support_precision").get_to(m.support_precision);
  j.at("support_recall").get_to(m.support_recall);
  j.at("residual_rel").get_to(m.residual_rel);
  j.at("wall_time_total").get_to(m.wall_time_total);
  j.at("iterations").get_to(m.iterations);
}

/// Everything besides the solve itself that goes into a result document.
struct ResultContext {
  std::string mode = "inductive";  ///< inductive | transductive | embedded
  std::optional<std::uint64_t> seed;
  std::optional<AssumptionReport> report;
  std::optional<Metrics> metrics;
  json extra = json::object();  ///< input paths and other provenance
};

inline json result_to_json(const SolveResult& res, const SolverConfig& cfg,
                           const ResultContext& ctx) {
  json j;
  j["schema_version"] = kResultSchemaVersion;
  j["mode"] = ctx.mode;
  j["config"] = cfg;
  j["seed"] = ctx.seed ? json(*ctx.seed) : json(nullptr);
  j["dimensions"] = {{"n1", res.S_hat.rows()},
                     {"n2", res.S_hat.cols()},
                     {"d1", res.W_hat.rows()},
                     {"d2", res.W_hat.cols()}};
  json summary = {{"iterations_run", res.iterations_run},
                  {"converged", res.converged},
                  {"wall_time_total", res.wall_time_total()}};
  if (!res.trace.empty()) {
    summary["first_zeta"] = res.trace.front().zeta;
    summary["final_zeta"] = res.trace.back().zeta;
    summary["final_residual"] = res.trace.back().residual;
  }
  j["trace_summary"] = summary;
  j["metrics"] = ctx.metrics ? json(*ctx.metrics) : json(nullptr);
  j["assumptions"] = ctx.report ? json(*ctx.report) : json(nullptr);
  j["inputs"] = ctx.extra;
  return j;
}

inline void write_json(const json& j, const fs::path& path) {
  detail::spit(path, j.dump(2) + "\n");
}

inline json read_json(const fs::path& path) {
  const std::string text = detail::slurp(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError("'" + path.string() + "': " + e.what());
  }
}

inline void write_result_json(const SolveResult& res, const SolverConfig& cfg,
                              const ResultContext& ctx, const fs::path& path) {
  write_json(result_to_json(res, cfg, ctx), path);
}

}  // namespace irpca
