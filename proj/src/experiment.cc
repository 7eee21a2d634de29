/*
 Copyright 2026 The riccati-rank Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/
#include "rrank/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include "rrank/error.hpp"
#include "rrank/gramian.hpp"
#include "rrank/kalman.hpp"
#include "rrank/rng.hpp"
#include "rrank/svg_plot.hpp"

namespace rrank::experiment {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kGramianScanPoints = 50;
constexpr double kSlopeLimit = 1e-3;

std::optional<int> target_d0(const SystemSpec& spec) {
  if (spec.spectrum && (spec.generator == GeneratorKind::RotatedDiagonal ||
                        spec.generator == GeneratorKind::Autonomous)) {
    return static_cast<int>(std::count_if(spec.spectrum->begin(), spec.spectrum->end(),
                                          [](double s) { return std::abs(s) >= 1.0; }));
  }
  if (spec.generator == GeneratorKind::ExplicitSequence && spec.explicit_steps.size() == 1) {
    return spectral::analyze_autonomous(spec.explicit_steps.front().a).d0;
  }
  return std::nullopt;
}

bool time_invariant(const SystemSpec& spec) {
  return spec.generator == GeneratorKind::Autonomous ||
         (spec.generator == GeneratorKind::ExplicitSequence && spec.explicit_steps.size() == 1);
}

GramianSummary scan_gramian(const OperatorSource& ops, const SystemSpec& spec) {
  const int last = spec.horizon - spec.d + 1;
  GramianSummary out;
  if (last < 1) return out;
  std::vector<int> steps;
  const int count = std::min(kGramianScanPoints, last);
  for (int i = 0; i < count; ++i) {
    const int n = count == 1 ? 1 : 1 + static_cast<int>(static_cast<long>(last - 1) * i / (count - 1));
    if (steps.empty() || steps.back() != n) steps.push_back(n);
  }
  const auto scan = gramian::uniform_observability_scan(ops, steps);
  out.min_eig = scan.min_eig;
  out.argmin = scan.argmin;
  out.scanned = static_cast<int>(steps.size());
  out.warn = scan.warn;
  return out;
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json vector_json(const Vector& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
  return out;
}

// Writes files into one directory and remembers them for cleanup.
class ArtifactWriter {
 public:
  explicit ArtifactWriter(fs::path dir) : dir_(std::move(dir)) {
    if (!fs::exists(dir_)) {
      fs::create_directories(dir_);
      created_dir_ = true;
    }
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    written_.push_back(name);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::InvalidInput, "cannot write " + path.string());
    out << content;
    if (!out) throw Error(ErrorKind::InvalidInput, "failed writing " + path.string());
  }

  void remove_all() noexcept {
    std::error_code ec;
    for (const auto& name : written_) fs::remove(dir_ / name, ec);
    if (created_dir_ && fs::is_empty(dir_, ec)) fs::remove(dir_, ec);
    written_.clear();
  }

  const std::vector<std::string>& written() const { return written_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  bool created_dir_ = false;
  std::vector<std::string> written_;
};

std::string diagnostics_csv(const RunSummary& s) {
  const int d = s.config.system.d;
  std::ostringstream out;
  out << "n";
  for (int j = 1; j <= d; ++j) out << ",delta_eig_" << j;
  for (int j = 1; j <= d; ++j) out << ",sigma_eig_" << j;
  for (int j = 1; j <= d; ++j) out << ",proj_norm_" << j;
  out << ",restriction_delta,restriction_sigma,eps_rank_delta,eps_rank_sigma\n";
  for (const auto& f : s.frames) {
    out << f.n;
    for (int j = 0; j < d; ++j) out << ',' << format_double(f.delta_eigs(j));
    for (int j = 0; j < d; ++j) out << ',' << format_double(f.sigma_eigs(j));
    for (int j = 0; j < d; ++j) out << ',' << format_double(f.proj_norms(j));
    out << ',' << format_double(f.restriction_delta) << ',' << format_double(f.restriction_sigma)
        << ',' << f.eps_rank_delta << ',' << f.eps_rank_sigma << '\n';
  }
  return out.str();
}

std::string steps_csv(const RunSummary& s) {
  std::ostringstream out;
  out << "n,sigma_norm,delta_norm,gain_norm,m_norm,gain_identity_residual\n";
  for (const auto& r : s.steps) {
    out << r.n << ',' << format_double(r.sigma_norm) << ',' << format_double(r.delta_norm) << ','
        << format_double(r.gain_norm) << ',' << format_double(r.m_norm) << ','
        << format_double(r.gain_identity_residual) << '\n';
  }
  return out.str();
}

std::vector<double> target_exponents(const SystemSpec& spec) {
  std::vector<double> out;
  if (!spec.spectrum) return out;
  for (double m : *spec.spectrum) out.push_back(std::log(std::abs(m)));
  std::sort(out.begin(), out.end(), std::greater<>());
  return out;
}

std::string exponents_csv(const RunSummary& s) {
  const auto targets = target_exponents(s.config.system);
  std::ostringstream out;
  out << "j,exponent,tail_exponent,target\n";
  for (Eigen::Index j = 0; j < s.lyapunov.exponents.size(); ++j) {
    out << j + 1 << ',' << format_double(s.lyapunov.exponents(j)) << ','
        << format_double(s.lyapunov.tail_exponents(j)) << ',';
    if (static_cast<std::size_t>(j) < targets.size()) out << format_double(targets[static_cast<std::size_t>(j)]);
    out << '\n';
  }
  return out.str();
}

std::string history_csv(const RunSummary& s) {
  const Matrix& h = s.lyapunov.history;
  std::ostringstream out;
  out << "n";
  for (Eigen::Index j = 1; j <= h.rows(); ++j) out << ",mu_" << j;
  out << '\n';
  for (Eigen::Index c = 0; c < h.cols(); ++c) {
    out << c + 1;
    for (Eigen::Index j = 0; j < h.rows(); ++j) out << ',' << format_double(h(j, c));
    out << '\n';
  }
  return out.str();
}

std::string autonomous_csv(const spectral::NullspaceReport& r) {
  std::ostringstream out;
  out << "j,eig_mag,norm\n";
  for (Eigen::Index j = 0; j < r.direction_norms.size(); ++j) {
    out << j + 1 << ',' << format_double(r.eig_mags(j)) << ',' << format_double(r.direction_norms(j))
        << '\n';
  }
  return out.str();
}

void write_svgs(ArtifactWriter& w, const RunSummary& s) {
  const int d = s.config.system.d;
  std::vector<svg::Series> eig(static_cast<std::size_t>(d)), proj(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j) {
    auto& e = eig[static_cast<std::size_t>(j)];
    auto& p = proj[static_cast<std::size_t>(j)];
    e.label = "lambda_" + std::to_string(j + 1);
    p.label = "||Delta u_" + std::to_string(j + 1) + "||";
    for (const auto& f : s.frames) {
      e.x.push_back(f.n);
      e.y.push_back(f.delta_eigs(j));
      p.x.push_back(f.n);
      p.y.push_back(f.proj_norms(j));
    }
  }
  w.write("eigenvalues.svg", svg::render({"Eigenvalues of the analysis covariance", "n",
                                          "eigenvalue (log10)"}, eig));
  w.write("projections.svg", svg::render({"Norms of Delta_n applied to backward vectors", "n",
                                          "norm (log10)"}, proj));

  svg::Series growth{"exp(mu_j)", {}, {}}, target{"|lambda_j|", {}, {}};
  const auto targets = target_exponents(s.config.system);
  for (Eigen::Index j = 0; j < s.lyapunov.exponents.size(); ++j) {
    growth.x.push_back(static_cast<double>(j + 1));
    growth.y.push_back(std::exp(s.lyapunov.exponents(j)));
    if (static_cast<std::size_t>(j) < targets.size()) {
      target.x.push_back(static_cast<double>(j + 1));
      target.y.push_back(std::exp(targets[static_cast<std::size_t>(j)]));
    }
  }
  std::vector<svg::Series> exps{growth};
  if (!target.x.empty()) exps.push_back(target);
  w.write("exponents.svg", svg::render({"Growth rates per step", "j", "magnitude (log10)"}, exps));

  if (s.nullspace) {
    svg::Series norms{"||Delta v_j(A^T)||", {}, {}};
    for (Eigen::Index j = 0; j < s.nullspace->direction_norms.size(); ++j) {
      norms.x.push_back(static_cast<double>(j + 1));
      norms.y.push_back(s.nullspace->direction_norms(j));
    }
    w.write("autonomous.svg", svg::render({"Delta applied to eigenvectors of A^T", "j",
                                           "norm (log10)"}, {norms}));
  }
}

void write_artifacts(ArtifactWriter& w, RunSummary& s) {
  w.write("diagnostics.csv", diagnostics_csv(s));
  w.write("steps.csv", steps_csv(s));
  w.write("exponents.csv", exponents_csv(s));
  w.write("lyapunov_history.csv", history_csv(s));
  if (s.nullspace) w.write("autonomous.csv", autonomous_csv(*s.nullspace));
  if (s.config.emit_svg) write_svgs(w, s);
  s.files = w.written();
  w.write("config.json", to_json(s.config).dump(2) + "\n");
  s.files = w.written();
  w.write("metadata.json", metadata(s).dump(2) + "\n");
}

RunSummary run_in(const RunConfig& config, const fs::path& dir) {
  const auto t0 = std::chrono::steady_clock::now();
  RunSummary s = compute(config);
  ArtifactWriter w(dir);
  try {
    s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_artifacts(w, s);
  } catch (...) {
    w.remove_all();
    throw;
  }
  return s;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::InvalidInput, "cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 15];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned len = 0;
  EVP_DigestFinal_ex(ctx, digest, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  char byte[3];
  for (unsigned i = 0; i < len; ++i) {
    std::snprintf(byte, sizeof byte, "%02x", digest[i]);
    hex += byte;
  }
  return hex;
}

RunSummary compute(const RunConfig& config) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const SystemSpec& spec = config.system;
  const int d = spec.d;

  RunSummary s;
  s.config = config;
  const OperatorSource ops = operator_source(spec);
  s.lyapunov = lyapunov::qr_exponents(ops, spec.horizon);
  s.d0_measured = s.lyapunov.d0;
  s.d0_target = target_d0(spec);

  const Vector x0 = draw_initial_state(spec, Vector::Zero(d), spec.seed);
  const Trajectory traj = simulate_truth(spec, x0, config.noise_seed);

  Matrix prev_delta = initial_covariance(spec);
  double increment = 0.0;
  std::optional<int> settled;
  std::size_t next_checkpoint = 0;
  kalman::FilterOptions options;
  options.keep_states = false;
  options.on_step = [&](const kalman::FilterState& state, const kalman::ClosureAccumulator& acc) {
    s.steps.push_back({state.n, linalg::op_norm(state.sigma), linalg::op_norm(state.delta),
                       linalg::op_norm(state.gain), linalg::op_norm(acc.m),
                       state.gain_identity_residual});
    s.max_gain_identity_residual = std::max(s.max_gain_identity_residual, state.gain_identity_residual);
    s.max_joseph_residual = std::max(s.max_joseph_residual, state.joseph_residual);
    if (next_checkpoint < config.checkpoints.size() && config.checkpoints[next_checkpoint] == state.n) {
      s.frames.push_back(diagnostics::make_frame(state, acc.b_q, s.d0_measured, config.eps));
      ++next_checkpoint;
    }
    increment = linalg::op_norm(state.delta - prev_delta);
    if (increment > spectral::kSettledIncrement) {
      settled.reset();
    } else if (!settled) {
      settled = state.n;
    }
    prev_delta = state.delta;
  };
  kalman::run_filter(ops, spec.horizon, initial_covariance(spec), traj, options);

  if (time_invariant(spec)) {
    s.nullspace = spectral::nullspace_profile(spectral::time_invariant_dynamics(spec), prev_delta);
    s.nullspace->final_increment = increment;
    s.nullspace->settled_step = settled;
  }
  s.gramian = scan_gramian(ops, spec);
  s.collapse_step = diagnostics::collapse_step(s.frames, d - s.d0_measured);

  // Run-level checks recorded in the metadata.
  std::vector<double> delta_norms, m_norms;
  for (const auto& r : s.steps) {
    delta_norms.push_back(r.delta_norm);
    m_norms.push_back(r.m_norm);
  }
  s.checks["gain_identity"] = s.max_gain_identity_residual <= kalman::kGainIdentityTol;
  s.checks["joseph_agreement"] = s.max_joseph_residual <= kalman::kJosephTol;
  s.checks["bounded_covariance"] = kalman::tail_slope(delta_norms) <= kSlopeLimit;
  s.checks["bounded_closure"] = kalman::tail_slope(m_norms) <= kSlopeLimit;
  s.checks["observability_scan"] = !s.gramian.warn;
  if (!s.frames.empty()) {
    const auto& last = s.frames.back();
    s.checks["collapse_saturated"] =
        last.eps_rank_delta == d - s.d0_measured && last.eps_rank_sigma == d - s.d0_measured;
    const std::size_t from = s.frames.size() - std::max<std::size_t>(1, s.frames.size() / 4);
    double worst = 0.0;
    for (std::size_t i = from; i < s.frames.size(); ++i) {
      worst = std::max({worst, s.frames[i].restriction_delta, s.frames[i].restriction_sigma});
    }
    s.checks["stable_restriction_vanishes"] = worst <= config.eps;
  }
  if (s.d0_target) s.checks["d0_matches_target"] = *s.d0_target == s.d0_measured;
  if (s.nullspace) {
    bool ok = true;
    for (Eigen::Index j = s.nullspace->d0; j < s.nullspace->direction_norms.size(); ++j) {
      ok = ok && s.nullspace->direction_norms(j) <= config.eps;
    }
    s.checks["stable_directions_null"] = ok;
  }
  s.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return s;
}

json metadata(const RunSummary& s) {
  json files = json::array();
  const fs::path dir = s.config.output_dir;
  for (const auto& name : s.files) {
    const fs::path p = dir / name;
    files.push_back({{"name", name}, {"sha256", sha256_file(p)}, {"bytes", fs::file_size(p)}});
  }
  json checks = json::object();
  for (const auto& [k, v] : s.checks) checks[k] = v;
  json doc = {
      {"schema_version", kSchemaVersion},
      {"config", to_json(s.config)},
      {"rng", {{"generator", CounterRng::kName},
               {"system_seed", s.config.system.seed},
               {"noise_seed", s.config.noise_seed}}},
      {"d0", {{"measured", s.d0_measured},
              {"target", s.d0_target ? json(*s.d0_target) : json(nullptr)},
              {"neutral_threshold", lyapunov::kNeutralThreshold}}},
      {"lyapunov", {{"exponents", vector_json(s.lyapunov.exponents)},
                    {"tail_exponents", vector_json(s.lyapunov.tail_exponents)},
                    {"exponent_sum", number(s.lyapunov.exponents.sum())},
                    {"mean_log_det", number(s.lyapunov.mean_log_det)}}},
      {"gramian_scan", {{"min_eig", number(s.gramian.min_eig)},
                        {"argmin", s.gramian.argmin},
                        {"scanned", s.gramian.scanned},
                        {"threshold", gramian::kObservableThreshold},
                        {"warn", s.gramian.warn}}},
      {"filter", {{"max_gain_identity_residual", number(s.max_gain_identity_residual)},
                  {"max_joseph_residual", number(s.max_joseph_residual)}}},
      {"collapse_step", s.collapse_step},
      {"checks", checks},
      {"wall_seconds", s.wall_seconds},
      {"files", files},
  };
  if (s.nullspace) {
    doc["autonomous"] = {
        {"d0", s.nullspace->d0},
        {"restriction", number(s.nullspace->restriction)},
        {"final_increment", number(s.nullspace->final_increment)},
        {"settled_step", s.nullspace->settled_step ? json(*s.nullspace->settled_step) : json(nullptr)},
    };
  }
  return doc;
}

RunSummary run(const RunConfig& config) {
  if (!config.sweep_seeds.empty()) {
    throw Error(ErrorKind::ConfigError, "config has sweep_seeds; use run_sweep");
  }
  return run_in(config, config.output_dir);
}

unsigned sweep_threads() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RICCATI_RANK_THREADS")) {
    char* end = nullptr;
    const long cap = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && cap >= 1) n = std::min(n, static_cast<unsigned>(cap));
  }
  return n;
}

std::vector<RunSummary> run_sweep(const RunConfig& config) {
  std::vector<RunConfig> jobs;
  for (auto seed : config.sweep_seeds) {
    RunConfig c = config;
    c.sweep_seeds.clear();
    c.system.seed = seed;
    c.noise_seed = seed + 1;
    c.output_dir = config.output_dir / ("seed-" + std::to_string(seed));
    jobs.push_back(std::move(c));
  }
  std::vector<RunSummary> out(jobs.size());
  std::vector<std::exception_ptr> errors(jobs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        out[i] = run_in(jobs[i], jobs[i].output_dir);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const unsigned count = std::min<unsigned>(sweep_threads(), static_cast<unsigned>(jobs.size()));
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

}  // namespace rrank::experiment
