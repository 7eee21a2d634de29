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
// riccati-rank: run experiments, verify acceptance criteria, and probe spectra.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rrank/acceptance.hpp"
#include "rrank/config.hpp"
#include "rrank/error.hpp"
#include "rrank/experiment.hpp"
#include "rrank/gramian.hpp"
#include "rrank/lyapunov.hpp"
#include "rrank/spectral.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitAcceptance = 4;

struct Common {
  std::string config_path;
  std::string preset = "nonaut30";
  std::optional<std::uint64_t> seed;
  std::string out;
  bool no_svg = false;
};

void add_common(CLI::App* cmd, Common& c, bool with_output) {
  cmd->add_option("--config", c.config_path, "JSON run configuration");
  cmd->add_option("--preset", c.preset, "Named preset: nonaut30, aut30, pair2");
  cmd->add_option("--seed", c.seed, "Override the system seed");
  if (with_output) {
    cmd->add_option("--out", c.out, "Output directory");
    cmd->add_flag("--no-svg", c.no_svg, "Skip SVG figures");
  }
}

rrank::RunConfig resolve(const Common& c) {
  rrank::RunConfig config =
      c.config_path.empty() ? rrank::preset(c.preset) : rrank::load_config(c.config_path);
  if (c.seed) {
    config.system.seed = *c.seed;
    config.noise_seed = *c.seed + 1;
  }
  if (!c.out.empty()) config.output_dir = c.out;
  if (c.no_svg) config.emit_svg = false;
  config.validate();
  return config;
}

void print_summary(const rrank::experiment::RunSummary& s) {
  std::cout << "output: " << s.config.output_dir.string() << "\n";
  std::cout << "d0 measured " << s.d0_measured;
  if (s.d0_target) std::cout << ", target " << *s.d0_target;
  std::cout << "; collapse step " << s.collapse_step << "; wall " << s.wall_seconds << " s\n";
  for (const auto& [name, ok] : s.checks) std::cout << "  " << (ok ? "ok   " : "FAIL ") << name << "\n";
}

int cmd_run(const Common& c) {
  const auto config = resolve(c);
  if (config.sweep_seeds.empty()) {
    print_summary(rrank::experiment::run(config));
  } else {
    for (const auto& s : rrank::experiment::run_sweep(config)) print_summary(s);
  }
  return kExitOk;
}

int cmd_verify(const Common& c, double eps, const std::string& json_out) {
  rrank::acceptance::Options opts;
  opts.eps = eps;
  if (!c.config_path.empty() || c.seed) opts.system_under_test = resolve(c);
  const auto results = rrank::acceptance::run_all(opts);
  for (const auto& r : results) std::cout << rrank::acceptance::format_line(r) << "\n";
  const bool ok = rrank::acceptance::all_pass(results);
  if (!json_out.empty()) {
    std::ofstream out(json_out);
    out << nlohmann::json{{"all_pass", ok}, {"criteria", rrank::acceptance::to_json(results)}}.dump(2)
        << "\n";
  }
  std::cout << (ok ? "all criteria passed" : "some criteria failed") << "\n";
  return ok ? kExitOk : kExitAcceptance;
}

int cmd_lyapunov(const Common& c, int steps) {
  const auto config = resolve(c);
  const int n = steps > 0 ? steps : config.system.horizon;
  auto spec = config.system;
  spec.horizon = std::max(spec.horizon, n);
  const auto res = rrank::lyapunov::qr_exponents(rrank::operator_source(spec), n);
  std::cout << "j,exponent,tail_exponent\n";
  for (Eigen::Index j = 0; j < res.exponents.size(); ++j) {
    std::cout << j + 1 << ',' << rrank::experiment::format_double(res.exponents(j)) << ','
              << rrank::experiment::format_double(res.tail_exponents(j)) << "\n";
  }
  std::cerr << "d0 = " << res.d0 << " (steps " << n << ")\n";
  return kExitOk;
}

int cmd_probe(double re, double im, int k, const std::vector<int>& n_values, const std::string& out) {
  const std::complex<double> lambda(re, im);
  const auto probe = rrank::spectral::jordan_probe(lambda, k, n_values);
  std::string csv = "lambda_re,lambda_im,k,j,n,measured\n";
  for (int j = 0; j < k; ++j) {
    for (std::size_t c = 0; c < probe.n_values.size(); ++c) {
      csv += rrank::experiment::format_double(re) + ',' + rrank::experiment::format_double(im) + ',' +
             std::to_string(k) + ',' + std::to_string(j + 1) + ',' + std::to_string(probe.n_values[c]) +
             ',' + rrank::experiment::format_double(probe.measured(j, static_cast<Eigen::Index>(c))) + "\n";
    }
  }
  if (out.empty()) {
    std::cout << csv;
  } else {
    std::filesystem::create_directories(out);
    std::ofstream(std::filesystem::path(out) / "jordan_probe.csv") << csv;
    std::cout << "wrote " << (std::filesystem::path(out) / "jordan_probe.csv").string() << "\n";
  }
  return kExitOk;
}

int cmd_gramian(const Common& c, std::vector<int> steps) {
  const auto config = resolve(c);
  if (steps.empty()) {
    for (int n = 1; n + config.system.d - 1 <= config.system.horizon; n += 10) steps.push_back(n);
  }
  const auto ops = rrank::operator_source(config.system);
  std::cout << "n,min_eig,log_det,observable\n";
  for (int n : steps) {
    const auto g = rrank::gramian::observability_gramian(ops, n);
    std::cout << n << ',' << rrank::experiment::format_double(g.min_eig) << ','
              << rrank::experiment::format_double(g.log_det) << ',' << (g.nondegenerate() ? 1 : 0)
              << "\n";
  }
  const auto scan = rrank::gramian::uniform_observability_scan(ops, steps);
  std::cerr << (scan.warn ? "WARN" : "ok") << ": minimum " << scan.min_eig << " at n=" << scan.argmin
            << " (threshold " << rrank::gramian::kObservableThreshold << ")\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kalman filter rank-collapse experiments and Lyapunov analysis"};
  app.require_subcommand(1);

  Common run_opts, verify_opts, lyap_opts, gram_opts;
  auto* run = app.add_subcommand("run", "Run an experiment and write CSV/SVG/metadata artifacts");
  add_common(run, run_opts, true);

  auto* verify = app.add_subcommand("verify", "Run the acceptance suite");
  add_common(verify, verify_opts, false);
  double eps = 1e-6;
  std::string verify_json;
  verify->add_option("--eps", eps, "Collapse threshold for the rank criteria")->check(CLI::PositiveNumber);
  verify->add_option("--out", verify_json, "Write the criterion table as JSON");

  auto* lyap = app.add_subcommand("lyapunov", "Print QR-method Lyapunov exponents");
  add_common(lyap, lyap_opts, false);
  int lyap_steps = 0;
  lyap->add_option("--steps", lyap_steps, "Number of steps (default: horizon)");

  auto* probe = app.add_subcommand("probe-jordan", "Rooted singular values of Jordan-block powers");
  double re = 0.5, im = 0.0;
  int k = 2;
  std::vector<int> n_values{10, 100, 1000};
  std::string probe_out;
  probe->add_option("--lambda", re, "Real part of the eigenvalue");
  probe->add_option("--lambda-imag", im, "Imaginary part of the eigenvalue");
  probe->add_option("--k", k, "Block size (1..6)");
  probe->add_option("--n", n_values, "Powers to probe")->delimiter(',');
  probe->add_option("--out", probe_out, "Directory for jordan_probe.csv");

  auto* gram = app.add_subcommand("gramian", "Observability Gramian scan");
  add_common(gram, gram_opts, false);
  std::vector<int> gram_steps;
  gram->add_option("--step", gram_steps, "Base steps to evaluate")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*verify) return cmd_verify(verify_opts, eps, verify_json);
    if (*lyap) return cmd_lyapunov(lyap_opts, lyap_steps);
    if (*probe) return cmd_probe(re, im, k, n_values, probe_out);
    if (*gram) return cmd_gramian(gram_opts, gram_steps);
  } catch (const rrank::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    const bool config = e.kind() == rrank::ErrorKind::ConfigError || e.kind() == rrank::ErrorKind::InvalidInput;
    return config ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitOk;
}
