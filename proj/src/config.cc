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
#include "rrank/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "rrank/error.hpp"

namespace rrank {
namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string& msg) { throw Error(ErrorKind::ConfigError, msg); }

void reject_unknown_keys(const json& doc, const std::set<std::string>& allowed,
                         const std::string& where) {
  if (!doc.is_object()) config_error(where + " must be an object");
  for (const auto& item : doc.items()) {
    if (!allowed.count(item.key())) config_error("unknown key '" + item.key() + "' in " + where);
  }
}

template <typename T>
T get_or(const json& doc, const char* key, T fallback) {
  if (!doc.contains(key)) return fallback;
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    config_error(std::string("bad value for '") + key + "': " + e.what());
  }
}

GeneratorKind generator_from(const std::string& s) {
  for (auto k : {GeneratorKind::RandomBounded, GeneratorKind::RotatedDiagonal,
                 GeneratorKind::Autonomous, GeneratorKind::ExplicitSequence}) {
    if (s == to_string(k)) return k;
  }
  config_error("unknown generator '" + s + "'");
}

Delta0Kind delta0_from(const std::string& s) {
  for (auto k : {Delta0Kind::Identity, Delta0Kind::RandomSPD, Delta0Kind::Explicit}) {
    if (s == to_string(k)) return k;
  }
  config_error("unknown delta0 kind '" + s + "'");
}

ExperimentKind experiment_from(const std::string& s) {
  for (auto k : {ExperimentKind::NonAut30, ExperimentKind::Aut30, ExperimentKind::Custom}) {
    if (s == to_string(k)) return k;
  }
  config_error("unknown experiment '" + s + "'");
}

std::vector<double> linspace(double lo, double hi, int count) {
  std::vector<double> out;
  for (int i = 0; i < count; ++i) {
    out.push_back(count == 1 ? lo : lo + (hi - lo) * i / (count - 1));
  }
  return out;
}

std::vector<double> split_spectrum(int unstable, double u_lo, double u_hi, int stable, double s_lo,
                                   double s_hi) {
  auto top = linspace(u_hi, u_lo, unstable);
  const auto bottom = linspace(s_hi, s_lo, stable);
  top.insert(top.end(), bottom.begin(), bottom.end());
  return top;
}

}  // namespace

const char* to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::NonAut30: return "nonaut30";
    case ExperimentKind::Aut30: return "aut30";
    case ExperimentKind::Custom: return "custom";
  }
  return "?";
}

void RunConfig::validate() const {
  try {
    system.validate();
  } catch (const Error& e) {
    config_error(std::string("system: ") + e.what());
  }
  if (!(eps > 0)) config_error("eps must be positive");
  if (checkpoints.empty()) config_error("checkpoints must not be empty");
  if (!std::is_sorted(checkpoints.begin(), checkpoints.end()) ||
      std::adjacent_find(checkpoints.begin(), checkpoints.end()) != checkpoints.end()) {
    config_error("checkpoints must be strictly increasing");
  }
  if (checkpoints.front() < 1 || checkpoints.back() > system.horizon) {
    config_error("checkpoints must lie in [1, horizon]");
  }
  if (output_dir.empty()) config_error("output_dir must not be empty");
}

std::vector<int> every_step(int horizon, int stride) {
  std::vector<int> out;
  for (int n = stride; n <= horizon; n += stride) out.push_back(n);
  if (out.empty() || out.back() != horizon) out.push_back(horizon);
  return out;
}

std::vector<std::string> preset_names() { return {"nonaut30", "aut30", "pair2"}; }

RunConfig preset(const std::string& name, std::uint64_t seed) {
  RunConfig c;
  c.preset = name;
  c.system.seed = seed;
  c.noise_seed = seed + 1;
  if (name == "nonaut30") {
    c.experiment = ExperimentKind::NonAut30;
    c.system.d = 30;
    c.system.q = 10;
    c.system.horizon = 400;
    c.system.generator = GeneratorKind::RotatedDiagonal;
    c.system.delta0 = Delta0Kind::RandomSPD;
    c.system.spectrum = split_spectrum(14, 1.4, 1.9, 16, 0.2, 0.9);
    c.checkpoints = every_step(400);
  } else if (name == "aut30") {
    c.experiment = ExperimentKind::Aut30;
    c.system.d = 30;
    c.system.q = 10;
    c.system.horizon = 500;
    c.system.generator = GeneratorKind::Autonomous;
    c.system.delta0 = Delta0Kind::RandomSPD;
    c.system.spectrum = split_spectrum(12, 1.1, 1.8, 18, 0.2, 0.9);
    c.checkpoints = every_step(500, 5);
  } else if (name == "pair2") {
    c.experiment = ExperimentKind::Custom;
    c.system.d = 2;
    c.system.q = 2;
    c.system.horizon = 100;
    c.system.generator = GeneratorKind::ExplicitSequence;
    ExplicitStep s;
    s.a = Eigen::Vector2d(2.0, 0.5).asDiagonal();
    s.h = Matrix::Identity(2, 2);
    s.q = Matrix::Identity(2, 2);
    c.system.explicit_steps = {s};
    c.checkpoints = every_step(100);
  } else {
    config_error("unknown preset '" + name + "'");
  }
  c.output_dir = "out/" + name;
  return c;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& doc, const std::string& what) {
  if (!doc.is_array() || doc.empty()) config_error(what + " must be a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(doc.size());
  if (!doc.front().is_array() || doc.front().empty()) config_error(what + " rows must be arrays");
  const auto cols = static_cast<Eigen::Index>(doc.front().size());
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = doc[static_cast<std::size_t>(i)];
    if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
      config_error(what + " is ragged");
    }
    for (Eigen::Index j = 0; j < cols; ++j) {
      const auto& v = row[static_cast<std::size_t>(j)];
      if (!v.is_number()) config_error(what + " entries must be numbers");
      m(i, j) = v.get<double>();
    }
  }
  return m;
}

json to_json(const SystemSpec& spec) {
  json doc = {
      {"d", spec.d},
      {"q", spec.q},
      {"horizon", spec.horizon},
      {"seed", spec.seed},
      {"generator", to_string(spec.generator)},
      {"bounds", {{"c_a", spec.bounds.c_a}, {"c_h", spec.bounds.c_h}, {"c_q", spec.bounds.c_q}}},
      {"delta0", to_string(spec.delta0)},
      {"autonomous_skew", spec.autonomous_skew},
  };
  if (spec.delta0 == Delta0Kind::Explicit) doc["delta0_matrix"] = matrix_to_json(spec.delta0_explicit);
  if (spec.spectrum) doc["spectrum"] = *spec.spectrum;
  if (!spec.explicit_steps.empty()) {
    json steps = json::array();
    for (const auto& s : spec.explicit_steps) {
      steps.push_back({{"a", matrix_to_json(s.a)}, {"h", matrix_to_json(s.h)}, {"q", matrix_to_json(s.q)}});
    }
    doc["steps"] = std::move(steps);
  }
  return doc;
}

SystemSpec system_from_json(const json& doc) {
  reject_unknown_keys(doc,
                      {"d", "q", "horizon", "seed", "generator", "bounds", "delta0", "delta0_matrix",
                       "spectrum", "autonomous_skew", "steps"},
                      "system");
  SystemSpec spec;
  spec.d = get_or(doc, "d", spec.d);
  spec.q = get_or(doc, "q", spec.q);
  spec.horizon = get_or(doc, "horizon", spec.horizon);
  spec.seed = get_or<std::uint64_t>(doc, "seed", spec.seed);
  spec.generator = generator_from(get_or<std::string>(doc, "generator", "RandomBounded"));
  if (doc.contains("bounds")) {
    const auto& b = doc.at("bounds");
    reject_unknown_keys(b, {"c_a", "c_h", "c_q"}, "bounds");
    spec.bounds.c_a = get_or(b, "c_a", spec.bounds.c_a);
    spec.bounds.c_h = get_or(b, "c_h", spec.bounds.c_h);
    spec.bounds.c_q = get_or(b, "c_q", spec.bounds.c_q);
  }
  spec.delta0 = delta0_from(get_or<std::string>(doc, "delta0", "Identity"));
  if (doc.contains("delta0_matrix")) {
    spec.delta0_explicit = matrix_from_json(doc.at("delta0_matrix"), "delta0_matrix");
  }
  if (doc.contains("spectrum")) spec.spectrum = get_or<std::vector<double>>(doc, "spectrum", {});
  spec.autonomous_skew = get_or(doc, "autonomous_skew", spec.autonomous_skew);
  if (doc.contains("steps")) {
    const auto& steps = doc.at("steps");
    if (!steps.is_array()) config_error("steps must be an array");
    for (const auto& s : steps) {
      reject_unknown_keys(s, {"a", "h", "q"}, "steps[]");
      if (!s.contains("a") || !s.contains("h") || !s.contains("q")) {
        config_error("each step needs a, h and q");
      }
      spec.explicit_steps.push_back({matrix_from_json(s.at("a"), "a"), matrix_from_json(s.at("h"), "h"),
                                     matrix_from_json(s.at("q"), "q")});
    }
  }
  return spec;
}

json to_json(const RunConfig& config) {
  json doc = {
      {"schema_version", kSchemaVersion},
      {"experiment", to_string(config.experiment)},
      {"system", to_json(config.system)},
      {"checkpoints", config.checkpoints},
      {"eps", config.eps},
      {"output_dir", config.output_dir.string()},
      {"emit_svg", config.emit_svg},
      {"noise_seed", config.noise_seed},
  };
  if (!config.preset.empty()) doc["preset"] = config.preset;
  if (!config.sweep_seeds.empty()) doc["sweep_seeds"] = config.sweep_seeds;
  return doc;
}

RunConfig config_from_json(const json& doc) {
  reject_unknown_keys(doc,
                      {"schema_version", "experiment", "preset", "system", "checkpoints",
                       "checkpoint_stride", "eps", "output_dir", "emit_svg", "noise_seed",
                       "sweep_seeds"},
                      "config");
  if (!doc.contains("schema_version")) config_error("missing schema_version");
  const int version = get_or(doc, "schema_version", 0);
  if (version != kSchemaVersion) {
    config_error("unsupported schema_version " + std::to_string(version));
  }

  // A preset supplies defaults that the remaining keys override.
  RunConfig c;
  if (doc.contains("preset")) {
    c = preset(get_or<std::string>(doc, "preset", ""), c.system.seed);
  }
  if (doc.contains("experiment")) c.experiment = experiment_from(get_or<std::string>(doc, "experiment", ""));
  if (doc.contains("system")) {
    c.system = system_from_json(doc.at("system"));
  } else if (c.preset.empty()) {
    config_error("missing system");
  }
  if (doc.contains("checkpoints")) {
    c.checkpoints = get_or<std::vector<int>>(doc, "checkpoints", {});
  } else if (doc.contains("checkpoint_stride")) {
    const int stride = get_or(doc, "checkpoint_stride", 1);
    if (stride < 1) config_error("checkpoint_stride must be >= 1");
    c.checkpoints = every_step(c.system.horizon, stride);
  } else if (c.checkpoints.empty() || c.checkpoints.back() != c.system.horizon) {
    c.checkpoints = every_step(c.system.horizon);
  }
  c.eps = get_or(doc, "eps", c.eps);
  c.output_dir = get_or<std::string>(doc, "output_dir", c.output_dir.string());
  c.emit_svg = get_or(doc, "emit_svg", c.emit_svg);
  c.noise_seed = get_or<std::uint64_t>(doc, "noise_seed", c.system.seed + 1);
  c.sweep_seeds = get_or<std::vector<std::uint64_t>>(doc, "sweep_seeds", {});
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) config_error("cannot open config " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    config_error("cannot parse " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace rrank
