#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "density.hpp"
#include "errors.hpp"
#include "index_space.hpp"
#include "io.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace wfspec {

enum class GridKind { uniform, quadrature };

struct ConvergeSpec {
  std::vector<std::size_t> n;
  std::vector<int> D;
  std::vector<IndexVector> m;
};

struct MCSpec {
  std::int64_t N = 10000;
  std::int64_t replicates = 10000;
  double t = 0.2;
  int resolution = 60;
};

struct ValidateSpec {
  int draws = 20;
  int points = 200;
  int degree = 4;
  int resolution = 40;
  int pairs = 5;
  double s = 0.25;
  double t = 0.25;
};

/// Fully resolved job. `resolved` is the JSON that produced it, defaults included,
/// and is what every output sidecar embeds.
struct JobConfig {
  ModelParams model;
  int truncation = 40;
  AssemblyOptions assembly;
  DensityCutoffs cutoffs;
  bool clip = false;
  GridKind grid = GridKind::uniform;
  int resolution = 50;
  std::vector<double> times;
  SimplexPoint x0;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  int normconst_m_max = 0;
  ConvergeSpec converge;
  MCSpec mc;
  ValidateSpec validate;
  json resolved;
};

inline json default_config() {
  return json::parse(R"({
    "truncation": 40,
    "pad": 4,
    "density": {"n_max": null, "m_max": null, "clip": false},
    "precision": {"mode": "auto", "bits": 128, "threshold": 50},
    "grid": {"kind": "uniform", "resolution": 50},
    "times": [0.04, 0.2, 1.0, 2.0],
    "x0": [0.02, 0.02],
    "seed": 1,
    "threads": 0,
    "normconst": {"m_max": null},
    "converge": {"n": [0], "D": [8, 12, 16, 20, 24], "m": []},
    "mc": {"N": 10000, "replicates": 10000, "t": 0.2, "resolution": 60},
    "validate": {"draws": 20, "points": 200, "degree": 4, "resolution": 40, "pairs": 5, "s": 0.25, "t": 0.25}
  })");
}

namespace detail {

// every user key must exist in the defaults; "model" is checked by model_from_json
inline void reject_unknown(const json& user, const json& defaults, const std::string& prefix) {
  for (auto it = user.begin(); it != user.end(); ++it) {
    const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
    if (key == "model") continue;
    if (!defaults.contains(it.key())) throw ConfigError("unknown config key '" + key + "'");
    const json& d = defaults[it.key()];
    if (d.is_object()) {
      if (!it.value().is_object()) throw ConfigError("config key '" + key + "' must be an object");
      reject_unknown(it.value(), d, key);
    }
  }
}

template <class T>
T get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ConfigError("config key '" + key + "' must be a number");
  if constexpr (std::is_integral_v<T>) {
    if (!j.is_number_integer()) throw ConfigError("config key '" + key + "' must be an integer");
    if constexpr (std::is_unsigned_v<T>) {
      if (j.get<long long>() < 0) throw ConfigError("config key '" + key + "' must be non-negative");
    }
  }
  return j.get<T>();
}

template <class T>
std::vector<T> get_list(const json& j, const std::string& key) {
  if (!j.is_array()) throw ConfigError("config key '" + key + "' must be an array");
  std::vector<T> out;
  for (const auto& v : j) out.push_back(get_number<T>(v, key));
  return out;
}

}  // namespace detail

/// Applies one "a.b.c=value" override. The value is parsed as JSON when it can
/// be, otherwise taken as a string.
inline void apply_override(json& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: " + assignment);
  const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &cfg;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    if (key.empty()) throw ConfigError("empty component in override path " + path);
    if (!node->is_object()) throw ConfigError("override path " + path + " descends into a non-object");
    if (dot == std::string::npos) {
      (*node)[key] = value;
      break;
    }
    node = &(*node)[key];
    if (node->is_null()) *node = json::object();
    start = dot + 1;
  }
}

inline JobConfig resolve_config(const json& user) {
  if (!user.is_object()) throw ConfigError("config must be a JSON object");
  json defaults = default_config();
  detail::reject_unknown(user, defaults, "");
  if (!user.contains("model")) throw ConfigError("config needs a 'model' with theta and sigma");
  json cfg = defaults;
  cfg.merge_patch(user);
  // merge_patch drops explicit nulls; they mean "use the default"
  for (const char* k : {"n_max", "m_max"})
    if (!cfg["density"].contains(k)) cfg["density"][k] = nullptr;
  if (!cfg["normconst"].contains("m_max")) cfg["normconst"]["m_max"] = nullptr;

  JobConfig jc;
  jc.model = model_from_json(cfg["model"]);
  jc.truncation = detail::get_number<int>(cfg["truncation"], "truncation");
  if (jc.truncation < 0) throw ConfigError("truncation must be non-negative");
  jc.assembly.pad = detail::get_number<int>(cfg["pad"], "pad");
  if (jc.assembly.pad < 2) throw ConfigError("pad must be >= 2 so the leading block of M is exact");

  const json& prec = cfg["precision"];
  if (!prec["mode"].is_string()) throw ConfigError("precision.mode must be a string");
  const std::string mode = prec["mode"];
  if (mode == "auto") jc.assembly.precision = PrecisionMode::automatic;
  else if (mode == "double") jc.assembly.precision = PrecisionMode::double_precision;
  else if (mode == "extended") jc.assembly.precision = PrecisionMode::extended;
  else throw ConfigError("precision.mode must be auto, double or extended");
  jc.assembly.extended_bits = detail::get_number<unsigned>(prec["bits"], "precision.bits");
  if (jc.assembly.extended_bits != 128 && jc.assembly.extended_bits != 256)
    throw ConfigError("precision.bits must be 128 or 256");
  jc.assembly.extended_threshold = detail::get_number<double>(prec["threshold"], "precision.threshold");

  const std::size_t U = basis_size(jc.model.K(), jc.truncation);
  const json& dens = cfg["density"];
  jc.cutoffs.n_max = dens["n_max"].is_null() ? std::min<std::size_t>(562, U)
                                              : detail::get_number<std::size_t>(dens["n_max"], "density.n_max");
  jc.cutoffs.m_max = dens["m_max"].is_null() ? std::min(36, jc.truncation)
                                              : detail::get_number<int>(dens["m_max"], "density.m_max");
  if (jc.cutoffs.n_max == 0 || jc.cutoffs.n_max > U)
    throw ConfigError("density.n_max must lie in [1, U(D)] = [1, " + std::to_string(U) + "]");
  if (jc.cutoffs.m_max < 0 || jc.cutoffs.m_max > jc.truncation) throw ConfigError("density.m_max must lie in [0, D]");
  if (!dens["clip"].is_boolean()) throw ConfigError("density.clip must be a boolean");
  jc.clip = dens["clip"];

  const json& nc = cfg["normconst"];
  jc.normconst_m_max = nc["m_max"].is_null() ? jc.truncation : detail::get_number<int>(nc["m_max"], "normconst.m_max");
  if (jc.normconst_m_max < 0 || jc.normconst_m_max > jc.truncation)
    throw ConfigError("normconst.m_max must lie in [0, D]");

  const json& grid = cfg["grid"];
  if (!grid["kind"].is_string()) throw ConfigError("grid.kind must be a string");
  const std::string kind = grid["kind"];
  if (kind == "uniform") jc.grid = GridKind::uniform;
  else if (kind == "quadrature") jc.grid = GridKind::quadrature;
  else throw ConfigError("grid.kind must be uniform or quadrature");
  jc.resolution = detail::get_number<int>(grid["resolution"], "grid.resolution");
  if (jc.resolution < 2) throw ConfigError("grid.resolution must be >= 2");
  if (jc.grid == GridKind::quadrature && jc.model.K() > 4) throw ConfigError("quadrature grids support K <= 4");

  jc.times = detail::get_list<double>(cfg["times"], "times");
  for (double t : jc.times)
    if (!(t > 0) || !std::isfinite(t))
      throw ConfigError("times must be positive: at t = 0 the transition density is a Dirac delta");

  try {
    jc.x0 = SimplexPoint::from_frequencies(detail::get_list<double>(cfg["x0"], "x0"), jc.model.K());
  } catch (const ParameterDomainError& e) {
    throw ConfigError(std::string("x0: ") + e.what());
  }
  jc.seed = detail::get_number<std::uint64_t>(cfg["seed"], "seed");
  jc.threads = detail::get_number<unsigned>(cfg["threads"], "threads");

  const json& cv = cfg["converge"];
  jc.converge.n = detail::get_list<std::size_t>(cv["n"], "converge.n");
  jc.converge.D = detail::get_list<int>(cv["D"], "converge.D");
  for (int D : jc.converge.D)
    if (D < 0) throw ConfigError("converge.D entries must be non-negative");
  if (!cv["m"].is_array()) throw ConfigError("converge.m must be an array of index tuples");
  for (const auto& m : cv["m"]) {
    auto deg = detail::get_list<int>(m, "converge.m");
    if (static_cast<int>(deg.size()) != jc.model.dimension()) throw ConfigError("converge.m tuples need K-1 entries");
    for (int v : deg)
      if (v < 0) throw ConfigError("converge.m entries must be non-negative");
    jc.converge.m.emplace_back(std::move(deg));
  }

  const json& mc = cfg["mc"];
  jc.mc.N = detail::get_number<std::int64_t>(mc["N"], "mc.N");
  jc.mc.replicates = detail::get_number<std::int64_t>(mc["replicates"], "mc.replicates");
  jc.mc.t = detail::get_number<double>(mc["t"], "mc.t");
  jc.mc.resolution = detail::get_number<int>(mc["resolution"], "mc.resolution");
  if (jc.mc.N < 1 || jc.mc.replicates < 2 || !(jc.mc.t > 0) || jc.mc.resolution < 2)
    throw ConfigError("mc needs N >= 1, replicates >= 2, t > 0, resolution >= 2");

  const json& v = cfg["validate"];
  jc.validate.draws = detail::get_number<int>(v["draws"], "validate.draws");
  jc.validate.points = detail::get_number<int>(v["points"], "validate.points");
  jc.validate.degree = detail::get_number<int>(v["degree"], "validate.degree");
  jc.validate.resolution = detail::get_number<int>(v["resolution"], "validate.resolution");
  jc.validate.pairs = detail::get_number<int>(v["pairs"], "validate.pairs");
  jc.validate.s = detail::get_number<double>(v["s"], "validate.s");
  jc.validate.t = detail::get_number<double>(v["t"], "validate.t");
  if (jc.validate.draws < 1 || jc.validate.points < 1 || jc.validate.degree < 0 || jc.validate.resolution < 2 ||
      jc.validate.pairs < 1 || !(jc.validate.s > 0) || !(jc.validate.t > 0))
    throw ConfigError("validate settings out of range");

  cfg["model"] = model_to_json(jc.model);
  jc.resolved = std::move(cfg);
  return jc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot read config file " + path);
  json j = json::parse(f, nullptr, false);
  if (j.is_discarded()) throw ConfigError("config file " + path + " is not valid JSON");
  return j;
}

}  // namespace wfspec
