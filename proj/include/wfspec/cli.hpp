#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "config.hpp"
#include "density.hpp"
#include "io.hpp"
#include "oracles.hpp"
#include "parallel.hpp"
#include "spectral.hpp"
#include "validation.hpp"

namespace wfspec {

namespace fs = std::filesystem;

enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitNumerical = 3 };

/// What a command reports on stdout; files are written under the output directory.
struct CommandOutcome {
  int exit_code = kExitOk;
  json summary;
};

namespace detail {

inline json precision_json(const SpectralDecomposition& sd) {
  return json{{"extended", sd.extended}, {"bits", sd.bits}};
}

inline json base_metadata(const std::string& command, const JobConfig& jc) {
  return json{{"command", command}, {"config", jc.resolved}, {"files", json::array()}};
}

inline void write_metadata(const fs::path& out, json meta) {
  write_file(out / "metadata.json", meta.dump(2) + "\n");
}

inline std::string time_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", t);
  return buf;
}

/// Interior lattice y = k / res with every k_i >= 1 and the last frequency >= 1/res.
inline std::vector<SimplexPoint> uniform_grid(int K, int res) {
  const int d = K - 1;
  std::vector<SimplexPoint> pts;
  std::vector<int> k(d, 1);
  while (true) {
    int s = 0;
    for (int v : k) s += v;
    if (s <= res - 1) {
      std::vector<double> y(d);
      for (int i = 0; i < d; ++i) y[i] = static_cast<double>(k[i]) / res;
      pts.emplace_back(std::move(y));
    }
    int c = d - 1;
    while (c >= 0 && ++k[c] > res - 1 - (d - 1)) k[c--] = 1;
    if (c < 0) break;
  }
  return pts;
}

}  // namespace detail

inline CommandOutcome cmd_spectrum(const JobConfig& jc, const fs::path& out) {
  const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
  const auto ex = export_decomposition(sd);
  write_file(out / "spectrum.csv", ex.spectrum_csv);
  write_file(out / "coefficients.csv", ex.coefficients_csv);
  json meta = detail::base_metadata("spectrum", jc);
  meta["files"] = {"spectrum.csv", "coefficients.csv"};
  meta["precision"] = detail::precision_json(sd);
  meta["decomposition_hash"] = ex.hash;
  meta["basis_size"] = sd.size();
  detail::write_metadata(out, meta);
  json s{{"basis_size", sd.size()}, {"Lambda_0", sd.eigenvalues(0)}, {"decomposition_hash", ex.hash}};
  if (sd.size() > 1) s["Lambda_1"] = sd.eigenvalues(1);
  return {kExitOk, s};
}

/// One CSV per time: y_1..y_{K-1}, p, plus a quadrature weight column on
/// quadrature grids so that sum(weight * p) is the emitted mass.
inline CommandOutcome cmd_density(const JobConfig& jc, const fs::path& out, std::ostream& diag = std::cerr) {
  if (jc.times.empty()) throw ConfigError("density needs at least one time");
  const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
  const DensityEvaluator ev(sd, jc.x0, jc.cutoffs);
  const int K = jc.model.K(), d = K - 1;

  std::vector<SimplexPoint> pts;
  std::vector<double> weights;
  if (jc.grid == GridKind::quadrature) {
    const SimplexQuadrature Q(jc.model.theta(), jc.resolution);
    pts = Q.points();
    weights = Q.measure_weights();
  } else {
    pts = detail::uniform_grid(K, jc.resolution);
  }

  const std::size_t T = jc.times.size();
  std::vector<std::vector<double>> values(pts.size()), tails(pts.size());
  parallel_for(pts.size(), [&](std::size_t k) {
    values[k] = ev.ratios_with_tail(jc.times, pts[k], &tails[k]);
    const double pi0 = std::exp(log_neutral_stationary(jc.model, pts[k]));
    for (std::size_t i = 0; i < T; ++i) {
      values[k][i] *= pi0;
      tails[k][i] *= pi0;
    }
  });

  json meta = detail::base_metadata("density", jc);
  meta["precision"] = detail::precision_json(sd);
  meta["decomposition_hash"] = export_decomposition(sd).hash;
  meta["outputs"] = json::array();
  json summary{{"outputs", json::array()}};
  for (std::size_t i = 0; i < T; ++i) {
    CsvText csv;
    std::vector<std::string> cols;
    for (int c = 0; c < d; ++c) cols.push_back("y_" + std::to_string(c + 1));
    cols.push_back("p");
    if (!weights.empty()) cols.push_back("weight");
    csv.header(cols);
    double lo = 0, hi = 0, dropped = 0;
    long double mass = 0;
    std::size_t negative = 0;
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const double v = values[k][i];
      if (k == 0 || v < lo) lo = v;
      if (k == 0 || v > hi) hi = v;
      if (v < 0) ++negative;
      dropped = std::max(dropped, tails[k][i]);
      std::vector<double> row(pts[k].coords());
      row.push_back(jc.clip ? std::max(v, 0.0) : v);
      if (!weights.empty()) {
        row.push_back(weights[k]);
        mass += static_cast<long double>(weights[k]) * v;
      }
      csv.row(row);
    }
    const std::string name = "density_t" + detail::time_label(jc.times[i]) + ".csv";
    write_file(out / name, csv.str());
    const double peak = std::max(std::abs(lo), std::abs(hi));
    const bool warn = dropped > kDroppedTermThreshold * peak;
    if (warn)
      diag << "warning: t = " << jc.times[i] << ": dropped term " << dropped
                << " exceeds the reporting threshold; raise density.n_max\n";
    json entry{{"file", name},
               {"t", jc.times[i]},
               {"points", pts.size()},
               {"min", lo},
               {"max", hi},
               {"negative_points", negative},
               {"undershoot_relative", lo < 0 ? -lo / peak : 0.0},
               {"clipped", jc.clip},
               {"dropped_term", dropped},
               {"truncation_warning", warn}};
    if (!weights.empty()) entry["mass"] = static_cast<double>(mass);
    meta["files"].push_back(name);
    meta["outputs"].push_back(entry);
    summary["outputs"].push_back(entry);
  }
  detail::write_metadata(out, meta);
  return {kExitOk, summary};
}

inline CommandOutcome cmd_normconst(const JobConfig& jc, const fs::path& out) {
  const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
  const double C = normalizing_constant(sd, jc.normconst_m_max);
  json j{{"C_stat", C}, {"m_max", jc.normconst_m_max}, {"truncation", jc.truncation},
         {"precision", detail::precision_json(sd)}, {"decomposition_hash", export_decomposition(sd).hash},
         {"config", jc.resolved}};
  write_file(out / "normconst.json", j.dump(2) + "\n");
  return {kExitOk, json{{"C_stat", C}}};
}

/// Long format: D, n, quantity (Lambda | u), m, value.
inline CommandOutcome cmd_converge(const JobConfig& jc, const fs::path& out) {
  if (jc.converge.D.empty() || jc.converge.n.empty()) throw ConfigError("converge needs non-empty n and D lists");
  const auto rows = convergence_table(jc.model, jc.converge.n, jc.converge.D, jc.converge.m, jc.assembly);
  CsvText csv;
  csv.header({"D", "n", "quantity", "m", "value"});
  for (const auto& r : rows) {
    csv.row({std::to_string(r.D), std::to_string(r.n), "Lambda", "", format_double(r.Lambda)});
    for (const auto& [m, u] : r.u)
      csv.row({std::to_string(r.D), std::to_string(r.n), "u", "\"" + m.str() + "\"", format_double(u)});
  }
  write_file(out / "converge.csv", csv.str());
  json meta = detail::base_metadata("converge", jc);
  meta["files"] = {"converge.csv"};
  detail::write_metadata(out, meta);
  return {kExitOk, json{{"rows", rows.size()}}};
}

inline CommandOutcome cmd_distance(const JobConfig& jc, const fs::path& out) {
  if (jc.times.empty()) throw ConfigError("distance needs at least one time");
  const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
  const auto dist = distance_to_stationarity(sd, jc.x0, jc.times, jc.cutoffs);
  CsvText csv;
  csv.header({"t", "distance"});
  for (std::size_t i = 0; i < dist.size(); ++i) csv.row(std::vector<double>{jc.times[i], dist[i]});
  write_file(out / "distance.csv", csv.str());
  json meta = detail::base_metadata("distance", jc);
  meta["files"] = {"distance.csv"};
  meta["precision"] = detail::precision_json(sd);
  meta["decomposition_hash"] = export_decomposition(sd).hash;
  detail::write_metadata(out, meta);
  return {kExitOk, json{{"points", dist.size()}}};
}

inline const std::vector<std::string>& validation_suites() {
  static const std::vector<std::string> s{"q", "orthogonality", "neutral", "mc", "chapman"};
  return s;
}

/// A failed check exits with the numerical-failure code.
inline CommandOutcome cmd_validate(const JobConfig& jc, const std::string& which, const fs::path& out) {
  const auto& v = jc.validate;
  ValidationReport rep;
  if (which == "q") {
    rep = validate_q(jc.seed, v.draws, v.points);
  } else if (which == "orthogonality") {
    rep = validate_orthogonality(jc.model.theta(), v.degree, v.resolution);
  } else if (which == "neutral") {
    rep = validate_neutral(jc.model.theta(), jc.truncation, v.t, jc.seed, v.pairs);
  } else if (which == "mc") {
    const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
    MCConfig mc;
    mc.N = jc.mc.N;
    mc.replicates = jc.mc.replicates;
    mc.seed = jc.seed;
    rep = validate_mc_moments(sd, jc.x0, jc.mc.t, jc.cutoffs, mc, jc.mc.resolution);
  } else if (which == "chapman") {
    const auto sd = decompose(jc.model, jc.truncation, jc.assembly);
    rep = validate_chapman(sd, v.s, v.t, v.pairs, jc.seed, v.resolution);
  } else {
    throw ConfigError("unknown validation suite '" + which + "'");
  }
  json j = rep.to_json();
  j["config"] = jc.resolved;
  write_file(out / ("validate_" + which + ".json"), j.dump(2) + "\n");
  return {rep.pass() ? kExitOk : kExitNumerical, rep.to_json()};
}

inline json error_json(const std::string& kind, const std::string& message) {
  return json{{"error", {{"kind", kind}, {"message", message}}}};
}

/// Runs one command, mapping exceptions to exit codes. Error JSON goes to err,
/// the summary JSON to out_stream.
inline int run_command(const std::string& command, const json& user_config, const std::vector<std::string>& overrides,
                       const fs::path& out, const std::string& which, std::ostream& out_stream, std::ostream& err) {
  try {
    json cfg = user_config;
    for (const auto& o : overrides) apply_override(cfg, o);
    const JobConfig jc = resolve_config(cfg);
    set_thread_limit(jc.threads);
    CommandOutcome r;
    if (command == "spectrum") r = cmd_spectrum(jc, out);
    else if (command == "density") r = cmd_density(jc, out, err);
    else if (command == "normconst") r = cmd_normconst(jc, out);
    else if (command == "converge") r = cmd_converge(jc, out);
    else if (command == "distance") r = cmd_distance(jc, out);
    else if (command == "validate") r = cmd_validate(jc, which, out);
    else throw ConfigError("unknown command '" + command + "'");
    out_stream << r.summary.dump() << '\n';
    return r.exit_code;
  } catch (const ConfigError& e) {
    err << error_json("config", e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const ParameterDomainError& e) {
    err << error_json("config", e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const json::exception& e) {
    err << error_json("config", e.what()).dump() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << error_json("numerical", e.what()).dump() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    err << error_json("numerical", e.what()).dump() << '\n';
    return kExitNumerical;
  }
}

}  // namespace wfspec
