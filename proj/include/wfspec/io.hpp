#pragma once

#include <openssl/evp.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "spectral.hpp"

namespace wfspec {

using json = nlohmann::json;

/// 17 significant digits round-trips every double.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Accumulates LF-terminated CSV text; '#' lines are header comments.
class CsvText {
 public:
  void comment(const std::string& line) { out_ << "# " << line << '\n'; }

  void header(const std::vector<std::string>& cols) { row(cols); }

  void row(const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
    out_ << '\n';
  }

  void row(const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << format_double(values[i]);
    out_ << '\n';
  }

  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open output file " + path.string());
  f << content;
  if (!f) throw NumericalError("failed writing " + path.string());
}

/// SHA-1 of "blob <size>\0<content>", i.e. what `git hash-object` prints.
inline std::string git_blob_hash(const std::string& content) {
  const std::string head = "blob " + std::to_string(content.size()) + '\0';
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw NumericalError("OpenSSL context allocation failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, head.data(), head.size()) == 1 &&
                  EVP_DigestUpdate(ctx, content.data(), content.size()) == 1 &&
                  EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw NumericalError("SHA-1 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

inline json model_to_json(const ModelParams& p) {
  return json{{"theta", p.theta()}, {"sigma", p.sigma_matrix()}};
}

/// {"theta": [...], "sigma": [[...]...] | null | "scale": s}; a missing sigma means neutral.
inline ModelParams model_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("model must be a JSON object");
  // a misspelled "sigma" would otherwise silently give a neutral model
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "theta" && it.key() != "sigma" && it.key() != "sigma_scale")
      throw ConfigError("unknown config key 'model." + it.key() + "'");
  if (!j.contains("theta") || !j["theta"].is_array()) throw ConfigError("model.theta must be an array");
  std::vector<double> theta;
  for (const auto& v : j["theta"]) {
    if (!v.is_number()) throw ConfigError("model.theta entries must be numbers");
    theta.push_back(v.get<double>());
  }
  if (theta.size() < 2) throw ConfigError("model.theta needs K >= 2 entries");
  for (double t : theta)
    if (!(t > 0)) throw ConfigError("model.theta entries must be positive");
  const std::size_t K = theta.size();
  std::vector<std::vector<double>> sigma(K, std::vector<double>(K, 0.0));
  if (j.contains("sigma") && !j["sigma"].is_null()) {
    const auto& s = j["sigma"];
    if (!s.is_array() || s.size() != K) throw ConfigError("model.sigma must be a K x K array");
    for (std::size_t i = 0; i < K; ++i) {
      if (!s[i].is_array() || s[i].size() != K) throw ConfigError("model.sigma must be a K x K array");
      for (std::size_t k = 0; k < K; ++k) {
        if (!s[i][k].is_number()) throw ConfigError("model.sigma entries must be numbers");
        sigma[i][k] = s[i][k].get<double>();
      }
    }
  }
  double scale = 1;
  if (j.contains("sigma_scale")) {
    if (!j["sigma_scale"].is_number()) throw ConfigError("model.sigma_scale must be a number");
    scale = j["sigma_scale"].get<double>();
  }
  for (auto& r : sigma)
    for (auto& v : r) v *= scale;
  return ModelParams(std::move(theta), std::move(sigma));
}

/// Decomposition export: (n, Lambda, norm) and (n, m_tuple, u) tables.
struct DecompositionExport {
  std::string spectrum_csv;
  std::string coefficients_csv;
  std::string hash;  // git blob hash of spectrum_csv followed by coefficients_csv
};

inline DecompositionExport export_decomposition(const SpectralDecomposition& sd) {
  DecompositionExport e;
  CsvText spec;
  spec.header({"n", "Lambda", "norm"});
  for (std::size_t n = 0; n < sd.size(); ++n)
    spec.row({std::to_string(n), format_double(sd.eigenvalues(n)), format_double(sd.norm(n, sd.truncation))});
  std::string coef = "n,m,u\n";
  coef.reserve(sd.size() * sd.size() * 32);
  std::vector<std::string> labels;
  for (std::size_t m = 0; m < sd.size(); ++m) labels.push_back("\"" + (*sd.enumeration)[m].str() + "\"");
  for (std::size_t n = 0; n < sd.size(); ++n) {
    const std::string ns = std::to_string(n);
    for (std::size_t m = 0; m < sd.size(); ++m) {
      coef += ns;
      coef += ',';
      coef += labels[m];
      coef += ',';
      coef += format_double(sd.coefficients(n, m));
      coef += '\n';
    }
  }
  e.spectrum_csv = spec.str();
  e.coefficients_csv = std::move(coef);
  e.hash = git_blob_hash(e.spectrum_csv + e.coefficients_csv);
  return e;
}

}  // namespace wfspec
