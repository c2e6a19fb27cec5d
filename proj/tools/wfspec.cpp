#include <CLI11.hpp>

#include <iostream>
#include <utility>

#include <wfspec/cli.hpp>

int main(int argc, char** argv) {
  CLI::App app{"Spectral transition density of the K-allele Wright-Fisher diffusion"};
  app.require_subcommand(1);
  std::string config_path, out_dir = ".", which;
  std::vector<std::string> overrides;
  unsigned threads = 0;
  bool threads_set = false;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON job config");
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--set", overrides, "override a config field, dotted.path=value")->take_all();
    sub->add_option_function<unsigned>("--threads", [&](unsigned n) { threads = n; threads_set = true; },
                                       "worker thread cap (0 = all cores)");
  };
  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "eigenvalues and eigenvector coefficients of M"},
      {"density", "transition density on a grid, one CSV per time"},
      {"normconst", "normalizing constant of the stationary density"},
      {"converge", "Lambda_n and u_nm across truncation levels"},
      {"distance", "squared L2(1/Pi) distance to stationarity over time"}};
  for (const auto& [name, help] : commands) common(app.add_subcommand(name, help));
  auto* val = app.add_subcommand("validate", "run an oracle suite");
  common(val);
  val->add_option("which", which, "q | orthogonality | neutral | mc | chapman")
      ->required()
      ->check(CLI::IsMember(wfspec::validation_suites()));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << wfspec::error_json("usage", e.what()).dump() << '\n';
    return wfspec::kExitConfig;
  }

  wfspec::json cfg = wfspec::json::object();
  if (!config_path.empty()) {
    try {
      cfg = wfspec::read_json_file(config_path);
    } catch (const wfspec::ConfigError& e) {
      std::cerr << wfspec::error_json("config", e.what()).dump() << '\n';
      return wfspec::kExitConfig;
    }
  }
  if (threads_set) overrides.push_back("threads=" + std::to_string(threads));
  const std::string command = app.get_subcommands().front()->get_name();
  return wfspec::run_command(command, cfg, overrides, out_dir, which, std::cout, std::cerr);
}
