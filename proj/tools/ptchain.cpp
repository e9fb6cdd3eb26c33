#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ptchain/cookbook.hpp"
#include "ptchain/runner.hpp"

int main(int argc, char** argv) {
  using namespace ptchain;
  CLI::App app{"ptchain: non-Hermitian chain experiments"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("ptchain ") + kVersion);

  std::string config_path;
  int jobs = 0;
  auto* run = app.add_subcommand("run", "run an experiment config");
  run->add_option("config", config_path, "JSON config file")->required();
  run->add_option("--jobs", jobs, "cap on worker threads")->check(CLI::PositiveNumber);

  std::string fig_name, out_dir;
  int scale = 1;
  bool emit = false, list = false;
  auto* fig = app.add_subcommand("fig", "run a bundled figure config");
  fig->add_option("name", fig_name, "figure name");
  fig->add_option("--scale", scale, "divide lengths by k")->check(CLI::PositiveNumber);
  fig->add_option("--out", out_dir, "output directory");
  fig->add_option("--jobs", jobs, "cap on worker threads")->check(CLI::PositiveNumber);
  fig->add_flag("--emit-config", emit, "print the config and exit");
  fig->add_flag("--list", list, "list bundled names");

  auto* val = app.add_subcommand("validate", "check a config without running it");
  val->add_option("config", config_path, "JSON config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  if (*run) {
    const auto r = run_file(config_path, jobs);
    std::cout << r.manifest.dump(2) << "\n";
    return r.exit_code;
  }

  if (*fig) {
    if (list) {
      for (const auto& n : cookbook_names()) std::cout << n << "\n";
      return 0;
    }
    json cfg;
    try {
      cfg = figure_cookbook(fig_name, scale);
    } catch (const Error& e) {
      std::cerr << e.name() << ": " << e.what() << "\n";
      return kExitConfig;
    }
    if (!out_dir.empty()) cfg["output"]["dir"] = out_dir;
    if (emit) {
      std::cout << cfg.dump(2) << "\n";
      return 0;
    }
    const auto r = run_config(cfg, jobs, "fig:" + fig_name);
    std::cout << r.manifest.dump(2) << "\n";
    return r.exit_code;
  }

  if (*val) {
    try {
      parse_config(read_json_file(config_path));
    } catch (const Error& e) {
      std::cerr << e.name() << ": " << e.what() << "\n";
      return e.code() == ErrorCode::IoError ? kExitIo : kExitConfig;
    } catch (const json::exception& e) {
      std::cerr << "ConfigError: " << e.what() << "\n";
      return kExitConfig;
    }
    std::cout << "valid\n";
    return 0;
  }
  return kExitConfig;
}
