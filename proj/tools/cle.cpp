#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cle/experiment.hpp"

using namespace cle;

int main(int argc, char** argv) {
  CLI::App app{"CLE gasket simulation and verification toolkit"};
  std::string config_path;
  std::optional<std::string> seed_text;
  std::optional<unsigned> workers;
  std::optional<std::string> out_dir;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON configuration file")->required();
  app.add_option("--seed", seed_text, "master seed (overrides config and CLE_SEED)");
  app.add_option("--workers", workers, "worker threads, 0 = hardware concurrency");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--override", overrides, "key=value, repeatable; params.key selects a parameter");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  try {
    experiment::CliOverrides cli;
    if (seed_text) cli.seed = experiment::parse_seed_string(*seed_text);
    cli.workers = workers;
    if (out_dir) cli.output_dir = *out_dir;
    cli.overrides = overrides;
    const auto raw = experiment::json::parse(io::read_file(config_path), nullptr, false);
    if (raw.is_discarded()) throw ConfigError("configuration is not valid JSON: " + config_path);
    const auto cfg = experiment::resolve_config(raw, cli);
    const auto manifest = experiment::run(cfg);
    std::cout << manifest.document.dump(2) << "\n";
    return 0;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return experiment::exit_code(e.error_class());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
