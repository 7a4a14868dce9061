#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "nonholo/config.hpp"
#include "nonholo/errors.hpp"
#include "nonholo/experiment.hpp"

namespace ex = nonholo::experiment;

int main(int argc, char** argv) {
  CLI::App app{"Stochastic nonholonomic mechanics: simulation, ensembles and Fokker-Planck densities"};
  app.require_subcommand(1, 1);

  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;

  for (const char* name : {"simulate", "ensemble", "fokker-planck", "invariants", "compare-fp-mc", "order-study"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "experiment configuration file")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "master seed (overrides [integration] seed)");
    sub->add_option("--threads", threads, "worker threads for ensembles")->check(CLI::PositiveNumber);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  const std::string sub_name = app.get_subcommands().front()->get_name();
  const ex::Subcommand cmd = *ex::parse_subcommand(sub_name);

  nonholo::config::ExperimentConfig cfg;
  try {
    cfg = nonholo::config::load_config(config_path);
  } catch (const nonholo::Error& e) {
    std::cerr << "nonholo: " << config_path << ": " << e.what() << '\n';
    return 1;
  }

  const std::string dir = out_dir.value_or(cfg.output.directory);
  try {
    ex::run(cmd, cfg, {out_dir, seed, threads, &std::cout});
  } catch (const nonholo::Error& e) {
    std::cerr << "nonholo " << sub_name << ": " << e.what() << '\n';
    if (e.is_numerical()) {
      try {
        ex::write_error_report(dir, cmd, e);
      } catch (const std::exception& io) {
        std::cerr << "nonholo: could not write error report: " << io.what() << '\n';
      }
      return 2;
    }
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "nonholo " << sub_name << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
