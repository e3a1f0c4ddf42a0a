// Command-line front end: cda run|validate|sweep <config>
#include <CLI11.hpp>

#include <iostream>

#include "cda/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Continuous data assimilation for miscible displacement"};
  app.require_subcommand(1);
  std::string config;
  auto* run = app.add_subcommand("run", "reference + assimilated run, writes metrics.csv and report.txt");
  run->add_option("config", config, "run config file")->required();
  auto* validate = app.add_subcommand("validate", "check model assumptions, lattice alignment and stability proxy");
  validate->add_option("config", config, "run config file")->required();
  auto* sweep = app.add_subcommand("sweep", "assimilated runs over the [sweep] mu and hbar lists");
  sweep->add_option("config", config, "run config file")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = cda::load_run_config(config);
    if (run->parsed()) return cda::cmd_run(cfg);
    if (validate->parsed()) return cda::cmd_validate(cfg);
    if (sweep->parsed()) return cda::cmd_sweep(cfg);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
