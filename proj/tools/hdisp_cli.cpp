#include <iostream>

#include <CLI11.hpp>

#include "hdisp/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Dispersive kernels on the Heisenberg group: verification suites"};
  app.require_subcommand(1);

  hdisp::CliRequest req;
  std::string config, out;
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "INI file; defaults apply to missing keys")
        ->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides config and HDISP_OUT)");
    sub->add_option("--threads", req.threads, "OpenMP threads (0 keeps the default)")
        ->check(CLI::NonNegativeNumber);
    sub->add_option("--tol-scale", req.tol_scale, "multiply every tolerance")
        ->check(CLI::PositiveNumber);
  };
  for (const auto& name : hdisp::suite_names()) add_common(app.add_subcommand(name));
  add_common(app.add_subcommand("all", "every suite above"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  req.subcommand = app.get_subcommands().front()->get_name();
  if (!config.empty()) req.config_path = config;
  if (!out.empty()) req.out_dir = out;
  try {
    return hdisp::run_cli(req, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}
