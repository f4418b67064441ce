#include <iostream>

#include <CLI11.hpp>

#include "fracgelfand/commands.hpp"
#include "fracgelfand/parallel.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Discrete fractional p-Laplacian Gelfand problem experiments"};
  app.set_version_flag("--version", std::string(FRACGELFAND_VERSION));
  app.require_subcommand(1);
  int threads = 1;
  app.add_option("--threads", threads, "worker threads for row-parallel kernels")
      ->check(CLI::PositiveNumber);

  std::string config_path;
  for (const auto& name : fracgelfand::command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("config", config_path, "configuration file")->required();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : fracgelfand::exit_config;
  }

  fracgelfand::set_thread_count(threads);
  const std::string command = app.get_subcommands().front()->get_name();
  const auto outcome = fracgelfand::run_command(command, config_path);
  if (outcome.exit_code != fracgelfand::exit_ok) {
    std::cerr << "fracgelfand " << command << ": " << outcome.message << "\n";
    return outcome.exit_code;
  }
  for (const auto& f : outcome.files) std::cout << f << "\n";
  return 0;
}
