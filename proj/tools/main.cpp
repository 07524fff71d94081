#include <iostream>

#include <CLI11.hpp>

#include "app/commands.hpp"
#include "geosched/schedule_optimizer.hpp"
#include "geosched/trainer.hpp"

namespace {

constexpr int kConfigError = 2;
constexpr int kNumericalError = 3;

}  // namespace

int main(int argc, char** argv) {
  using namespace geosched;

  CLI::App cli{"Score-optimal discretisation schedules for diffusion models"};
  cli.set_version_flag("--version", app::version());
  cli.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out_dir;
  long seed = -1;
  for (const auto& name : app::command_names()) {
    CLI::App* sub = cli.add_subcommand(name);
    sub->add_option("--config", config_path, "INI file with [section] key = value overrides")->check(CLI::ExistingFile);
    sub->add_option("--preset", preset, "Named starting configuration")
        ->check(CLI::IsMember(app::Config::preset_names()));
    sub->add_option("--out", out_dir, "Output directory (default out/<command>)");
    sub->add_option("--seed", seed, "Overrides run.seed")->check(CLI::NonNegativeNumber);
  }

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = cli.exit(e);
    return code == 0 ? 0 : kConfigError;
  }

  const std::string command = cli.get_subcommands().front()->get_name();
  try {
    app::Config cfg = app::Config::defaults();
    if (!preset.empty()) cfg.apply_preset(preset);
    if (!config_path.empty()) cfg.merge_ini(config_path);
    if (seed >= 0) cfg.set("run.seed", std::to_string(seed));
    app::run_command(command, cfg, out_dir.empty() ? "out/" + command : out_dir, std::cout);
  } catch (const app::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const FlatPathError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::range_error& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
