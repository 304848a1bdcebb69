#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "trmflow/experiment.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumerical = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TRM-based short-term traffic flux prediction"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output_override;
  std::uint64_t seed_override = 0;
  bool have_seed = false;

  const std::vector<std::string> commands = {"synth",    "simulate",      "train",         "predict",
                                             "evaluate", "gridsearch-np", "inspect-params"};
  for (const std::string& name : commands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("-c,--config", config_path, "experiment config (JSON)")->required();
    sub->add_option("-o,--out", output_override, "override the output directory");
    sub->add_option("-s,--seed", seed_override, "override the root seed")
        ->each([&](const std::string&) { have_seed = true; });
  }

  CLI11_PARSE(app, argc, argv);
  const std::string command = app.get_subcommands().front()->get_name();

  try {
    trm::ExperimentConfig cfg = trm::load_experiment_config(config_path);
    if (!output_override.empty()) cfg.output_dir = output_override;
    if (have_seed) cfg.seed = seed_override;
    trm::run_command(command, cfg, std::cout);
    return 0;
  } catch (const trm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const trm::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const trm::NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::domain_error& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
