#include <cstdint>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<int> threads;
  std::optional<std::uint64_t> seed;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "JSON config file");
  cmd->add_option("--set", args.overrides, "override a config field, key.path=value")
      ->take_all();
  cmd->add_option_function<int>(
      "--threads", [&args](int v) { args.threads = v; }, "worker threads (0 = auto)");
  cmd->add_option_function<std::uint64_t>(
      "--seed", [&args](std::uint64_t v) { args.seed = v; }, "master seed override");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"phaselab: Fourier phase retrieval with refiner-assisted HIO"};
  app.require_subcommand(1);

  CommonArgs args;
  using Command = void (*)(const phaselab::cli::RunConfig&);
  Command selected = nullptr;

  const std::vector<std::pair<const char*, std::pair<const char*, Command>>> commands = {
      {"generate-corpus",
       {"write a synthetic PGM corpus", &phaselab::cli::cmd_generate_corpus}},
      {"simulate", {"simulate noisy magnitude measurements", &phaselab::cli::cmd_simulate}},
      {"train", {"train both refiners on a corpus", &phaselab::cli::cmd_train}},
      {"reconstruct",
       {"run the three-stage pipeline on one image", &phaselab::cli::cmd_reconstruct}},
      {"benchmark", {"evaluate methods across the corpus", &phaselab::cli::cmd_benchmark}},
      {"analyze-filters",
       {"first-layer filter responses and low-pass scores", &phaselab::cli::cmd_analyze_filters}},
  };
  for (const auto& [name, desc_fn] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc_fn.first);
    add_common(sub, args);
    sub->callback([&selected, fn = desc_fn.second] { selected = fn; });
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const phaselab::cli::RunConfig config =
        phaselab::cli::load_config(args.config_path, args.overrides, args.threads, args.seed);
    selected(config);
  } catch (const phaselab::cli::CliError& e) {
    std::cerr << "error:" << e.category() << ": " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error:validation: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error:internal: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
