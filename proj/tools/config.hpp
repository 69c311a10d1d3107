#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "phaselab/data.hpp"
#include "phaselab/initsel.hpp"
#include "phaselab/pipeline.hpp"
#include "phaselab/projections.hpp"
#include "phaselab/refiner.hpp"

namespace phaselab::cli {

/// Command failure with a machine-parseable category (config, path, format,
/// validation, training, internal).
class CliError : public std::runtime_error {
 public:
  CliError(std::string category, const std::string& message)
      : std::runtime_error(message), category_(std::move(category)) {}
  const std::string& category() const { return category_; }

 private:
  std::string category_;
};

/// Everything a command needs, resolved from one JSON config plus overrides.
/// Seeds omitted from the JSON are derived from the master seed, so one
/// `seed` value pins the whole experiment.
struct RunConfig {
  std::uint64_t master_seed = 1;
  int threads = 1;
  int grid_m = 0;  // 0 = use 2n

  CorpusSpec corpus;
  std::string corpus_dir = "corpus";

  std::vector<double> alphas = {2.0, 3.0, 4.0};
  std::uint64_t noise_seed = 0;

  HIOParams hio;
  InitParams init;
  LoopParams loop;

  TrainParams train;
  TrainParams train2;  // refiner-2 overrides; defaults to `train` with a derived seed
  double train_alpha = 3.0;
  ArchSpec arch;

  int mc_runs = 3;
  std::vector<std::string> methods = {"developed", "dnn1", "hio", "iterative"};
  bool measure_runtime = true;

  std::string measurement_dir = "measurements";
  std::string weights_refiner1 = "weights/refiner1.prwts";
  std::string weights_refiner2 = "weights/refiner2.prwts";
  std::string report_dir = "report";
  std::string out_dir = "out";

  std::string reconstruct_image;
  std::string reconstruct_measurement;
  std::string reconstruct_truth;
  double reconstruct_alpha = 3.0;

  std::vector<std::string> analyze_weights;  // defaults to both refiner files
};

nlohmann::json default_config_json();

/// Applies one dotted-path override, e.g. "init.m_starts=50" or
/// "benchmark.methods=[\"hio\"]". The value is parsed as JSON when possible,
/// as a string otherwise.
void apply_override(nlohmann::json& config, const std::string& assignment);

RunConfig resolve_config(const nlohmann::json& config);

/// Loads the config file (defaults when path is empty), applies --set
/// overrides in order, then --threads / --seed.
RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      std::optional<int> threads_override,
                      std::optional<std::uint64_t> seed_override);

}  // namespace phaselab::cli
