#include "config.hpp"

#include <cstdlib>
#include <fstream>
#include <thread>

#include "phaselab/rng.hpp"

namespace phaselab::cli {

namespace {

// Seed derivation tags for config groups that omit an explicit seed.
enum : std::uint64_t { kCorpusTag = 1, kNoiseTag = 2, kInitTag = 3, kTrainTag = 4 };

Variant variant_from_string(const std::string& name) {
  if (name == "hio") return Variant::HIO;
  if (name == "er") return Variant::ER;
  throw CliError("config", "unknown projection variant: " + name);
}

ArchSpec arch_from_json(const nlohmann::json& arch) {
  const int hidden = arch.value("hidden_layers", 4);
  const int channels = arch.value("channels", 16);
  const int kernel = arch.value("kernel", 3);
  if (hidden < 0 || channels < 1 || kernel < 1 || kernel % 2 == 0)
    throw CliError("config", "invalid architecture (need hidden_layers >= 0, channels >= 1, odd kernel)");
  ArchSpec spec;
  for (int i = 0; i < hidden; ++i) spec.push_back({channels, kernel, kernel});
  spec.push_back({1, kernel, kernel});
  return spec;
}

}  // namespace

nlohmann::json default_config_json() {
  return nlohmann::json{
      {"seed", 1},
      {"threads", 0},
      {"corpus",
       {{"count", 30}, {"side", 32}, {"style", "mixed"}, {"dir", "corpus"}}},
      {"noise", {{"alphas", {2.0, 3.0, 4.0}}}},
      {"hio", {{"beta", 0.9}, {"variant", "hio"}}},
      {"init", {{"m_starts", 10}, {"s_iters", 20}, {"n_iters", 500}}},
      {"loop", {{"t_iters", 5}, {"tol", 1e-3}, {"max_cycles", 200}}},
      {"train",
       {{"learning_rate", 1e-2},
        {"momentum", 0.9},
        {"epochs", 150},
        {"batch_size", 8},
        {"alpha", 3.0},
        {"arch", {{"hidden_layers", 4}, {"channels", 16}, {"kernel", 3}}}}},
      {"benchmark",
       {{"runs", 3},
        {"methods", {"hio", "dnn1", "iterative", "developed"}},
        {"measure_runtime", true}}},
      {"paths",
       {{"measurement_dir", "measurements"},
        {"weights_refiner1", "weights/refiner1.prwts"},
        {"weights_refiner2", "weights/refiner2.prwts"},
        {"report_dir", "report"},
        {"out_dir", "out"}}},
      {"reconstruct", {{"image", ""}, {"measurement", ""}, {"truth", ""}, {"alpha", 3.0}}},
  };
}

void apply_override(nlohmann::json& config, const std::string& assignment) {
  const std::size_t eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw CliError("config", "--set expects key.path=value, got: " + assignment);
  std::string pointer = "/" + assignment.substr(0, eq);
  for (auto& c : pointer)
    if (c == '.') c = '/';
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::parse_error&) {
    value = raw;  // bare strings stay strings
  }
  try {
    config[nlohmann::json::json_pointer(pointer)] = value;
  } catch (const nlohmann::json::exception& e) {
    throw CliError("config", "cannot apply override " + assignment + ": " + e.what());
  }
}

RunConfig resolve_config(const nlohmann::json& config) {
  RunConfig rc;
  try {
    rc.master_seed = config.value("seed", std::uint64_t{1});
    rc.threads = config.value("threads", 0);
    rc.grid_m = config.value("grid_m", 0);
    if (rc.grid_m < 0) throw CliError("config", "grid_m must be >= 0");

    const auto corpus = config.value("corpus", nlohmann::json::object());
    rc.corpus.count = corpus.value("count", 30);
    rc.corpus.n = corpus.value("side", 32);
    rc.corpus.style = corpus_style_from_string(corpus.value("style", "mixed"));
    rc.corpus.seed = corpus.contains("seed") ? corpus["seed"].get<std::uint64_t>()
                                             : RngStream::derive(rc.master_seed, kCorpusTag);
    rc.corpus_dir = corpus.value("dir", "corpus");

    const auto noise = config.value("noise", nlohmann::json::object());
    rc.alphas = noise.value("alphas", std::vector<double>{2.0, 3.0, 4.0});
    rc.noise_seed = noise.contains("seed") ? noise["seed"].get<std::uint64_t>()
                                           : RngStream::derive(rc.master_seed, kNoiseTag);

    const auto hio = config.value("hio", nlohmann::json::object());
    rc.hio.beta = hio.value("beta", 0.9);
    rc.hio.variant = variant_from_string(hio.value("variant", "hio"));

    const auto init = config.value("init", nlohmann::json::object());
    rc.init.m_starts = init.value("m_starts", 10);
    rc.init.s_iters = init.value("s_iters", 20);
    rc.init.n_iters = init.value("n_iters", 500);
    rc.init.beta = rc.hio.beta;
    rc.init.base_seed = init.contains("base_seed") ? init["base_seed"].get<std::uint64_t>()
                                                   : RngStream::derive(rc.master_seed, kInitTag);

    const auto loop = config.value("loop", nlohmann::json::object());
    rc.loop.t_iters = loop.value("t_iters", 5);
    rc.loop.tol = loop.value("tol", 1e-3);
    rc.loop.max_cycles = loop.value("max_cycles", 200);

    const auto train = config.value("train", nlohmann::json::object());
    rc.train.learning_rate = train.value("learning_rate", 1e-2);
    rc.train.momentum = train.value("momentum", 0.9);
    rc.train.epochs = train.value("epochs", 150);
    rc.train.batch_size = train.value("batch_size", 8);
    rc.train.seed = train.contains("seed") ? train["seed"].get<std::uint64_t>()
                                           : RngStream::derive(rc.master_seed, kTrainTag);
    rc.train_alpha = train.value("alpha", 3.0);
    rc.arch = arch_from_json(train.value("arch", nlohmann::json::object()));

    rc.train2 = rc.train;
    rc.train2.seed = RngStream::derive(rc.train.seed, 2);
    rc.train2.learning_rate = train.value("learning_rate2", rc.train.learning_rate);
    rc.train2.epochs = train.value("epochs2", rc.train.epochs);

    const auto bench = config.value("benchmark", nlohmann::json::object());
    rc.mc_runs = bench.value("runs", 3);
    rc.methods = bench.value("methods",
                             std::vector<std::string>{"hio", "dnn1", "iterative", "developed"});
    rc.measure_runtime = bench.value("measure_runtime", true);

    const auto paths = config.value("paths", nlohmann::json::object());
    rc.measurement_dir = paths.value("measurement_dir", "measurements");
    rc.weights_refiner1 = paths.value("weights_refiner1", "weights/refiner1.prwts");
    rc.weights_refiner2 = paths.value("weights_refiner2", "weights/refiner2.prwts");
    rc.report_dir = paths.value("report_dir", "report");
    rc.out_dir = paths.value("out_dir", "out");

    const auto recon = config.value("reconstruct", nlohmann::json::object());
    rc.reconstruct_image = recon.value("image", "");
    rc.reconstruct_measurement = recon.value("measurement", "");
    rc.reconstruct_truth = recon.value("truth", "");
    rc.reconstruct_alpha = recon.value("alpha", 3.0);

    const auto analyze = config.value("analyze", nlohmann::json::object());
    rc.analyze_weights = analyze.value("weights", std::vector<std::string>{});
  } catch (const nlohmann::json::exception& e) {
    throw CliError("config", std::string("malformed config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw CliError("config", e.what());
  }

  if (rc.threads < 0) throw CliError("config", "threads must be >= 0");
  if (rc.threads == 0) {
    // PHASELAB_THREADS is the fallback before hardware detection
    if (const char* env = std::getenv("PHASELAB_THREADS")) {
      rc.threads = std::atoi(env);
    }
    if (rc.threads <= 0)
      rc.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  }
  if (rc.mc_runs < 1) throw CliError("config", "benchmark.runs must be >= 1");
  if (rc.alphas.empty()) throw CliError("config", "noise.alphas must be nonempty");
  for (double a : rc.alphas)
    if (a < 0.0) throw CliError("config", "noise alphas must be >= 0");
  for (const std::string& m : rc.methods)
    if (m != "hio" && m != "dnn1" && m != "iterative" && m != "developed")
      throw CliError("config", "unknown benchmark method: " + m);
  return rc;
}

RunConfig load_config(const std::string& path, const std::vector<std::string>& overrides,
                      std::optional<int> threads_override,
                      std::optional<std::uint64_t> seed_override) {
  nlohmann::json config = default_config_json();
  if (!path.empty()) {
    std::ifstream is(path);
    if (!is) throw CliError("path", "cannot open config file " + path);
    nlohmann::json from_file;
    try {
      is >> from_file;
    } catch (const nlohmann::json::parse_error& e) {
      throw CliError("config", "config file " + path + " is not valid JSON: " + e.what());
    }
    config.merge_patch(from_file);
  }
  for (const std::string& assignment : overrides) apply_override(config, assignment);
  if (seed_override) {
    config["seed"] = *seed_override;
    // force rederivation from the new master seed
    for (const char* group : {"corpus", "noise", "init", "train"}) {
      if (config.contains(group) && config[group].is_object()) {
        config[group].erase("seed");
        config[group].erase("base_seed");
      }
    }
  }
  if (threads_override) config["threads"] = *threads_override;
  return resolve_config(config);
}

}  // namespace phaselab::cli
