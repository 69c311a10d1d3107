#include <doctest.h>

#include <cstdlib>
#include <map>
#include <filesystem>
#include <fstream>

#include "commands.hpp"
#include "config.hpp"
#include "testutil.hpp"

using namespace phaselab;
using namespace phaselab::cli;
namespace fs = std::filesystem;

namespace {

RunConfig small_config(const testutil::TempDir& dir) {
  nlohmann::json j = default_config_json();
  j["seed"] = 77;
  j["threads"] = 2;
  j["corpus"] = {{"count", 4}, {"side", 32}, {"style", "rects"}, {"dir", dir.str("corpus")}};
  j["noise"]["alphas"] = {3.0};
  j["init"] = {{"m_starts", 3}, {"s_iters", 8}, {"n_iters", 40}};
  j["loop"] = {{"t_iters", 3}, {"tol", 1e-3}, {"max_cycles", 20}};
  j["train"]["epochs"] = 2;
  j["train"]["arch"] = {{"hidden_layers", 1}, {"channels", 3}, {"kernel", 3}};
  j["benchmark"] = {{"runs", 1},
                    {"methods", {"hio", "dnn1", "iterative", "developed"}},
                    {"measure_runtime", false}};
  j["paths"] = {{"measurement_dir", dir.str("meas")},
                {"weights_refiner1", dir.str("weights/r1.prwts")},
                {"weights_refiner2", dir.str("weights/r2.prwts")},
                {"report_dir", dir.str("report")},
                {"out_dir", dir.str("out")}};
  return resolve_config(j);
}

}  // namespace

TEST_SUITE_BEGIN("cli");

TEST_CASE("config defaults resolve and overrides apply") {
  nlohmann::json j = default_config_json();
  apply_override(j, "init.m_starts=50");
  apply_override(j, "corpus.style=rects");
  apply_override(j, "noise.alphas=[3]");
  apply_override(j, "benchmark.measure_runtime=false");
  const RunConfig rc = resolve_config(j);
  CHECK(rc.init.m_starts == 50);
  CHECK(rc.corpus.style == CorpusStyle::Rects);
  CHECK(rc.alphas == std::vector<double>{3.0});
  CHECK(!rc.measure_runtime);
  CHECK(rc.arch.size() == 5);
  CHECK(rc.arch.front().out_channels == 16);
  CHECK(rc.arch.back().out_channels == 1);

  CHECK_THROWS_AS(apply_override(j, "nonsense"), CliError);
  apply_override(j, "hio.variant=sart");
  CHECK_THROWS_AS(resolve_config(j), CliError);
}

TEST_CASE("PHASELAB_THREADS is the fallback for threads = 0") {
  nlohmann::json j = default_config_json();
  j["threads"] = 0;
  setenv("PHASELAB_THREADS", "3", 1);
  CHECK(resolve_config(j).threads == 3);
  unsetenv("PHASELAB_THREADS");
  CHECK(resolve_config(j).threads >= 1);
}

TEST_CASE("seeds derive from the master seed unless pinned") {
  nlohmann::json j = default_config_json();
  j["seed"] = 5;
  const RunConfig a = resolve_config(j);
  const RunConfig b = resolve_config(j);
  CHECK(a.noise_seed == b.noise_seed);
  CHECK(a.init.base_seed == b.init.base_seed);
  CHECK(a.noise_seed != a.init.base_seed);

  j["seed"] = 6;
  const RunConfig c = resolve_config(j);
  CHECK(c.noise_seed != a.noise_seed);

  j["noise"]["seed"] = 123;
  CHECK(resolve_config(j).noise_seed == 123);
}

TEST_CASE("load_config applies overrides, --threads and --seed") {
  const RunConfig base = load_config("", {"corpus.count=7"}, std::nullopt, std::nullopt);
  CHECK(base.corpus.count == 7);
  const RunConfig a = load_config("", {}, 2, 42);
  const RunConfig b = load_config("", {}, std::nullopt, 43);
  CHECK(a.threads == 2);
  CHECK(a.master_seed == 42);
  CHECK(a.noise_seed != b.noise_seed);
  CHECK(a.init.base_seed != b.init.base_seed);
}

TEST_CASE("simulate manifest mean SNR decreases with alpha") {
  testutil::TempDir dir;
  RunConfig rc = small_config(dir);
  rc.corpus.count = 20;
  rc.alphas = {2.0, 3.0, 4.0};
  cmd_generate_corpus(rc);
  cmd_simulate(rc);
  const auto manifest = nlohmann::json::parse(testutil::read_file(dir.str("meas/manifest.json")));
  std::map<double, std::pair<double, int>> by_alpha;
  for (const auto& row : manifest["measurements"]) {
    auto& [sum, count] = by_alpha[row["alpha"].get<double>()];
    sum += row["snr_db"].get<double>();
    ++count;
  }
  REQUIRE(by_alpha.size() == 3);
  CHECK(by_alpha[2.0].first / by_alpha[2.0].second > by_alpha[3.0].first / by_alpha[3.0].second);
  CHECK(by_alpha[3.0].first / by_alpha[3.0].second > by_alpha[4.0].first / by_alpha[4.0].second);
}

TEST_CASE("generate-corpus and simulate write their artifacts") {
  testutil::TempDir dir;
  const RunConfig rc = small_config(dir);

  cmd_generate_corpus(rc);
  CHECK(fs::exists(dir.str("corpus/img_0000.pgm")));
  CHECK(fs::exists(dir.str("corpus/img_0003.pgm")));
  CHECK(fs::exists(dir.str("corpus/manifest.json")));

  cmd_simulate(rc);
  CHECK(fs::exists(dir.str("meas/img_0000_a3.prmeas")));
  const auto manifest = nlohmann::json::parse(testutil::read_file(dir.str("meas/manifest.json")));
  CHECK(manifest["measurements"].size() == 4);  // 4 images x 1 alpha
  for (const auto& row : manifest["measurements"]) {
    CHECK(row["alpha"] == 3.0);
    CHECK(row["snr_db"].get<double>() > 0.0);
  }

  // rerun produces byte-identical measurement files
  const std::string before = testutil::read_file(dir.str("meas/img_0002_a3.prmeas"));
  cmd_simulate(rc);
  CHECK(testutil::read_file(dir.str("meas/img_0002_a3.prmeas")) == before);
}

TEST_CASE("train, benchmark, reconstruct and analyze round out the workflow") {
  testutil::TempDir dir;
  const RunConfig rc = small_config(dir);
  cmd_generate_corpus(rc);

  cmd_train(rc);
  CHECK(fs::exists(dir.str("weights/r1.prwts")));
  CHECK(fs::exists(dir.str("weights/r2.prwts")));
  const auto loss1 =
      nlohmann::json::parse(testutil::read_file(dir.str("weights/r1.prwts.loss.json")));
  CHECK(loss1["epoch_loss"].size() == 2);
  CHECK(std::isfinite(loss1["epoch_loss"][1].get<double>()));
  CHECK(loss1["input_mean_psnr_registered"].get<double>() > 0.0);

  cmd_benchmark(rc);
  const std::string csv = testutil::read_file(dir.str("report/report.csv"));
  // 4 images x 1 run x 4 methods x 1 alpha + header
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 17);
  for (const char* method : {",hio,", ",dnn1,", ",iterative,", ",developed,"})
    CHECK(csv.find(method) != std::string::npos);

  // benchmark determinism across reruns and thread counts
  RunConfig rc4 = rc;
  rc4.threads = 4;
  cmd_benchmark(rc4);
  CHECK(testutil::read_file(dir.str("report/report.csv")) == csv);

  RunConfig recon = rc;
  recon.reconstruct_measurement = dir.str("meas2/img_0001_a3.prmeas");
  RunConfig sim2 = rc;
  sim2.measurement_dir = dir.str("meas2");
  cmd_simulate(sim2);
  recon.reconstruct_truth = dir.str("corpus/img_0001.pgm");
  recon.init.m_starts = 2;
  cmd_reconstruct(recon);
  CHECK(fs::exists(dir.str("out/init.pgm")));
  CHECK(fs::exists(dir.str("out/intermediate.pgm")));
  CHECK(fs::exists(dir.str("out/final.pgm")));
  const auto result = nlohmann::json::parse(testutil::read_file(dir.str("out/result.json")));
  CHECK(result["params"]["m_starts"] == 2);
  CHECK(result["params"]["s_iters"] == 8);
  CHECK(result["params"]["n_iters"] == 40);
  CHECK(result["params"]["t_iters"] == 3);
  CHECK(result["params"]["tol"] == 1e-3);
  CHECK(result["quality"].contains("final"));

  cmd_analyze_filters(rc);
  CHECK(fs::exists(dir.str("out/r1_filter_00.pgm")));
  CHECK(fs::exists(dir.str("out/r2_filter_02.pgm")));
  const std::string scores = testutil::read_file(dir.str("out/lowpass_scores.csv"));
  // header + 3 filters per refiner
  CHECK(std::count(scores.begin(), scores.end(), '\n') == 7);
}

TEST_CASE("reconstruct echoes the full-protocol parameters verbatim") {
  testutil::TempDir dir;
  RunConfig rc = small_config(dir);
  rc.corpus.count = 1;
  cmd_generate_corpus(rc);
  rc.reconstruct_image = dir.str("corpus/img_0000.pgm");
  rc.reconstruct_alpha = 0.0;
  rc.init.m_starts = 50;
  rc.init.s_iters = 50;
  rc.init.n_iters = 1000;
  rc.loop.t_iters = 5;
  rc.loop.tol = 1e-3;
  cmd_reconstruct(rc);
  const auto result = nlohmann::json::parse(testutil::read_file(dir.str("out/result.json")));
  CHECK(result["params"]["m_starts"] == 50);
  CHECK(result["params"]["s_iters"] == 50);
  CHECK(result["params"]["n_iters"] == 1000);
  CHECK(result["params"]["t_iters"] == 5);
  CHECK(result["params"]["tol"] == 1e-3);
  CHECK(result["params"]["beta"] == 0.9);
}

TEST_CASE("a tiny training run produces decreasing loss logs for both refiners") {
  testutil::TempDir dir;
  RunConfig rc = small_config(dir);
  rc.corpus.count = 20;
  rc.corpus.style = CorpusStyle::Blobs;
  rc.train.epochs = 30;
  rc.train2.epochs = 30;
  rc.arch = default_arch();
  cmd_generate_corpus(rc);
  cmd_train(rc);
  for (const char* log : {"weights/r1.prwts.loss.json", "weights/r2.prwts.loss.json"}) {
    const auto loss = nlohmann::json::parse(testutil::read_file(dir.str(log)));
    const auto& epochs = loss["epoch_loss"];
    REQUIRE(epochs.size() == 30);
    CHECK(epochs[9].get<double>() < epochs[0].get<double>());
  }
}

TEST_CASE("missing inputs and invalid parameters fail with categories") {
  testutil::TempDir dir;
  RunConfig rc = small_config(dir);

  CHECK_THROWS_AS(cmd_train(rc), CliError);  // no corpus yet
  cmd_generate_corpus(rc);

  RunConfig zero_epochs = rc;
  zero_epochs.train.epochs = 0;
  CHECK_THROWS_AS(cmd_train(zero_epochs), std::invalid_argument);

  CHECK_THROWS_AS(cmd_benchmark(rc), CliError);  // weights missing

  RunConfig hio_only = rc;
  hio_only.methods = {"hio"};
  cmd_benchmark(hio_only);  // no weights needed for the baseline
  CHECK(fs::exists(dir.str("report/report.csv")));
}

TEST_CASE("the binary reports categorized errors and a clean exit") {
  testutil::TempDir dir;
  const std::string missing = dir.str("nope.json");
  const std::string cmd = std::string(PHASELAB_BIN) + " simulate --config " + missing +
                          " > " + dir.str("stdout.txt") + " 2> " + dir.str("stderr.txt");
  const int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  CHECK(WEXITSTATUS(status) == 1);
  const std::string err = testutil::read_file(dir.str("stderr.txt"));
  CHECK(err.rfind("error:path:", 0) == 0);

  const std::string ok_cmd = std::string(PHASELAB_BIN) + " generate-corpus --set corpus.count=2" +
                             " --set corpus.dir=" + dir.str("c2") + " > /dev/null 2>&1";
  const int ok_status = std::system(ok_cmd.c_str());
  REQUIRE(ok_status != -1);
  CHECK(WEXITSTATUS(ok_status) == 0);
  CHECK(fs::exists(dir.str("c2/img_0001.pgm")));
}

TEST_SUITE_END();
