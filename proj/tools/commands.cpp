#include "commands.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "phaselab/measure.hpp"
#include "phaselab/metrics.hpp"
#include "phaselab/parallel.hpp"
#include "phaselab/pipeline.hpp"
#include "phaselab/rng.hpp"

namespace fs = std::filesystem;

namespace phaselab::cli {

namespace {

struct NamedImage {
  std::string id;
  ImagePlane image;
};

double now_seconds() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

std::string format_alpha(double alpha) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", alpha);
  return buf;
}

std::string measurement_filename(const std::string& id, double alpha) {
  return id + "_a" + format_alpha(alpha) + ".prmeas";
}

// One measurement seed per (corpus position, noise level); Monte-Carlo runs
// reuse it so only the initialization changes between runs.
std::uint64_t measurement_seed(std::uint64_t noise_seed, std::size_t image_index, double alpha) {
  const std::uint64_t alpha_bits = std::bit_cast<std::uint64_t>(alpha);
  return RngStream::derive(RngStream::derive(noise_seed, image_index), alpha_bits);
}

// Monte-Carlo run r shifts the trial seed block by a large stride so trial
// seeds (base + t) never collide across runs.
std::uint64_t run_base_seed(std::uint64_t base_seed, int run) {
  return base_seed + static_cast<std::uint64_t>(run) * 1000003ull;
}

void ensure_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw CliError("path", "cannot create directory " + dir + ": " + ec.message());
}

std::vector<NamedImage> load_corpus_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw CliError("path", "corpus directory not found: " + dir);
  std::vector<NamedImage> corpus;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".pgm")
      corpus.push_back({entry.path().stem().string(), load_pgm(entry.path().string())});
  }
  if (corpus.empty()) throw CliError("path", "no .pgm images in corpus directory " + dir);
  std::sort(corpus.begin(), corpus.end(),
            [](const NamedImage& a, const NamedImage& b) { return a.id < b.id; });
  const int n = corpus.front().image.n;
  for (const NamedImage& item : corpus)
    if (item.image.n != n)
      throw CliError("validation", "corpus images have mixed sides in " + dir);
  return corpus;
}

std::vector<NamedImage> corpus_or_generate(const RunConfig& config) {
  if (fs::is_directory(config.corpus_dir)) {
    bool any = false;
    for (const auto& entry : fs::directory_iterator(config.corpus_dir))
      if (entry.path().extension() == ".pgm") any = true;
    if (any) return load_corpus_dir(config.corpus_dir);
  }
  cmd_generate_corpus(config);
  return load_corpus_dir(config.corpus_dir);
}

int grid_side(const RunConfig& config, int n) {
  return config.grid_m > 0 ? config.grid_m : 2 * n;
}

void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw CliError("path", "cannot open " + path + " for writing");
  os << j.dump(2) << "\n";
  if (!os) throw CliError("path", "write failed for " + path);
}

MagnitudeMeasurement measurement_for(const RunConfig& config, const NamedImage& item,
                                     std::size_t image_index, double alpha, int m) {
  const fs::path file = fs::path(config.measurement_dir) / measurement_filename(item.id, alpha);
  if (fs::exists(file)) {
    MagnitudeMeasurement meas = load_measurement(file.string());
    if (meas.m != m)
      throw CliError("validation", "measurement " + file.string() + " has grid side " +
                                       std::to_string(meas.m) + ", expected " + std::to_string(m));
    return meas;
  }
  return simulate(item.image, m,
                  {alpha, measurement_seed(config.noise_seed, image_index, alpha)});
}

RefinerWeights load_weights_checked(const std::string& path, const char* which) {
  if (!fs::exists(path))
    throw CliError("path", std::string(which) + " weights file not found: " + path);
  try {
    return load_weights(path);
  } catch (const std::exception& e) {
    throw CliError("format", e.what());
  }
}

nlohmann::json quality_json(const ImagePlane& recon, const ImagePlane& truth) {
  const QualityScore reg = score_registered(recon, truth);
  return {{"psnr_registered", reg.psnr_db}, {"ssim_registered", reg.ssim},
          {"psnr_raw", psnr(recon, truth)}, {"ssim_raw", ssim(recon, truth)},
          {"shift_dx", reg.dx},             {"shift_dy", reg.dy},
          {"flipped", reg.flipped}};
}

}  // namespace

void cmd_generate_corpus(const RunConfig& config) {
  std::vector<ImagePlane> images;
  try {
    images = generate_corpus(config.corpus);
  } catch (const std::invalid_argument& e) {
    throw CliError("config", e.what());
  }
  ensure_dir(config.corpus_dir);
  nlohmann::json files = nlohmann::json::array();
  for (std::size_t i = 0; i < images.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof(name), "img_%04zu.pgm", i);
    save_pgm(images[i], (fs::path(config.corpus_dir) / name).string());
    files.push_back(name);
  }
  write_json(
      {{"count", config.corpus.count},
       {"side", config.corpus.n},
       {"style", to_string(config.corpus.style)},
       {"seed", config.corpus.seed},
       {"files", files}},
      (fs::path(config.corpus_dir) / "manifest.json").string());
  std::cout << "wrote " << images.size() << " images to " << config.corpus_dir << "\n";
}

void cmd_simulate(const RunConfig& config) {
  const std::vector<NamedImage> corpus = corpus_or_generate(config);
  const int m = grid_side(config, corpus.front().image.n);
  ensure_dir(config.measurement_dir);

  nlohmann::json manifest = nlohmann::json::array();
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    for (double alpha : config.alphas) {
      const MagnitudeMeasurement meas =
          simulate(corpus[i].image, m,
                   {alpha, measurement_seed(config.noise_seed, i, alpha)});
      const std::string name = measurement_filename(corpus[i].id, alpha);
      save_measurement(meas, (fs::path(config.measurement_dir) / name).string());
      manifest.push_back({{"file", name},
                          {"image_id", corpus[i].id},
                          {"alpha", alpha},
                          {"m", m},
                          {"snr_db", meas.measured_snr_db},
                          {"clamped_fraction", meas.clamped_fraction}});
    }
  }
  write_json({{"measurements", manifest}},
             (fs::path(config.measurement_dir) / "manifest.json").string());
  std::cout << "wrote " << manifest.size() << " measurements to " << config.measurement_dir
            << "\n";
}

void cmd_train(const RunConfig& config) {
  const std::vector<NamedImage> corpus = load_corpus_dir(config.corpus_dir);
  const int n = corpus.front().image.n;
  const int m = grid_side(config, n);

  // Stage A inputs: reconstructions at the output of the initialization
  // stage, aligned to the truth so the pairs share one orientation.
  std::vector<PaddedField> init_fields(corpus.size());
  std::vector<TrainingPair> stage_a(corpus.size());
  parallel_for(corpus.size(), config.threads, [&](std::size_t i) {
    const MagnitudeMeasurement y = measurement_for(config, corpus[i], i, config.train_alpha, m);
    InitResult init = multi_start(y, n, config.init, 1);
    stage_a[i] = {register_image(crop(init.field, n), corpus[i].image).aligned,
                  corpus[i].image};
    init_fields[i] = std::move(init.field);
  });
  double stage_a_psnr = 0.0;
  for (const TrainingPair& pair : stage_a)
    stage_a_psnr += score_registered(pair.first, pair.second).psnr_db;
  stage_a_psnr /= static_cast<double>(stage_a.size());
  std::cout << "stage A: " << stage_a.size() << " pairs, mean registered PSNR "
            << stage_a_psnr << " dB\n";

  TrainResult r1;
  try {
    r1 = train(stage_a, config.arch, config.train, config.threads);
  } catch (const std::runtime_error& e) {
    throw CliError("training", e.what());
  }
  r1.weights.meta.note = "refiner1";
  ensure_dir(fs::path(config.weights_refiner1).parent_path().string());
  save_weights(r1.weights, config.weights_refiner1);
  write_json({{"epoch_loss", r1.epoch_loss}, {"input_mean_psnr_registered", stage_a_psnr}},
             config.weights_refiner1 + ".loss.json");
  std::cout << "refiner1: loss " << r1.epoch_loss.front() << " -> " << r1.epoch_loss.back()
            << " over " << r1.epoch_loss.size() << " epochs\n";

  // Stage B inputs: reconstructions at the output of the iterative stage.
  const RefinerFn refiner1 = cnn_refiner(r1.weights);
  std::vector<TrainingPair> stage_b(corpus.size());
  parallel_for(corpus.size(), config.threads, [&](std::size_t i) {
    const MagnitudeMeasurement y = measurement_for(config, corpus[i], i, config.train_alpha, m);
    const SupportMask support = SupportMask::top_left(n, m);
    const IterativeResult inter =
        iterative_stage(y, init_fields[i], refiner1, config.loop, config.hio, support);
    stage_b[i] = {register_image(crop(inter.field, n), corpus[i].image).aligned,
                  corpus[i].image};
  });
  double stage_b_psnr = 0.0;
  for (const TrainingPair& pair : stage_b)
    stage_b_psnr += score_registered(pair.first, pair.second).psnr_db;
  stage_b_psnr /= static_cast<double>(stage_b.size());
  std::cout << "stage B: " << stage_b.size() << " pairs, mean registered PSNR "
            << stage_b_psnr << " dB\n";

  // refiner-2 polishes mostly-clean intermediates; a zero final layer makes
  // it start as the exact identity and deviate only where the loss asks
  RefinerWeights start2 = init_weights(config.arch, config.train2.seed);
  for (double& w : start2.layers.back().kernel) w = 0.0;
  TrainResult r2;
  try {
    r2 = train(stage_b, config.arch, config.train2, config.threads, &start2);
  } catch (const std::runtime_error& e) {
    throw CliError("training", e.what());
  }
  r2.weights.meta.note = "refiner2";
  ensure_dir(fs::path(config.weights_refiner2).parent_path().string());
  save_weights(r2.weights, config.weights_refiner2);
  write_json({{"epoch_loss", r2.epoch_loss}, {"input_mean_psnr_registered", stage_b_psnr}},
             config.weights_refiner2 + ".loss.json");
  std::cout << "refiner2: loss " << r2.epoch_loss.front() << " -> " << r2.epoch_loss.back()
            << " over " << r2.epoch_loss.size() << " epochs\n";
}

void cmd_reconstruct(const RunConfig& config) {
  MagnitudeMeasurement y;
  int n = 0;
  ImagePlane truth;
  bool have_truth = false;

  if (!config.reconstruct_measurement.empty()) {
    if (!fs::exists(config.reconstruct_measurement))
      throw CliError("path", "measurement file not found: " + config.reconstruct_measurement);
    y = load_measurement(config.reconstruct_measurement);
    n = y.m / 2;
    if (!config.reconstruct_truth.empty()) {
      truth = load_pgm(config.reconstruct_truth);
      have_truth = true;
      n = truth.n;
    }
  } else if (!config.reconstruct_image.empty()) {
    if (!fs::exists(config.reconstruct_image))
      throw CliError("path", "image file not found: " + config.reconstruct_image);
    truth = load_pgm(config.reconstruct_image);
    have_truth = true;
    n = truth.n;
    y = simulate(truth, grid_side(config, n),
                 {config.reconstruct_alpha, RngStream::derive(config.noise_seed, 0)});
  } else {
    throw CliError("config", "reconstruct needs reconstruct.image or reconstruct.measurement");
  }

  RefinerFn refiner1 = identity_refiner();
  RefinerFn refiner2 = identity_refiner();
  bool trained = false;
  if (fs::exists(config.weights_refiner1) && fs::exists(config.weights_refiner2)) {
    refiner1 = cnn_refiner(load_weights_checked(config.weights_refiner1, "refiner1"));
    refiner2 = cnn_refiner(load_weights_checked(config.weights_refiner2, "refiner2"));
    trained = true;
  }

  const PipelineResult result = full_pipeline(y, n, config.init, refiner1, refiner2,
                                              config.loop, config.hio, config.threads);

  ensure_dir(config.out_dir);
  const fs::path out(config.out_dir);
  save_pgm(result.init_recon, (out / "init.pgm").string());
  save_pgm(result.intermediate_hio_recon, (out / "intermediate.pgm").string());
  save_pgm(result.final_recon, (out / "final.pgm").string());

  nlohmann::json j = {
      {"images",
       {{"init", "init.pgm"}, {"intermediate", "intermediate.pgm"}, {"final", "final.pgm"}}},
      {"cycle_count", result.cycle_count},
      {"relative_changes", result.relative_changes},
      {"degenerate", result.degenerate},
      {"selected_trial", result.selected_trial},
      {"selected_residual", result.selected_residual},
      {"seconds", {{"init", result.init_seconds},
                   {"iterative", result.iterative_seconds},
                   {"final", result.final_seconds}}},
      {"trained_refiners", trained},
      {"params",
       {{"m_starts", config.init.m_starts},
        {"s_iters", config.init.s_iters},
        {"n_iters", config.init.n_iters},
        {"t_iters", config.loop.t_iters},
        {"tol", config.loop.tol},
        {"max_cycles", config.loop.max_cycles},
        {"beta", config.hio.beta},
        {"alpha", y.alpha_used},
        {"m", y.m},
        {"n", n},
        {"init_base_seed", config.init.base_seed}}}};
  if (have_truth && truth.n == n) {
    j["quality"] = {{"init", quality_json(result.init_recon, truth)},
                    {"intermediate", quality_json(result.intermediate_hio_recon, truth)},
                    {"final", quality_json(result.final_recon, truth)}};
  }
  write_json(j, (out / "result.json").string());
  std::cout << "wrote reconstruction stages to " << config.out_dir << " (cycles: "
            << result.cycle_count << ")\n";
}

void cmd_benchmark(const RunConfig& config) {
  const std::vector<NamedImage> corpus = load_corpus_dir(config.corpus_dir);
  const int n = corpus.front().image.n;
  const int m = grid_side(config, n);

  const bool needs_refiners =
      std::any_of(config.methods.begin(), config.methods.end(),
                  [](const std::string& method) { return method != "hio"; });
  std::string missing;
  if (needs_refiners) {
    if (!fs::exists(config.weights_refiner1))
      missing += " refiner1(" + config.weights_refiner1 + ")";
    if (!fs::exists(config.weights_refiner2))
      missing += " refiner2(" + config.weights_refiner2 + ")";
  }
  if (!missing.empty())
    throw CliError("path", "methods " + nlohmann::json(config.methods).dump() +
                               " need missing weights:" + missing);

  RefinerWeights w1, w2;
  RefinerFn refiner1 = identity_refiner();
  RefinerFn refiner2 = identity_refiner();
  if (needs_refiners) {
    w1 = load_weights_checked(config.weights_refiner1, "refiner1");
    w2 = load_weights_checked(config.weights_refiner2, "refiner2");
    refiner1 = cnn_refiner(w1);
    refiner2 = cnn_refiner(w2);
  }

  const std::size_t tasks = corpus.size() * static_cast<std::size_t>(config.mc_runs);
  std::vector<std::vector<BenchRecord>> slots(tasks);
  parallel_for(tasks, config.threads, [&](std::size_t task) {
    const std::size_t image_index = task / config.mc_runs;
    const int run = static_cast<int>(task % config.mc_runs);
    const NamedImage& item = corpus[image_index];

    InitParams init = config.init;
    init.base_seed = run_base_seed(config.init.base_seed, run);

    for (double alpha : config.alphas) {
      const MagnitudeMeasurement y = measurement_for(config, item, image_index, alpha, m);
      const PipelineResult res =
          full_pipeline(y, n, init, refiner1, refiner2, config.loop, config.hio, 1);

      double dnn1_seconds = 0.0;
      ImagePlane dnn1_recon;
      const bool want_dnn1 = std::find(config.methods.begin(), config.methods.end(), "dnn1") !=
                             config.methods.end();
      if (want_dnn1) {
        const double t0 = now_seconds();
        dnn1_recon = refiner1(res.init_recon);
        dnn1_seconds = now_seconds() - t0;
      }

      for (const std::string& method : config.methods) {
        const ImagePlane* recon = nullptr;
        double runtime = 0.0;
        if (method == "hio") {
          recon = &res.init_recon;
          runtime = res.init_seconds;
        } else if (method == "dnn1") {
          recon = &dnn1_recon;
          runtime = res.init_seconds + dnn1_seconds;
        } else if (method == "iterative") {
          recon = &res.intermediate_hio_recon;
          runtime = res.init_seconds + res.iterative_seconds;
        } else {
          recon = &res.final_recon;
          runtime = res.init_seconds + res.iterative_seconds + res.final_seconds;
        }
        const QualityScore reg = score_registered(*recon, item.image);
        BenchRecord record;
        record.image_id = item.id;
        record.run = run;
        record.method = method;
        record.alpha = alpha;
        record.psnr_registered = reg.psnr_db;
        record.ssim_registered = reg.ssim;
        record.psnr_raw = psnr(*recon, item.image);
        record.ssim_raw = ssim(*recon, item.image);
        record.residual = residual(embed(*recon, m), y);
        record.runtime_s = config.measure_runtime ? runtime : 0.0;
        slots[task].push_back(std::move(record));
      }
    }
  });

  BenchReport report;
  for (const std::vector<BenchRecord>& slot : slots)
    report.rows.insert(report.rows.end(), slot.begin(), slot.end());
  write_report(report, config.report_dir);
  std::cout << "wrote " << report.rows.size() << " rows to " << config.report_dir << "\n";
}

void cmd_analyze_filters(const RunConfig& config) {
  std::vector<std::string> weight_files = config.analyze_weights;
  if (weight_files.empty())
    weight_files = {config.weights_refiner1, config.weights_refiner2};

  ensure_dir(config.out_dir);
  const fs::path out(config.out_dir);
  std::ofstream csv((out / "lowpass_scores.csv").string());
  if (!csv) throw CliError("path", "cannot open lowpass_scores.csv for writing");
  csv << "refiner,filter,low_pass_score\n";

  for (const std::string& path : weight_files) {
    const RefinerWeights weights = load_weights_checked(path, "analyze");
    const std::string stem = fs::path(path).stem().string();
    const std::vector<FilterResponse> responses = filter_frequency_response(weights, 0);
    const int g = FilterResponse::kGridSide;
    for (std::size_t f = 0; f < responses.size(); ++f) {
      // write the magnitude DC-centered and scaled to the PGM range
      double peak = 0.0;
      for (double v : responses[f].magnitude) peak = std::max(peak, v);
      ImagePlane img = ImagePlane::zeros(g);
      for (int u = 0; u < g; ++u)
        for (int v = 0; v < g; ++v) {
          const int su = (u + g / 2) % g;
          const int sv = (v + g / 2) % g;
          const double mag = responses[f].magnitude[static_cast<std::size_t>(u) * g + v];
          img.at(su, sv) = peak == 0.0 ? 0.0 : 255.0 * mag / peak;
        }
      char name[128];
      std::snprintf(name, sizeof(name), "%s_filter_%02zu.pgm", stem.c_str(), f);
      save_pgm(img, (out / name).string());
      char row[160];
      std::snprintf(row, sizeof(row), "%s,%zu,%.6f\n", stem.c_str(), f,
                    responses[f].low_pass_score);
      csv << row;
    }
    std::cout << stem << ": " << responses.size() << " filters analyzed\n";
  }
  if (!csv) throw CliError("path", "write failed for lowpass_scores.csv");
}

}  // namespace phaselab::cli
