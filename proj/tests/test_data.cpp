#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "phaselab/data.hpp"
#include "testutil.hpp"

using namespace phaselab;

TEST_SUITE_BEGIN("data");

TEST_CASE("corpus generation is deterministic") {
  const CorpusSpec spec{5, 32, 77, CorpusStyle::Mixed};
  const std::vector<ImagePlane> a = generate_corpus(spec);
  const std::vector<ImagePlane> b = generate_corpus(spec);
  REQUIRE(a.size() == 5);
  CHECK(a == b);
}

TEST_CASE("rects style stays in range") {
  const std::vector<ImagePlane> corpus = generate_corpus({1, 32, 3, CorpusStyle::Rects});
  REQUIRE(corpus.size() == 1);
  for (double v : corpus[0].pixels) {
    CHECK(v >= 0.0);
    CHECK(v <= 255.0);
  }
}

TEST_CASE("a 100-image corpus has sane statistics") {
  const std::vector<ImagePlane> corpus = generate_corpus({100, 32, 9, CorpusStyle::Mixed});
  for (const ImagePlane& img : corpus) {
    double mean = 0.0;
    std::size_t nonzero = 0;
    for (double v : img.pixels) {
      mean += v;
      if (v > 0.0) ++nonzero;
    }
    mean /= static_cast<double>(img.pixels.size());
    CHECK(mean > 0.0);
    CHECK(nonzero >= img.pixels.size() / 10);
  }
  double corpus_mean = 0.0;
  for (const ImagePlane& img : corpus)
    for (double v : img.pixels) corpus_mean += v;
  corpus_mean /= 100.0 * 32.0 * 32.0;
  CHECK(corpus_mean > 10.0);
  CHECK(corpus_mean < 200.0);
}

TEST_CASE("corpus spec validation") {
  CHECK_THROWS_AS(generate_corpus({0, 32, 1, CorpusStyle::Mixed}), std::invalid_argument);
  CHECK_THROWS_AS(generate_corpus({1, 8, 1, CorpusStyle::Mixed}), std::invalid_argument);
  CHECK_THROWS_AS(corpus_style_from_string("squares"), std::invalid_argument);
}

TEST_CASE("pgm round trip is the identity on integer images") {
  testutil::TempDir dir;
  ImagePlane img = testutil::random_image(16, 5);
  for (double& v : img.pixels) v = std::floor(v);
  const std::string path = dir.str("img.pgm");
  save_pgm(img, path);
  CHECK(load_pgm(path) == img);
}

TEST_CASE("pgm save rounds half up") {
  testutil::TempDir dir;
  ImagePlane img = ImagePlane::zeros(16);
  img.pixels[0] = 1.5;
  img.pixels[1] = 2.5;
  img.pixels[2] = 0.49;
  img.pixels[3] = 254.6;
  const std::string path = dir.str("round.pgm");
  save_pgm(img, path);
  const ImagePlane loaded = load_pgm(path);
  CHECK(loaded.pixels[0] == 2.0);
  CHECK(loaded.pixels[1] == 3.0);
  CHECK(loaded.pixels[2] == 0.0);
  CHECK(loaded.pixels[3] == 255.0);
}

TEST_CASE("pgm loader rejects malformed files with distinct diagnostics") {
  testutil::TempDir dir;

  const std::string ascii = dir.str("ascii.pgm");
  std::ofstream(ascii) << "P2\n2 2\n255\n0 0 0 0\n";
  CHECK_THROWS_WITH_AS(load_pgm(ascii), doctest::Contains("magic"), std::runtime_error);

  const std::string deep = dir.str("deep.pgm");
  std::ofstream(deep) << "P5\n2 2\n65535\n" << std::string(8, '\0');
  CHECK_THROWS_WITH_AS(load_pgm(deep), doctest::Contains("maxval"), std::runtime_error);

  const std::string truncated = dir.str("short.pgm");
  std::ofstream(truncated) << "P5\n4 4\n255\n" << std::string(3, '\0');
  CHECK_THROWS_WITH_AS(load_pgm(truncated), doctest::Contains("truncated"),
                       std::runtime_error);

  const std::string rect = dir.str("rect.pgm");
  std::ofstream(rect) << "P5\n2 3\n255\n" << std::string(6, '\0');
  CHECK_THROWS_WITH_AS(load_pgm(rect), doctest::Contains("square"), std::runtime_error);

  const std::string garbled = dir.str("garbled.pgm");
  std::ofstream(garbled) << "P5\ntwo two\n255\n";
  CHECK_THROWS_AS(load_pgm(garbled), std::runtime_error);

  CHECK_THROWS_AS(load_pgm(dir.str("missing.pgm")), std::runtime_error);
}

TEST_CASE("pgm loader accepts comments in the header") {
  testutil::TempDir dir;
  const std::string path = dir.str("comment.pgm");
  std::ofstream(path) << "P5\n# a comment\n2 2\n255\n" << std::string(4, 'A');
  const ImagePlane img = load_pgm(path);
  CHECK(img.n == 2);
  CHECK(img.pixels[0] == 65.0);
}

TEST_CASE("write_report emits one CSV row per record and exact aggregates") {
  testutil::TempDir dir;
  BenchReport report;
  int id = 0;
  for (const char* image : {"img_a", "img_b"})
    for (const char* method : {"hio", "developed"}) {
      BenchRecord record;
      record.image_id = image;
      record.run = 0;
      record.method = method;
      record.alpha = 3.0;
      record.psnr_registered = 20.0 + id;
      record.ssim_registered = 0.5;
      record.psnr_raw = 19.0 + id;
      record.ssim_raw = 0.4;
      record.residual = 1.0;
      record.runtime_s = 0.25;
      report.rows.push_back(record);
      ++id;
    }

  write_report(report, dir.str());
  const std::string csv = testutil::read_file(dir.str("report.csv"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 5);  // header + 4 rows
  CHECK(csv.find("image_id,run,method,alpha,psnr_registered,ssim_registered,residual,"
                 "runtime_s\n") == 0);

  const auto aggregate = nlohmann::json::parse(testutil::read_file(dir.str("report.json")));
  REQUIRE(aggregate["aggregate"].size() == 2);
  for (const auto& group : aggregate["aggregate"]) {
    const double mean = group["mean_psnr_registered"].get<double>();
    if (group["method"] == "hio")  // rows 0 and 2
      CHECK(mean == doctest::Approx(21.0));
    else  // rows 1 and 3
      CHECK(mean == doctest::Approx(22.0));
    CHECK(group["count"] == 2);
  }

  CHECK_THROWS_AS(write_report(BenchReport{}, dir.str()), std::invalid_argument);
}

TEST_SUITE_END();
