#include <doctest.h>

#include <cstring>
#include <fstream>

#include "oracles.hpp"
#include "phaselab/data.hpp"
#include "phaselab/measure.hpp"
#include "phaselab/rng.hpp"
#include "testutil.hpp"

using namespace phaselab;

TEST_SUITE_BEGIN("measure");

TEST_CASE("alpha = 0 returns the exact oversampled magnitudes") {
  const ImagePlane img = testutil::random_image(8, 3);
  const MagnitudeMeasurement meas = simulate(img, 16, {0.0, 99});
  const PaddedField spectrum = forward_dft(embed(img, 16));
  for (std::size_t i = 0; i < meas.y.size(); ++i)
    CHECK(meas.y[i] == std::abs(spectrum.values[i]));
  CHECK(meas.clamped_fraction == 0.0);
}

TEST_CASE("an all-zero image measures all-zero at any alpha") {
  const ImagePlane img = ImagePlane::zeros(8);
  const MagnitudeMeasurement meas = simulate(img, 16, {4.0, 7});
  for (double v : meas.y) CHECK(v == 0.0);
}

TEST_CASE("simulate is deterministic and matches the frozen fixture") {
  RngStream rng(123);
  ImagePlane img = ImagePlane::zeros(8);
  for (double& v : img.pixels) v = 255.0 * rng.uniform();

  const MagnitudeMeasurement a = simulate(img, 16, {3.0, 42});
  const MagnitudeMeasurement b = simulate(img, 16, {3.0, 42});
  REQUIRE(a.y.size() == b.y.size());
  CHECK(std::memcmp(a.y.data(), b.y.data(), a.y.size() * sizeof(double)) == 0);

  // regression fixture, produced once and frozen
  const double expected[] = {8184.8073441313027, 5283.2869730444709, 291.16293625153691,
                             1819.3157851197648, 153.75284877711383, 1339.009635601187};
  for (int i = 0; i < 6; ++i)
    CHECK(a.y[i] == doctest::Approx(expected[i]).epsilon(1e-12));
  CHECK(a.y[100] == doctest::Approx(753.96062446446695).epsilon(1e-12));
  CHECK(a.y[255] == doctest::Approx(3543.2309504205082).epsilon(1e-12));
  double sum = 0.0;
  for (double v : a.y) sum += v;
  CHECK(sum == doctest::Approx(203204.35909865465).epsilon(1e-12));
  CHECK(a.measured_snr_db == doctest::Approx(32.637314422465259).epsilon(1e-9));
}

TEST_CASE("snr_db evaluates the norm ratio in dB") {
  std::vector<double> clean = {3.0, 4.0, 12.0, 5.0};
  std::vector<double> noisy = clean;
  for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += clean[i] / 10.0;
  CHECK(snr_db(clean, noisy) == doctest::Approx(10.0).epsilon(1e-12));

  CHECK(snr_db(clean, clean) == std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(snr_db(clean, std::vector<double>{1.0}), std::invalid_argument);
  CHECK_THROWS_AS(snr_db(std::vector<double>{0.0}, std::vector<double>{1.0}),
                  std::invalid_argument);
}

TEST_CASE("average SNR strictly decreases with alpha on a corpus") {
  const CorpusSpec spec{20, 32, 5, CorpusStyle::Mixed};
  const std::vector<ImagePlane> corpus = generate_corpus(spec);
  double previous = std::numeric_limits<double>::infinity();
  int alpha_index = 0;
  for (double alpha : {2.0, 3.0, 4.0}) {
    double mean = 0.0;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const MagnitudeMeasurement meas =
          simulate(corpus[i], 64, {alpha, RngStream::derive(17, i * 8 + alpha_index)});
      mean += meas.measured_snr_db;
    }
    mean /= static_cast<double>(corpus.size());
    CHECK(mean < previous);
    previous = mean;
    ++alpha_index;
  }
}

TEST_CASE("clamping rate is exposed, not hidden") {
  const ImagePlane img = testutil::random_image(8, 13);
  const MagnitudeMeasurement mild = simulate(img, 16, {3.0, 2});
  CHECK(mild.clamped_fraction >= 0.0);
  CHECK(std::isfinite(mild.clamped_fraction));
  const MagnitudeMeasurement harsh = simulate(img, 16, {50.0, 2});
  CHECK(harsh.clamped_fraction > 0.0);
}

TEST_CASE("measurement files round trip") {
  testutil::TempDir dir;
  const ImagePlane img = testutil::random_image(8, 23);
  const MagnitudeMeasurement meas = simulate(img, 16, {2.0, 11});
  const std::string path = dir.str("meas.prmeas");
  save_measurement(meas, path);
  const MagnitudeMeasurement loaded = load_measurement(path);
  CHECK(loaded.m == meas.m);
  CHECK(loaded.alpha_used == meas.alpha_used);
  CHECK(std::memcmp(loaded.y.data(), meas.y.data(), meas.y.size() * sizeof(double)) == 0);
  CHECK(std::isnan(loaded.clamped_fraction));

  std::ofstream bad(dir.str("bad.prmeas"), std::ios::binary);
  bad << "NOTMAGIC" << std::string(64, '\0');
  bad.close();
  CHECK_THROWS_WITH_AS(load_measurement(dir.str("bad.prmeas")),
                       doctest::Contains("magic"), std::runtime_error);
}

TEST_SUITE_END();
