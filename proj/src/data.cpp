#include "phaselab/data.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <stdexcept>

#include <json.hpp>

#include "phaselab/rng.hpp"

namespace phaselab {

namespace {

void add_rect(ImagePlane& img, RngStream& rng) {
  const int n = img.n;
  const double amp = 30.0 + 225.0 * rng.uniform();
  const int x0 = static_cast<int>(rng.uniform() * n);
  const int y0 = static_cast<int>(rng.uniform() * n);
  const int w = 2 + static_cast<int>(rng.uniform() * (n / 2));
  const int h = 2 + static_cast<int>(rng.uniform() * (n / 2));
  for (int y = y0; y < std::min(n, y0 + h); ++y)
    for (int x = x0; x < std::min(n, x0 + w); ++x) img.at(y, x) += amp;
}

void add_blob(ImagePlane& img, RngStream& rng) {
  const int n = img.n;
  const double amp = 30.0 + 225.0 * rng.uniform();
  const double cx = rng.uniform() * n;
  const double cy = rng.uniform() * n;
  const double sigma = 2.0 + rng.uniform() * (n / 8.0);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      const double dx = x - cx, dy = y - cy;
      img.at(y, x) += amp * std::exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma));
    }
}

ImagePlane one_image(const CorpusSpec& spec, std::uint64_t stream_seed) {
  RngStream rng(stream_seed);
  ImagePlane img = ImagePlane::zeros(spec.n);
  // blob fields skew dense; sparse smooth scenes are degenerate for recovery
  const int shapes = spec.style == CorpusStyle::Blobs
                         ? 5 + static_cast<int>(rng.next_u64() % 4)
                         : 3 + static_cast<int>(rng.next_u64() % 6);
  for (int s = 0; s < shapes; ++s) {
    bool rect;
    switch (spec.style) {
      case CorpusStyle::Rects: rect = true; break;
      case CorpusStyle::Blobs: rect = false; break;
      default: rect = rng.uniform() < 0.5; break;
    }
    if (rect)
      add_rect(img, rng);
    else
      add_blob(img, rng);
  }
  for (double& v : img.pixels) v = std::clamp(v, 0.0, 255.0);
  return img;
}

double nonzero_fraction(const ImagePlane& img) {
  std::size_t nz = 0;
  for (double v : img.pixels)
    if (v > 0.0) ++nz;
  return static_cast<double>(nz) / static_cast<double>(img.pixels.size());
}

std::string format_double(double v, const char* fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

}  // namespace

CorpusStyle corpus_style_from_string(const std::string& name) {
  if (name == "blobs") return CorpusStyle::Blobs;
  if (name == "rects") return CorpusStyle::Rects;
  if (name == "mixed") return CorpusStyle::Mixed;
  throw std::invalid_argument("unknown corpus style: " + name);
}

std::string to_string(CorpusStyle style) {
  switch (style) {
    case CorpusStyle::Blobs: return "blobs";
    case CorpusStyle::Rects: return "rects";
    default: return "mixed";
  }
}

std::vector<ImagePlane> generate_corpus(const CorpusSpec& spec) {
  if (spec.count < 1) throw std::invalid_argument("corpus count must be >= 1");
  if (spec.n < 16) throw std::invalid_argument("corpus side must be >= 16");
  std::vector<ImagePlane> images;
  images.reserve(spec.count);
  for (int i = 0; i < spec.count; ++i) {
    // bump the substream until the density floor holds; bounded in practice
    for (std::uint64_t attempt = 0;; ++attempt) {
      const std::uint64_t stream =
          RngStream::derive(spec.seed, static_cast<std::uint64_t>(i) * 1000 + attempt);
      ImagePlane img = one_image(spec, stream);
      if (nonzero_fraction(img) >= 0.10) {
        images.push_back(std::move(img));
        break;
      }
      if (attempt > 64) throw std::runtime_error("corpus generation stalled");
    }
  }
  return images;
}

ImagePlane load_pgm(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);

  auto next_token = [&is, &path](const char* what) {
    std::string token;
    int c;
    while ((c = is.get()) != EOF) {
      if (c == '#') {
        while ((c = is.get()) != EOF && c != '\n') {
        }
        continue;
      }
      if (std::isspace(c)) {
        if (!token.empty()) break;
        continue;
      }
      token.push_back(static_cast<char>(c));
    }
    if (token.empty())
      throw std::runtime_error(std::string("malformed PGM header (missing ") + what + ") in " +
                               path);
    return token;
  };

  const std::string magic = next_token("magic");
  if (magic != "P5")
    throw std::runtime_error("unsupported PGM magic \"" + magic + "\" (want binary P5) in " +
                             path);
  int width = 0, height = 0, maxval = 0;
  try {
    width = std::stoi(next_token("width"));
    height = std::stoi(next_token("height"));
    maxval = std::stoi(next_token("maxval"));
  } catch (const std::exception&) {
    throw std::runtime_error("malformed PGM header (non-numeric field) in " + path);
  }
  if (maxval != 255)
    throw std::runtime_error("unsupported PGM maxval " + std::to_string(maxval) +
                             " (want 255) in " + path);
  if (width <= 0 || height <= 0 || width != height)
    throw std::runtime_error("unsupported PGM geometry " + std::to_string(width) + "x" +
                             std::to_string(height) + " (want square) in " + path);

  ImagePlane img = ImagePlane::zeros(width);
  std::vector<unsigned char> bytes(img.pixels.size());
  if (!is.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size())))
    throw std::runtime_error("truncated PGM payload in " + path);
  for (std::size_t i = 0; i < bytes.size(); ++i) img.pixels[i] = bytes[i];
  return img;
}

void save_pgm(const ImagePlane& image, const std::string& path) {
  validate_image(image);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os << "P5\n" << image.n << " " << image.n << "\n255\n";
  for (double v : image.pixels) {
    const double rounded = std::floor(v + 0.5);  // round half up
    const int byte = static_cast<int>(std::clamp(rounded, 0.0, 255.0));
    os.put(static_cast<char>(byte));
  }
  if (!os) throw std::runtime_error("write failed for " + path);
}

void write_report(const BenchReport& report, const std::string& out_dir) {
  if (report.rows.empty()) throw std::invalid_argument("empty benchmark report");
  std::filesystem::create_directories(out_dir);

  std::vector<const BenchRecord*> sorted;
  sorted.reserve(report.rows.size());
  for (const BenchRecord& row : report.rows) sorted.push_back(&row);
  std::sort(sorted.begin(), sorted.end(), [](const BenchRecord* a, const BenchRecord* b) {
    if (a->image_id != b->image_id) return a->image_id < b->image_id;
    if (a->run != b->run) return a->run < b->run;
    if (a->method != b->method) return a->method < b->method;
    return a->alpha < b->alpha;
  });

  const std::filesystem::path csv_path = std::filesystem::path(out_dir) / "report.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw std::runtime_error("cannot open " + csv_path.string() + " for writing");
  csv << "image_id,run,method,alpha,psnr_registered,ssim_registered,residual,runtime_s\n";
  for (const BenchRecord* row : sorted) {
    csv << row->image_id << ',' << row->run << ',' << row->method << ','
        << format_double(row->alpha, "%g") << ',' << format_double(row->psnr_registered, "%.4f")
        << ',' << format_double(row->ssim_registered, "%.6f") << ','
        << format_double(row->residual, "%.6e") << ',' << format_double(row->runtime_s, "%.6f")
        << '\n';
  }
  if (!csv) throw std::runtime_error("write failed for " + csv_path.string());

  struct Aggregate {
    double psnr = 0, ssim = 0, psnr_raw = 0, ssim_raw = 0, runtime = 0;
    int count = 0;
  };
  std::map<std::pair<std::string, double>, Aggregate> groups;
  for (const BenchRecord& row : report.rows) {
    Aggregate& agg = groups[{row.method, row.alpha}];
    agg.psnr += row.psnr_registered;
    agg.ssim += row.ssim_registered;
    agg.psnr_raw += row.psnr_raw;
    agg.ssim_raw += row.ssim_raw;
    agg.runtime += row.runtime_s;
    ++agg.count;
  }
  nlohmann::json aggregate = nlohmann::json::array();
  for (const auto& [key, agg] : groups) {
    aggregate.push_back({{"method", key.first},
                         {"alpha", key.second},
                         {"count", agg.count},
                         {"mean_psnr_registered", agg.psnr / agg.count},
                         {"mean_ssim_registered", agg.ssim / agg.count},
                         {"mean_psnr_raw", agg.psnr_raw / agg.count},
                         {"mean_ssim_raw", agg.ssim_raw / agg.count},
                         {"mean_runtime_s", agg.runtime / agg.count}});
  }
  const std::filesystem::path json_path = std::filesystem::path(out_dir) / "report.json";
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open " + json_path.string() + " for writing");
  js << nlohmann::json{{"aggregate", aggregate}}.dump(2) << "\n";
  if (!js) throw std::runtime_error("write failed for " + json_path.string());
}

}  // namespace phaselab
