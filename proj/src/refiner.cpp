#include "phaselab/refiner.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "binio.hpp"
#include "fft.hpp"
#include "phaselab/parallel.hpp"
#include "phaselab/rng.hpp"

namespace phaselab {

namespace {

constexpr char kMagic[7] = {'P', 'R', 'W', 'T', 'S', '0', '1'};

// Channel-major c x n x n activation block.
struct Tensor {
  int c = 0;
  int n = 0;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int c_, int n_) : c(c_), n(n_), v(static_cast<std::size_t>(c_) * n_ * n_, 0.0) {}

  double* plane(int ch) { return v.data() + static_cast<std::size_t>(ch) * n * n; }
  const double* plane(int ch) const { return v.data() + static_cast<std::size_t>(ch) * n * n; }
};

void validate_weights(const RefinerWeights& weights) {
  if (weights.layers.empty()) throw std::invalid_argument("refiner has no layers");
  int prev_out = 1;
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    const ConvLayer& layer = weights.layers[l];
    if (layer.in_channels != prev_out)
      throw std::invalid_argument("layer " + std::to_string(l) +
                                  " input channels break the chain");
    if (layer.out_channels < 1 || layer.kh < 1 || layer.kw < 1)
      throw std::invalid_argument("layer " + std::to_string(l) + " has invalid shape");
    const std::size_t ksize = static_cast<std::size_t>(layer.out_channels) *
                              layer.in_channels * layer.kh * layer.kw;
    if (layer.kernel.size() != ksize ||
        layer.bias.size() != static_cast<std::size_t>(layer.out_channels))
      throw std::invalid_argument("layer " + std::to_string(l) + " has mismatched buffers");
    for (double w : layer.kernel)
      if (!std::isfinite(w)) throw std::invalid_argument("non-finite kernel entry");
    for (double b : layer.bias)
      if (!std::isfinite(b)) throw std::invalid_argument("non-finite bias entry");
    prev_out = layer.out_channels;
  }
  if (prev_out != 1) throw std::invalid_argument("last layer must emit one channel");
}

// 3x3 path: branch-free nine-tap interior, edges patched separately.
void conv3x3_accumulate(const double* ip, double* op, const double* w, int n) {
  auto edge_cols = [&](const double* r0, const double* r1, const double* r2, double* orow) {
    for (int x = 0; x < n; x += n - 1) {
      double acc = w[4] * r1[x];
      if (x > 0) acc += w[3] * r1[x - 1];
      if (x + 1 < n) acc += w[5] * r1[x + 1];
      if (r0) {
        acc += w[1] * r0[x];
        if (x > 0) acc += w[0] * r0[x - 1];
        if (x + 1 < n) acc += w[2] * r0[x + 1];
      }
      if (r2) {
        acc += w[7] * r2[x];
        if (x > 0) acc += w[6] * r2[x - 1];
        if (x + 1 < n) acc += w[8] * r2[x + 1];
      }
      orow[x] += acc;
      if (n == 1) break;
    }
  };
  for (int y = 1; y + 1 < n; ++y) {
    double* orow = op + static_cast<std::size_t>(y) * n;
    const double* r0 = ip + static_cast<std::size_t>(y - 1) * n;
    const double* r1 = r0 + n;
    const double* r2 = r1 + n;
    for (int x = 1; x + 1 < n; ++x) {
      orow[x] += w[0] * r0[x - 1] + w[1] * r0[x] + w[2] * r0[x + 1] +
                 w[3] * r1[x - 1] + w[4] * r1[x] + w[5] * r1[x + 1] +
                 w[6] * r2[x - 1] + w[7] * r2[x] + w[8] * r2[x + 1];
    }
    edge_cols(r0, r1, r2, orow);
  }
  {  // top row
    const double* r1 = ip;
    const double* r2 = n > 1 ? ip + n : nullptr;
    for (int x = 1; x + 1 < n; ++x)
      op[x] += w[3] * r1[x - 1] + w[4] * r1[x] + w[5] * r1[x + 1] +
               (r2 ? w[6] * r2[x - 1] + w[7] * r2[x] + w[8] * r2[x + 1] : 0.0);
    edge_cols(nullptr, r1, r2, op);
  }
  if (n > 1) {  // bottom row
    double* orow = op + static_cast<std::size_t>(n - 1) * n;
    const double* r0 = ip + static_cast<std::size_t>(n - 2) * n;
    const double* r1 = r0 + n;
    for (int x = 1; x + 1 < n; ++x)
      orow[x] += w[0] * r0[x - 1] + w[1] * r0[x] + w[2] * r0[x + 1] +
                 w[3] * r1[x - 1] + w[4] * r1[x] + w[5] * r1[x + 1];
    edge_cols(r0, r1, nullptr, orow);
  }
}

// Same-size zero-padded cross-correlation.
Tensor conv_forward(const Tensor& in, const ConvLayer& layer) {
  const int n = in.n;
  Tensor out(layer.out_channels, n);
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    double* op = out.plane(oc);
    const double b = layer.bias[oc];
    for (int i = 0; i < n * n; ++i) op[i] = b;
  }
  const int ph = (layer.kh - 1) / 2;
  const int pw = (layer.kw - 1) / 2;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    double* op = out.plane(oc);
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      const double* ip = in.plane(ic);
      if (layer.kh == 3 && layer.kw == 3 && n >= 2) {
        const double* w =
            layer.kernel.data() + (static_cast<std::size_t>(oc) * layer.in_channels + ic) * 9;
        conv3x3_accumulate(ip, op, w, n);
        continue;
      }
      for (int dy = 0; dy < layer.kh; ++dy)
        for (int dx = 0; dx < layer.kw; ++dx) {
          const double w = layer.kernel_at(oc, ic, dy, dx);
          if (w == 0.0) continue;
          const int shift = dx - pw;
          const int x0 = std::max(0, -shift);
          const int x1 = std::min(n, n - shift);
          for (int y = 0; y < n; ++y) {
            const int yy = y + dy - ph;
            if (yy < 0 || yy >= n) continue;
            double* orow = op + static_cast<std::size_t>(y) * n;
            const double* irow = ip + static_cast<std::size_t>(yy) * n + shift;
            for (int x = x0; x < x1; ++x) orow[x] += w * irow[x];
          }
        }
    }
  }
  return out;
}

// Adjoint of conv_forward with respect to the input.
Tensor conv_backward_data(const Tensor& dout, const ConvLayer& layer) {
  const int n = dout.n;
  Tensor din(layer.in_channels, n);
  const int ph = (layer.kh - 1) / 2;
  const int pw = (layer.kw - 1) / 2;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    const double* dp = dout.plane(oc);
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      double* gp = din.plane(ic);
      for (int dy = 0; dy < layer.kh; ++dy)
        for (int dx = 0; dx < layer.kw; ++dx) {
          const double w = layer.kernel_at(oc, ic, dy, dx);
          if (w == 0.0) continue;
          const int shift = dx - pw;
          const int x0 = std::max(0, -shift);
          const int x1 = std::min(n, n - shift);
          for (int y = 0; y < n; ++y) {
            const int yy = y + dy - ph;
            if (yy < 0 || yy >= n) continue;
            const double* drow = dp + static_cast<std::size_t>(y) * n;
            double* grow = gp + static_cast<std::size_t>(yy) * n + shift;
            for (int x = x0; x < x1; ++x) grow[x] += w * drow[x];
          }
        }
    }
  }
  return din;
}

// Flat parameter gradients, one vector per layer: kernel entries then biases.
struct LayerGrad {
  std::vector<double> kernel;
  std::vector<double> bias;
};

void conv_backward_params(const Tensor& dout, const Tensor& a_prev, const ConvLayer& layer,
                          LayerGrad& grad) {
  const int n = dout.n;
  const int ph = (layer.kh - 1) / 2;
  const int pw = (layer.kw - 1) / 2;
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    const double* dp = dout.plane(oc);
    double bsum = 0.0;
    for (int i = 0; i < n * n; ++i) bsum += dp[i];
    grad.bias[oc] += bsum;
    for (int ic = 0; ic < layer.in_channels; ++ic) {
      const double* ap = a_prev.plane(ic);
      for (int dy = 0; dy < layer.kh; ++dy)
        for (int dx = 0; dx < layer.kw; ++dx) {
          const int shift = dx - pw;
          const int x0 = std::max(0, -shift);
          const int x1 = std::min(n, n - shift);
          double acc = 0.0;
          for (int y = 0; y < n; ++y) {
            const int yy = y + dy - ph;
            if (yy < 0 || yy >= n) continue;
            const double* drow = dp + static_cast<std::size_t>(y) * n;
            const double* arow = ap + static_cast<std::size_t>(yy) * n + shift;
            for (int x = x0; x < x1; ++x) acc += drow[x] * arow[x];
          }
          grad.kernel[((static_cast<std::size_t>(oc) * layer.in_channels + ic) * layer.kh + dy) *
                          layer.kw +
                      dx] += acc;
        }
    }
  }
}

// Activations a_0 (scaled input) through a_L; hidden layers post-ReLU, the
// last layer linear.
std::vector<Tensor> forward_all(const RefinerWeights& weights, const Tensor& input) {
  std::vector<Tensor> acts;
  acts.reserve(weights.layers.size() + 1);
  acts.push_back(input);
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    Tensor z = conv_forward(acts.back(), weights.layers[l]);
    if (l + 1 < weights.layers.size())
      for (double& v : z.v) v = v > 0.0 ? v : 0.0;
    acts.push_back(std::move(z));
  }
  return acts;
}

Tensor scaled_input(const ImagePlane& image) {
  Tensor t(1, image.n);
  for (std::size_t i = 0; i < image.pixels.size(); ++i) t.v[i] = image.pixels[i] / 255.0;
  return t;
}

std::vector<LayerGrad> zero_grads(const RefinerWeights& weights) {
  std::vector<LayerGrad> grads(weights.layers.size());
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    grads[l].kernel.assign(weights.layers[l].kernel.size(), 0.0);
    grads[l].bias.assign(weights.layers[l].bias.size(), 0.0);
  }
  return grads;
}

// Per-sample loss (pixel mean of the squared scaled error) and parameter
// gradients. Prediction is input + net(input) in the scaled domain, no clamp.
double sample_loss_and_grads(const RefinerWeights& weights, const TrainingPair& pair,
                             std::vector<LayerGrad>* grads) {
  const Tensor x0 = scaled_input(pair.first);
  const std::vector<Tensor> acts = forward_all(weights, x0);
  const Tensor& net_out = acts.back();
  const int n = pair.first.n;
  const std::size_t pixels = static_cast<std::size_t>(n) * n;

  Tensor delta(1, n);
  double loss = 0.0;
  for (std::size_t i = 0; i < pixels; ++i) {
    const double diff = x0.v[i] + net_out.v[i] - pair.second.pixels[i] / 255.0;
    loss += diff * diff;
    delta.v[i] = 2.0 * diff / static_cast<double>(pixels);
  }
  loss /= static_cast<double>(pixels);
  if (!grads) return loss;

  for (std::size_t l = weights.layers.size(); l-- > 0;) {
    conv_backward_params(delta, acts[l], weights.layers[l], (*grads)[l]);
    if (l == 0) break;
    Tensor prev = conv_backward_data(delta, weights.layers[l]);
    const Tensor& a_prev = acts[l];
    for (std::size_t i = 0; i < prev.v.size(); ++i)
      if (a_prev.v[i] <= 0.0) prev.v[i] = 0.0;
    delta = std::move(prev);
  }
  return loss;
}

std::size_t param_count(const RefinerWeights& weights) {
  std::size_t count = 0;
  for (const ConvLayer& layer : weights.layers) count += layer.kernel.size() + layer.bias.size();
  return count;
}

double* param_at(RefinerWeights& weights, std::size_t index) {
  for (ConvLayer& layer : weights.layers) {
    if (index < layer.kernel.size()) return &layer.kernel[index];
    index -= layer.kernel.size();
    if (index < layer.bias.size()) return &layer.bias[index];
    index -= layer.bias.size();
  }
  throw std::out_of_range("parameter index");
}

}  // namespace

ArchSpec default_arch() {
  return ArchSpec{{16, 3, 3}, {16, 3, 3}, {16, 3, 3}, {16, 3, 3}, {1, 3, 3}};
}

RefinerWeights zero_weights(const ArchSpec& arch) {
  if (arch.empty()) throw std::invalid_argument("empty architecture");
  RefinerWeights weights;
  int in_c = 1;
  for (const LayerSpec& spec : arch) {
    ConvLayer layer;
    layer.out_channels = spec.out_channels;
    layer.in_channels = in_c;
    layer.kh = spec.kh;
    layer.kw = spec.kw;
    layer.kernel.assign(
        static_cast<std::size_t>(spec.out_channels) * in_c * spec.kh * spec.kw, 0.0);
    layer.bias.assign(spec.out_channels, 0.0);
    weights.layers.push_back(std::move(layer));
    in_c = spec.out_channels;
  }
  validate_weights(weights);
  return weights;
}

RefinerWeights init_weights(const ArchSpec& arch, std::uint64_t seed) {
  RefinerWeights weights = zero_weights(arch);
  RngStream rng(seed);
  for (std::size_t l = 0; l < weights.layers.size(); ++l) {
    ConvLayer& layer = weights.layers[l];
    double a = std::sqrt(1.0 / (static_cast<double>(layer.in_channels) * layer.kh * layer.kw));
    // damp the last layer so the residual net starts close to the identity
    if (l + 1 == weights.layers.size()) a *= 0.01;
    for (double& w : layer.kernel) w = a * (2.0 * rng.uniform() - 1.0);
  }
  weights.meta.seed = seed;
  return weights;
}

ImagePlane refine(const RefinerWeights& weights, const ImagePlane& input) {
  validate_weights(weights);
  const Tensor x0 = scaled_input(input);
  const std::vector<Tensor> acts = forward_all(weights, x0);
  const Tensor& net_out = acts.back();
  ImagePlane out = ImagePlane::zeros(input.n);
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = std::clamp(input.pixels[i] + 255.0 * net_out.v[i], 0.0, 255.0);
  return out;
}

TrainResult train(const std::vector<TrainingPair>& dataset, const ArchSpec& arch,
                  const TrainParams& params, int threads, const RefinerWeights* initial) {
  if (dataset.empty()) throw std::invalid_argument("training dataset is empty");
  if (params.learning_rate <= 0.0) throw std::invalid_argument("learning rate must be > 0");
  if (params.epochs < 1) throw std::invalid_argument("epochs must be >= 1");
  if (params.batch_size < 1) throw std::invalid_argument("batch size must be >= 1");
  if (params.momentum < 0.0 || params.momentum >= 1.0)
    throw std::invalid_argument("momentum must be in [0, 1)");
  const int side = dataset.front().first.n;
  for (const TrainingPair& pair : dataset)
    if (pair.first.n != side || pair.second.n != side)
      throw std::invalid_argument("training images must share one side length");

  RefinerWeights weights = initial ? *initial : init_weights(arch, params.seed);
  validate_weights(weights);

  std::vector<LayerGrad> velocity = zero_grads(weights);
  RngStream shuffle_rng(RngStream::derive(params.seed, 1));
  const std::size_t samples = dataset.size();
  std::vector<std::size_t> order(samples);

  TrainResult result;
  result.epoch_loss.reserve(params.epochs);

  for (int epoch = 0; epoch < params.epochs; ++epoch) {
    for (std::size_t i = 0; i < samples; ++i) order[i] = i;
    for (std::size_t i = samples; i-- > 1;) {
      const std::size_t j = shuffle_rng.next_u64() % (i + 1);
      std::swap(order[i], order[j]);
    }

    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < samples; start += params.batch_size) {
      const std::size_t batch = std::min<std::size_t>(params.batch_size, samples - start);

      std::vector<std::vector<LayerGrad>> sample_grads(batch);
      std::vector<double> sample_loss(batch);
      parallel_for(batch, threads, [&](std::size_t b) {
        sample_grads[b] = zero_grads(weights);
        sample_loss[b] =
            sample_loss_and_grads(weights, dataset[order[start + b]], &sample_grads[b]);
      });

      // fixed-order reduction keeps training bit-deterministic
      std::vector<LayerGrad> grads = zero_grads(weights);
      double batch_loss = 0.0;
      for (std::size_t b = 0; b < batch; ++b) {
        batch_loss += sample_loss[b];
        for (std::size_t l = 0; l < grads.size(); ++l) {
          for (std::size_t i = 0; i < grads[l].kernel.size(); ++i)
            grads[l].kernel[i] += sample_grads[b][l].kernel[i];
          for (std::size_t i = 0; i < grads[l].bias.size(); ++i)
            grads[l].bias[i] += sample_grads[b][l].bias[i];
        }
      }
      epoch_loss += batch_loss;
      if (!std::isfinite(batch_loss))
        throw std::runtime_error("training diverged: non-finite loss at epoch " +
                                 std::to_string(epoch));

      const double inv_batch = 1.0 / static_cast<double>(batch);
      for (std::size_t l = 0; l < weights.layers.size(); ++l) {
        ConvLayer& layer = weights.layers[l];
        for (std::size_t i = 0; i < layer.kernel.size(); ++i) {
          velocity[l].kernel[i] = params.momentum * velocity[l].kernel[i] -
                                  params.learning_rate * grads[l].kernel[i] * inv_batch;
          layer.kernel[i] += velocity[l].kernel[i];
        }
        for (std::size_t i = 0; i < layer.bias.size(); ++i) {
          velocity[l].bias[i] = params.momentum * velocity[l].bias[i] -
                                params.learning_rate * grads[l].bias[i] * inv_batch;
          layer.bias[i] += velocity[l].bias[i];
        }
      }
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(samples));
  }

  weights.meta.input_side = side;
  weights.meta.epochs = params.epochs;
  weights.meta.learning_rate = params.learning_rate;
  weights.meta.momentum = params.momentum;
  weights.meta.seed = params.seed;
  result.weights = std::move(weights);
  return result;
}

double gradient_check(const RefinerWeights& weights, const TrainingPair& sample,
                      int probes, std::uint64_t seed) {
  validate_weights(weights);
  std::vector<LayerGrad> grads = zero_grads(weights);
  sample_loss_and_grads(weights, sample, &grads);

  std::vector<double> flat;
  for (const LayerGrad& g : grads) {
    flat.insert(flat.end(), g.kernel.begin(), g.kernel.end());
    flat.insert(flat.end(), g.bias.begin(), g.bias.end());
  }

  const std::size_t total = param_count(weights);
  const double h = 1e-5;

  // Parameters whose gradient is negligible against the dominant one carry
  // only finite-difference round-off; treat them as the zero/zero case.
  double scale = 0.0;
  for (double g : flat) scale = std::max(scale, std::abs(g));
  const double cutoff = 1e-6 * scale;

  RngStream rng(seed);
  double max_rel = 0.0;
  for (int p = 0; p < probes; ++p) {
    const std::size_t idx = rng.next_u64() % total;
    RefinerWeights perturbed = weights;
    double* w = param_at(perturbed, idx);
    const double w0 = *w;
    *w = w0 + h;
    const double lp = sample_loss_and_grads(perturbed, sample, nullptr);
    *w = w0 - h;
    const double lm = sample_loss_and_grads(perturbed, sample, nullptr);
    const double numeric = (lp - lm) / (2.0 * h);
    const double analytic = flat[idx];
    if (std::abs(numeric) < cutoff && std::abs(analytic) < cutoff) continue;
    const double rel = std::abs(numeric - analytic) / std::max(std::abs(numeric), std::abs(analytic));
    max_rel = std::max(max_rel, rel);
  }
  return max_rel;
}

std::vector<FilterResponse> filter_frequency_response(const RefinerWeights& weights,
                                                      int layer_index) {
  validate_weights(weights);
  if (layer_index < 0 || layer_index >= static_cast<int>(weights.layers.size()))
    throw std::invalid_argument("layer index out of range");
  const ConvLayer& layer = weights.layers[layer_index];
  const int m = FilterResponse::kGridSide;
  if (layer.kh > m || layer.kw > m)
    throw std::invalid_argument("kernel larger than the analysis grid");

  std::vector<FilterResponse> responses(layer.out_channels);
  for (int oc = 0; oc < layer.out_channels; ++oc) {
    std::vector<std::complex<double>> grid(static_cast<std::size_t>(m) * m);
    for (int dy = 0; dy < layer.kh; ++dy)
      for (int dx = 0; dx < layer.kw; ++dx) {
        double sum = 0.0;
        for (int ic = 0; ic < layer.in_channels; ++ic) sum += layer.kernel_at(oc, ic, dy, dx);
        grid[static_cast<std::size_t>(dy) * m + dx] = sum;
      }
    detail::dft2d(grid.data(), m, true);

    FilterResponse& resp = responses[oc];
    resp.magnitude.resize(grid.size());
    double total = 0.0, band = 0.0;
    for (int u = 0; u < m; ++u) {
      const int cu = (u + m / 2) % m - m / 2;
      for (int v = 0; v < m; ++v) {
        const int cv = (v + m / 2) % m - m / 2;
        const double mag = std::abs(grid[static_cast<std::size_t>(u) * m + v]);
        resp.magnitude[static_cast<std::size_t>(u) * m + v] = mag;
        const double e = mag * mag;
        total += e;
        if (cu >= -m / 4 && cu < m / 4 && cv >= -m / 4 && cv < m / 4) band += e;
      }
    }
    resp.low_pass_score = total == 0.0 ? 0.0 : band / total;
  }
  return responses;
}

ImagePlane smooth_baseline(const ImagePlane& input, double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be > 0");
  const int n = input.n;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));

  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int d = -radius; d <= radius; ++d) {
    kernel[d + radius] = std::exp(-0.5 * d * d / (sigma * sigma));
    sum += kernel[d + radius];
  }
  for (double& k : kernel) k /= sum;

  // reflect-101: index -1 maps to 1, index n to n-2
  auto mirror = [n](int i) {
    if (n == 1) return 0;
    const int period = 2 * n - 2;
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
  };

  std::vector<double> horizontal(input.pixels.size());
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += kernel[d + radius] * input.at(y, mirror(x + d));
      horizontal[static_cast<std::size_t>(y) * n + x] = acc;
    }
  ImagePlane out = ImagePlane::zeros(n);
  for (int y = 0; y < n; ++y)
    for (int x = 0; x < n; ++x) {
      double acc = 0.0;
      for (int d = -radius; d <= radius; ++d)
        acc += kernel[d + radius] * horizontal[static_cast<std::size_t>(mirror(y + d)) * n + x];
      out.at(y, x) = acc;
    }
  return out;
}

RefinerFn identity_refiner() {
  return [](const ImagePlane& image) { return image; };
}

RefinerFn cnn_refiner(RefinerWeights weights) {
  validate_weights(weights);
  return [weights = std::move(weights)](const ImagePlane& image) {
    return refine(weights, image);
  };
}

RefinerFn smoothing_refiner(double sigma) {
  if (sigma <= 0.0) throw std::invalid_argument("sigma must be > 0");
  return [sigma](const ImagePlane& image) { return smooth_baseline(image, sigma); };
}

void save_weights(const RefinerWeights& weights, const std::string& path) {
  validate_weights(weights);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open " + path + " for writing");
  os.write(kMagic, sizeof(kMagic));
  detail::write_u32le(os, static_cast<std::uint32_t>(weights.layers.size()));
  for (const ConvLayer& layer : weights.layers) {
    detail::write_u32le(os, static_cast<std::uint32_t>(layer.out_channels));
    detail::write_u32le(os, static_cast<std::uint32_t>(layer.in_channels));
    detail::write_u32le(os, static_cast<std::uint32_t>(layer.kh));
    detail::write_u32le(os, static_cast<std::uint32_t>(layer.kw));
    for (double w : layer.kernel) detail::write_f64le(os, w);
    for (double b : layer.bias) detail::write_f64le(os, b);
  }
  const nlohmann::json meta = {
      {"input_side", weights.meta.input_side}, {"epochs", weights.meta.epochs},
      {"learning_rate", weights.meta.learning_rate}, {"momentum", weights.meta.momentum},
      {"seed", weights.meta.seed}, {"note", weights.meta.note}};
  const std::string blob = meta.dump();
  detail::write_u32le(os, static_cast<std::uint32_t>(blob.size()));
  os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
  if (!os) throw std::runtime_error("write failed for " + path);
}

RefinerWeights load_weights(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path);
  char magic[7];
  if (!is.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw std::runtime_error("bad weights magic in " + path);
  RefinerWeights weights;
  const std::uint32_t layer_count = detail::read_u32le(is, "layer count");
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    ConvLayer layer;
    layer.out_channels = static_cast<int>(detail::read_u32le(is, "out channels"));
    layer.in_channels = static_cast<int>(detail::read_u32le(is, "in channels"));
    layer.kh = static_cast<int>(detail::read_u32le(is, "kernel height"));
    layer.kw = static_cast<int>(detail::read_u32le(is, "kernel width"));
    if (layer.out_channels < 1 || layer.in_channels < 1 || layer.kh < 1 || layer.kw < 1)
      throw std::runtime_error("invalid layer shape in " + path);
    const std::size_t ksize = static_cast<std::size_t>(layer.out_channels) *
                              layer.in_channels * layer.kh * layer.kw;
    layer.kernel.resize(ksize);
    for (double& w : layer.kernel) w = detail::read_f64le(is, "kernel");
    layer.bias.resize(layer.out_channels);
    for (double& b : layer.bias) b = detail::read_f64le(is, "bias");
    weights.layers.push_back(std::move(layer));
  }
  const std::uint32_t blob_size = detail::read_u32le(is, "metadata length");
  std::string blob(blob_size, '\0');
  if (!is.read(blob.data(), blob_size))
    throw std::runtime_error("truncated metadata in " + path);
  const nlohmann::json meta = nlohmann::json::parse(blob);
  weights.meta.input_side = meta.value("input_side", 0);
  weights.meta.epochs = meta.value("epochs", 0);
  weights.meta.learning_rate = meta.value("learning_rate", 0.0);
  weights.meta.momentum = meta.value("momentum", 0.0);
  weights.meta.seed = meta.value("seed", std::uint64_t{0});
  weights.meta.note = meta.value("note", std::string{});
  validate_weights(weights);
  return weights;
}

}  // namespace phaselab
