#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "phaselab/grid.hpp"

namespace phaselab {

/// One convolution layer. Kernels are stored row major as
/// out_channels x in_channels x kh x kw; biases per output channel.
struct ConvLayer {
  int out_channels = 0;
  int in_channels = 0;
  int kh = 0;
  int kw = 0;
  std::vector<double> kernel;
  std::vector<double> bias;

  double kernel_at(int oc, int ic, int dy, int dx) const {
    return kernel[((static_cast<std::size_t>(oc) * in_channels + ic) * kh + dy) * kw + dx];
  }
};

struct RefinerMeta {
  int input_side = 0;
  int epochs = 0;
  double learning_rate = 0.0;
  double momentum = 0.0;
  std::uint64_t seed = 0;
  std::string note;
};

struct RefinerWeights {
  std::vector<ConvLayer> layers;
  RefinerMeta meta;
};

struct LayerSpec {
  int out_channels = 1;
  int kh = 3;
  int kw = 3;
};
using ArchSpec = std::vector<LayerSpec>;

/// 5 conv layers, 3x3 kernels, channel chain 1->16->16->16->16->1,
/// ReLU between layers, linear last layer.
ArchSpec default_arch();

struct TrainParams {
  double learning_rate = 1e-2;
  double momentum = 0.9;     // in [0, 1)
  int epochs = 150;
  int batch_size = 8;
  std::uint64_t seed = 0;
};

using TrainingPair = std::pair<ImagePlane, ImagePlane>;  // (degraded, truth)

struct TrainResult {
  RefinerWeights weights;
  std::vector<double> epoch_loss;
};

/// Seeded uniform init on [-a, a] with a = sqrt(1 / (in_channels*kh*kw)),
/// biases zero. First layer takes 1 channel, last must emit 1.
RefinerWeights init_weights(const ArchSpec& arch, std::uint64_t seed);
RefinerWeights zero_weights(const ArchSpec& arch);

/// Residual forward pass: clamp_[0,255]( input + 255 * net(input / 255) ).
/// The net is conv -> ReLU repeated, last layer linear, same-size
/// zero-padded convolutions. Any input side is accepted.
ImagePlane refine(const RefinerWeights& weights, const ImagePlane& input);

/// Mini-batch SGD with momentum (v <- mu v - lr g; w <- w + v) on the MSE
/// between truth/255 and input/255 + net(input/255), mean over batch and
/// pixels. Shuffle schedule is fixed by the seed, so training is
/// deterministic; per-sample gradients may be computed in parallel (the
/// batch reduction runs in index order). Starts from `initial` when given,
/// otherwise from init_weights(arch, params.seed).
/// Throws std::runtime_error if the loss becomes non-finite.
TrainResult train(const std::vector<TrainingPair>& dataset, const ArchSpec& arch,
                  const TrainParams& params, int threads = 1,
                  const RefinerWeights* initial = nullptr);

/// Compares the analytic loss gradient against central finite differences
/// (h = 1e-5) on `probes` randomly chosen parameters; returns the max
/// relative error. Parameters whose gradient is negligible on both routes
/// (below 1e-6 of the largest gradient) are skipped.
double gradient_check(const RefinerWeights& weights, const TrainingPair& sample,
                      int probes = 64, std::uint64_t seed = 7);

/// Magnitude of the 2-D DFT of one filter (kernels summed over input
/// channels) on a 64 x 64 zero-padded grid, plus the fraction of spectral
/// energy inside the centered quarter band.
struct FilterResponse {
  static constexpr int kGridSide = 64;
  std::vector<double> magnitude;  // kGridSide x kGridSide, row major
  double low_pass_score = 0.0;
};
std::vector<FilterResponse> filter_frequency_response(const RefinerWeights& weights,
                                                      int layer_index);

/// Gaussian blur with reflective boundary handling, kernel radius ceil(3 sigma).
ImagePlane smooth_baseline(const ImagePlane& input, double sigma);

/// An artifact-removal operator; anything mapping a degraded image toward a
/// clean one fits the pipeline.
using RefinerFn = std::function<ImagePlane(const ImagePlane&)>;
RefinerFn identity_refiner();
RefinerFn cnn_refiner(RefinerWeights weights);
RefinerFn smoothing_refiner(double sigma);

// Binary weights format: magic "PRWTS01", u32 LE layer count, per layer
// u32 LE out/in/kh/kw then kernel and bias entries as f64 LE, then a u32 LE
// byte length followed by a UTF-8 JSON metadata blob.
void save_weights(const RefinerWeights& weights, const std::string& path);
RefinerWeights load_weights(const std::string& path);

}  // namespace phaselab
