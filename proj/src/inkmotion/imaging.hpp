#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "inkmotion/flowfield.hpp"
#include "inkmotion/geometry.hpp"

namespace inkmotion {

// Row-major, interleaved channels (1 = gray, 3 = RGB), samples in [0, 1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<float> samples;

  ImageBuffer() = default;
  ImageBuffer(int w, int h, int c, float fill = 0.0f);

  float& at(int x, int y, int c = 0) { return samples[(static_cast<std::size_t>(y) * width + x) * channels + c]; }
  float at(int x, int y, int c = 0) const {
    return samples[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

struct WeightMap {
  int width = 0;
  int height = 0;
  std::vector<float> w;
};

// Extended difference-of-Gaussians line drawing. The band-pass response
// D = G_sigma - G_{k sigma} of the luminance is scaled by `gain`; pixels
// whose dark-side response -gain D exceeds `threshold` fade to black as
// 1 - tanh(sharpness (e - threshold)).
struct SketchParams {
  double sigma = 1.0;
  double k = 1.6;
  double threshold = 0.15;
  double gain = 8.0;
  double sharpness = 10.0;
};

ImageBuffer decode_png(std::span<const std::uint8_t> bytes);
ImageBuffer read_png(const std::filesystem::path& path);
std::vector<std::uint8_t> encode_png(const ImageBuffer& image);
void write_png(const ImageBuffer& image, const std::filesystem::path& path);

// Foreground iff the 8-bit gray value is >= 128 (color input uses luminance).
Mask mask_from_image(const ImageBuffer& image);

ImageBuffer to_grayscale(const ImageBuffer& image);

ImageBuffer extract_sketch(const ImageBuffer& image, const SketchParams& params = {});

// Separable, kernel radius ceil(3 sigma), normalized, clamp-to-edge.
ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma);

WeightMap flow_magnitude_weights(const FlowField& flow);

// Softmax splatting: every source pixel is pushed to p + F(p) with bilinear
// mass and importance exp(alpha w(p)); each target takes the importance
// weighted mean of what lands on it, or `background` (one value per channel,
// or a single value for all) when nothing does.
ImageBuffer forward_warp(const ImageBuffer& image, const FlowField& flow, const WeightMap& weights, double alpha,
                         std::span<const float> background);

// Box-filtered downscale so the long side is at most `max_side`.
ImageBuffer downsample(const ImageBuffer& image, int max_side);

// RGB overlay of the mesh edges (dark) and boundary constraints (red) on the
// mask (light blue) for visual inspection.
ImageBuffer render_wireframe(const TriMesh& mesh, const Mask& mask);

}  // namespace inkmotion
