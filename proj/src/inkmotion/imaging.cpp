#include "inkmotion/imaging.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "inkmotion/error.hpp"

namespace inkmotion {

ImageBuffer::ImageBuffer(int w, int h, int c, float fill)
    : width(w), height(h), channels(c), samples(static_cast<std::size_t>(w) * h * c, fill) {}

ImageBuffer decode_png(std::span<const std::uint8_t> bytes) {
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&img, bytes.data(), bytes.size())) {
    throw Error(ErrorCode::BadImage, std::string("cannot decode PNG: ") + img.message);
  }
  const bool color = (img.format & PNG_FORMAT_FLAG_COLOR) != 0;
  img.format = color ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  std::vector<std::uint8_t> raw(PNG_IMAGE_SIZE(img));
  // Transparent pixels composite onto white.
  png_color white{255, 255, 255};
  if (!png_image_finish_read(&img, &white, raw.data(), 0, nullptr)) {
    png_image_free(&img);
    throw Error(ErrorCode::BadImage, std::string("cannot decode PNG: ") + img.message);
  }
  ImageBuffer out(static_cast<int>(img.width), static_cast<int>(img.height), color ? 3 : 1);
  for (std::size_t i = 0; i < raw.size(); ++i) out.samples[i] = static_cast<float>(raw[i]) / 255.0f;
  return out;
}

ImageBuffer read_png(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open " + path.string());
  const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_png(bytes);
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::vector<std::uint8_t> encode_png(const ImageBuffer& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw Error(ErrorCode::InvalidArgument, "PNG output supports 1 or 3 channels");
  }
  std::vector<std::uint8_t> raw(image.samples.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const float v = std::clamp(image.samples[i], 0.0f, 1.0f);
    raw[i] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
  }
  png_image img{};
  img.version = PNG_IMAGE_VERSION;
  img.width = static_cast<png_uint_32>(image.width);
  img.height = static_cast<png_uint_32>(image.height);
  img.format = image.channels == 3 ? PNG_FORMAT_RGB : PNG_FORMAT_GRAY;
  png_alloc_size_t size = 0;
  if (!png_image_write_to_memory(&img, nullptr, &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("cannot encode PNG: ") + img.message);
  }
  std::vector<std::uint8_t> out(size);
  if (!png_image_write_to_memory(&img, out.data(), &size, 0, raw.data(), 0, nullptr)) {
    throw Error(ErrorCode::IoFailure, std::string("cannot encode PNG: ") + img.message);
  }
  out.resize(size);
  return out;
}

void write_png(const ImageBuffer& image, const std::filesystem::path& path) {
  const auto bytes = encode_png(image);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

ImageBuffer to_grayscale(const ImageBuffer& image) {
  if (image.channels == 1) return image;
  ImageBuffer gray(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      gray.at(x, y) = 0.299f * image.at(x, y, 0) + 0.587f * image.at(x, y, 1) + 0.114f * image.at(x, y, 2);
    }
  }
  return gray;
}

Mask mask_from_image(const ImageBuffer& image) {
  const ImageBuffer gray = to_grayscale(image);
  Mask mask(gray.width, gray.height);
  for (std::size_t i = 0; i < gray.samples.size(); ++i) {
    mask.bits[i] = std::lround(gray.samples[i] * 255.0f) >= 128 ? 1 : 0;
  }
  return mask;
}

namespace {

std::vector<double> gaussian_kernel(double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
    sum += kernel[i + radius];
  }
  for (double& k : kernel) k /= sum;
  return kernel;
}

}  // namespace

ImageBuffer gaussian_blur(const ImageBuffer& image, double sigma) {
  if (!(sigma >= 0.0)) throw Error(ErrorCode::InvalidArgument, "blur sigma must be non-negative");
  if (sigma == 0.0 || image.samples.empty()) return image;
  const std::vector<double> kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = image.width, h = image.height, ch = image.channels;

  std::vector<double> tmp(image.samples.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int sx = std::clamp(x + k, 0, w - 1);
          acc += kernel[k + radius] * image.at(sx, y, c);
        }
        tmp[(static_cast<std::size_t>(y) * w + x) * ch + c] = acc;
      }
    }
  }
  ImageBuffer out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int k = -radius; k <= radius; ++k) {
          const int sy = std::clamp(y + k, 0, h - 1);
          acc += kernel[k + radius] * tmp[(static_cast<std::size_t>(sy) * w + x) * ch + c];
        }
        out.at(x, y, c) = static_cast<float>(std::clamp(acc, 0.0, 1.0));
      }
    }
  }
  return out;
}

ImageBuffer extract_sketch(const ImageBuffer& image, const SketchParams& params) {
  const ImageBuffer gray = to_grayscale(image);
  const ImageBuffer narrow = gaussian_blur(gray, params.sigma);
  const ImageBuffer wide = gaussian_blur(gray, params.k * params.sigma);
  ImageBuffer sketch(gray.width, gray.height, 1, 1.0f);
  for (std::size_t i = 0; i < sketch.samples.size(); ++i) {
    const double response = -params.gain * (static_cast<double>(narrow.samples[i]) - wide.samples[i]);
    if (response > params.threshold) {
      const double value = 1.0 - std::tanh(params.sharpness * (response - params.threshold));
      sketch.samples[i] = static_cast<float>(std::clamp(value, 0.0, 1.0));
    }
  }
  return sketch;
}

WeightMap flow_magnitude_weights(const FlowField& flow) {
  WeightMap map{flow.width, flow.height, std::vector<float>(flow.u.size())};
  for (std::size_t i = 0; i < flow.u.size(); ++i) {
    map.w[i] = std::sqrt(flow.u[i] * flow.u[i] + flow.v[i] * flow.v[i]);
  }
  return map;
}

ImageBuffer forward_warp(const ImageBuffer& image, const FlowField& flow, const WeightMap& weights, double alpha,
                         std::span<const float> background) {
  if (image.width != flow.width || image.height != flow.height || weights.width != flow.width ||
      weights.height != flow.height) {
    throw Error(ErrorCode::DimensionMismatch, "image " + std::to_string(image.width) + "x" +
                                                  std::to_string(image.height) + " vs flow " +
                                                  std::to_string(flow.width) + "x" + std::to_string(flow.height));
  }
  if (!(alpha >= 0.0)) throw Error(ErrorCode::InvalidArgument, "alpha must be non-negative");
  if (background.size() != 1 && background.size() != static_cast<std::size_t>(image.channels)) {
    throw Error(ErrorCode::InvalidArgument, "background needs 1 or one-per-channel values");
  }
  const int w = image.width, h = image.height, ch = image.channels;
  const std::size_t n = static_cast<std::size_t>(w) * h;

  struct Splat {
    int x[4], y[4];
    double mass[4];
  };
  auto splat_of = [&](int x, int y) {
    const std::size_t i = static_cast<std::size_t>(y) * w + x;
    const double tx = x + static_cast<double>(flow.u[i]);
    const double ty = y + static_cast<double>(flow.v[i]);
    const double fx0 = std::floor(tx), fy0 = std::floor(ty);
    const double fx = tx - fx0, fy = ty - fy0;
    const int x0 = static_cast<int>(fx0), y0 = static_cast<int>(fy0);
    return Splat{{x0, x0 + 1, x0, x0 + 1},
                 {y0, y0, y0 + 1, y0 + 1},
                 {(1 - fx) * (1 - fy), fx * (1 - fy), (1 - fx) * fy, fx * fy}};
  };
  auto inside = [&](int x, int y) { return x >= 0 && y >= 0 && x < w && y < h; };
  const bool finite_flow = std::all_of(flow.u.begin(), flow.u.end(), [](float f) { return std::isfinite(f); }) &&
                           std::all_of(flow.v.begin(), flow.v.end(), [](float f) { return std::isfinite(f); });
  if (!finite_flow) throw Error(ErrorCode::InvalidArgument, "flow contains non-finite values");

  // Softmax is shift invariant; shifting by the largest logit landing on each
  // target keeps the largest importance at exactly 1, so no target underflows.
  std::vector<double> peak(n, -std::numeric_limits<double>::infinity());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double logit = alpha * weights.w[static_cast<std::size_t>(y) * w + x];
      const Splat s = splat_of(x, y);
      for (int k = 0; k < 4; ++k) {
        if (s.mass[k] > 0.0 && inside(s.x[k], s.y[k])) {
          double& p = peak[static_cast<std::size_t>(s.y[k]) * w + s.x[k]];
          p = std::max(p, logit);
        }
      }
    }
  }

  std::vector<double> num(n * ch, 0.0);
  std::vector<double> den(n, 0.0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double logit = alpha * weights.w[static_cast<std::size_t>(y) * w + x];
      const Splat s = splat_of(x, y);
      for (int k = 0; k < 4; ++k) {
        if (!(s.mass[k] > 0.0) || !inside(s.x[k], s.y[k])) continue;
        const std::size_t t = static_cast<std::size_t>(s.y[k]) * w + s.x[k];
        const double weight = s.mass[k] * std::exp(logit - peak[t]);
        den[t] += weight;
        for (int c = 0; c < ch; ++c) num[t * ch + c] += weight * image.at(x, y, c);
      }
    }
  }

  ImageBuffer out(w, h, ch);
  for (std::size_t t = 0; t < n; ++t) {
    for (int c = 0; c < ch; ++c) {
      out.samples[t * ch + c] = den[t] < 1e-8 ? background[background.size() == 1 ? 0 : c]
                                              : static_cast<float>(num[t * ch + c] / den[t]);
    }
  }
  return out;
}

ImageBuffer downsample(const ImageBuffer& image, int max_side) {
  const int longest = std::max(image.width, image.height);
  if (longest <= max_side || max_side <= 0) return image;
  const int factor = (longest + max_side - 1) / max_side;
  const int w = (image.width + factor - 1) / factor;
  const int h = (image.height + factor - 1) / factor;
  ImageBuffer out(w, h, image.channels);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < image.channels; ++c) {
        double acc = 0.0;
        int count = 0;
        for (int sy = y * factor; sy < std::min(image.height, (y + 1) * factor); ++sy) {
          for (int sx = x * factor; sx < std::min(image.width, (x + 1) * factor); ++sx) {
            acc += image.at(sx, sy, c);
            ++count;
          }
        }
        out.at(x, y, c) = static_cast<float>(acc / count);
      }
    }
  }
  return out;
}

ImageBuffer render_wireframe(const TriMesh& mesh, const Mask& mask) {
  ImageBuffer out(mask.width, mask.height, 3, 1.0f);
  auto paint = [&](int x, int y, float r, float g, float b) {
    if (x < 0 || y < 0 || x >= out.width || y >= out.height) return;
    out.at(x, y, 0) = r;
    out.at(x, y, 1) = g;
    out.at(x, y, 2) = b;
  };
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y)) paint(x, y, 0.82f, 0.9f, 1.0f);
    }
  }
  auto line = [&](const Vec2& a, const Vec2& b, float r, float g, float bl) {
    const int steps = std::max(1, static_cast<int>(std::ceil(4.0 * (b - a).norm())));
    for (int i = 0; i <= steps; ++i) {
      const Vec2 p = a + (b - a) * (static_cast<double>(i) / steps);
      paint(static_cast<int>(std::floor(p.x())), static_cast<int>(std::floor(p.y())), r, g, bl);
    }
  };
  const auto& X = mesh.rest_positions;
  for (const auto& t : mesh.triangles) {
    for (int k = 0; k < 3; ++k) line(X[t[k]], X[t[(k + 1) % 3]], 0.15f, 0.15f, 0.2f);
  }
  for (const auto& e : mesh.boundary_edges) line(X[e[0]], X[e[1]], 0.85f, 0.1f, 0.1f);
  return out;
}

}  // namespace inkmotion
