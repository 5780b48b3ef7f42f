#pragma once

#include <optional>
#include <vector>

#include "breathflow/imagery.hpp"
#include "breathflow/kernels.hpp"
#include "breathflow/parallel.hpp"

// Dense two-frame optical flow from quadratic polynomial expansion of each
// pixel's neighborhood, refined coarse-to-fine over an image pyramid.
namespace breathflow {

struct FlowParams {
  int pyramid_levels = 3;  // total levels including full resolution
  double pyramid_scale = 0.5;
  int window_radius = 7;  // Gaussian sigma = window_radius / 2
  int iterations = 3;
  int poly_radius = 5;
  double poly_sigma = 1.1;

  void validate() const;  // throws ValidationError
  friend bool operator==(const FlowParams&, const FlowParams&) = default;
};

struct ImagePlane {
  int width = 0;
  int height = 0;
  std::vector<float> data;

  ImagePlane() = default;
  ImagePlane(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}
  float at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
  float& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

ImagePlane to_plane(const Frame& frame);

/// Per-pixel model f(p + t) ~ t'At + b't + c, with t = (dx, dy) in pixels.
/// A = [a11 a12; a12 a22].
struct PolyExpansion {
  int width = 0;
  int height = 0;
  std::vector<float> b1, b2, a11, a22, a12, c;
};

/// Execution resources shared by the flow routines. Results do not depend on
/// the pool size or on which kernel table is used.
struct FlowContext {
  const simd::KernelTable* kernels = nullptr;  // nullptr: active_kernels()
  WorkerPool* pool = nullptr;                  // nullptr: calling thread only
};

PolyExpansion polynomial_expansion(const Frame& frame, int poly_radius, double poly_sigma);
PolyExpansion polynomial_expansion(const ImagePlane& image, int poly_radius, double poly_sigma,
                                   const FlowContext& ctx = {});

/// Normalized Gaussian taps over [-radius, radius].
std::vector<float> gaussian_taps(int radius, double sigma);

/// Separable correlation with edge replication.
ImagePlane separable_filter(const ImagePlane& src, std::span<const float> row_taps,
                            std::span<const float> col_taps, const FlowContext& ctx = {});

/// Bilinear resampling with pixel-center alignment and edge clamping.
ImagePlane resize_bilinear(const ImagePlane& src, int width, int height);

/// Expansions of every pyramid level of one frame, finest first. A frame's
/// pyramid can be reused as `prev` for the next frame pair.
struct FlowPyramid {
  std::vector<PolyExpansion> levels;
};

class FlowEstimator {
 public:
  explicit FlowEstimator(FlowParams params = {}, FlowContext ctx = {});

  const FlowParams& params() const noexcept { return params_; }

  FlowPyramid prepare(const Frame& frame) const;
  FlowField estimate(const FlowPyramid& prev, const FlowPyramid& curr,
                     const std::optional<FlowField>& initial = std::nullopt) const;
  FlowField estimate(const Frame& prev, const Frame& curr,
                     const std::optional<FlowField>& initial = std::nullopt) const;

 private:
  FlowParams params_;
  FlowContext ctx_;
};

FlowField estimate_flow(const Frame& prev, const Frame& curr, const FlowParams& params = {},
                        const std::optional<FlowField>& initial = std::nullopt);

}  // namespace breathflow
