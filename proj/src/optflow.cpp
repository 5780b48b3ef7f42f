#include "breathflow/optflow.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "breathflow/error.hpp"

namespace breathflow {

namespace {

const simd::KernelTable& kernels_of(const FlowContext& ctx) {
  return ctx.kernels ? *ctx.kernels : simd::active_kernels();
}

void for_rows(const FlowContext& ctx, int rows,
              const std::function<void(std::size_t, std::size_t)>& body) {
  if (ctx.pool) {
    ctx.pool->parallel_for(static_cast<std::size_t>(rows), body);
  } else {
    body(0, static_cast<std::size_t>(rows));
  }
}

int clamp_index(int i, int n) { return std::clamp(i, 0, n - 1); }

// Row pass: out[j] = correlate(pad(src row), taps[j]) for every tap set.
void row_pass(const ImagePlane& src, std::span<const std::vector<float>> tap_sets,
              std::span<ImagePlane> out, const FlowContext& ctx) {
  const auto& k = kernels_of(ctx);
  const int w = src.width;
  const int r = static_cast<int>(tap_sets.front().size() / 2);
  for_rows(ctx, src.height, [&](std::size_t y0, std::size_t y1) {
    std::vector<float> padded(static_cast<std::size_t>(w + 2 * r));
    for (std::size_t y = y0; y < y1; ++y) {
      const float* row = src.data.data() + y * w;
      for (int i = 0; i < w + 2 * r; ++i) padded[i] = row[clamp_index(i - r, w)];
      for (std::size_t j = 0; j < tap_sets.size(); ++j) {
        k.correlate(padded, tap_sets[j],
                    std::span<float>(out[j].data.data() + y * w, static_cast<std::size_t>(w)));
      }
    }
  });
}

// Column pass on one plane with edge replication.
void column_pass(const ImagePlane& src, std::span<const float> taps, ImagePlane& dst,
                 const FlowContext& ctx) {
  const auto& k = kernels_of(ctx);
  const int w = src.width;
  const int h = src.height;
  const int r = static_cast<int>(taps.size() / 2);
  for_rows(ctx, h, [&](std::size_t y0, std::size_t y1) {
    std::vector<const float*> rows(taps.size());
    for (std::size_t y = y0; y < y1; ++y) {
      for (int t = 0; t <= 2 * r; ++t)
        rows[t] = src.data.data() +
                  static_cast<std::size_t>(clamp_index(static_cast<int>(y) + t - r, h)) * w;
      k.combine_rows(rows, taps,
                     std::span<float>(dst.data.data() + y * w, static_cast<std::size_t>(w)));
    }
  });
}

struct LevelSize {
  int width;
  int height;
};

std::vector<LevelSize> level_sizes(int width, int height, const FlowParams& p) {
  std::vector<LevelSize> sizes{{width, height}};
  const int min_side = 2 * p.poly_radius + 1;
  double scale = 1.0;
  for (int level = 1; level < p.pyramid_levels; ++level) {
    scale *= p.pyramid_scale;
    const int w = static_cast<int>(std::lround(width * scale));
    const int h = static_cast<int>(std::lround(height * scale));
    if (w < min_side || h < min_side) break;
    sizes.push_back({w, h});
  }
  return sizes;
}

// Samples the five expansion channels at a fractional position, clamped to the image.
struct Coeffs {
  float b1, b2, a11, a22, a12;
};

Coeffs sample_bilinear(const PolyExpansion& e, float fx, float fy) {
  fx = std::clamp(fx, 0.0f, static_cast<float>(e.width - 1));
  fy = std::clamp(fy, 0.0f, static_cast<float>(e.height - 1));
  const int x0 = static_cast<int>(fx);
  const int y0 = static_cast<int>(fy);
  const int x1 = std::min(x0 + 1, e.width - 1);
  const int y1 = std::min(y0 + 1, e.height - 1);
  const float wx = fx - static_cast<float>(x0);
  const float wy = fy - static_cast<float>(y0);
  const std::size_t i00 = static_cast<std::size_t>(y0) * e.width + x0;
  const std::size_t i01 = static_cast<std::size_t>(y0) * e.width + x1;
  const std::size_t i10 = static_cast<std::size_t>(y1) * e.width + x0;
  const std::size_t i11 = static_cast<std::size_t>(y1) * e.width + x1;
  auto lerp = [&](const std::vector<float>& ch) {
    const float top = ch[i00] + wx * (ch[i01] - ch[i00]);
    const float bottom = ch[i10] + wx * (ch[i11] - ch[i10]);
    return top + wy * (bottom - top);
  };
  return {lerp(e.b1), lerp(e.b2), lerp(e.a11), lerp(e.a22), lerp(e.a12)};
}

// Normal equations G d = h with G = A'A, h = A'db per pixel.
struct NormalEquations {
  ImagePlane g11, g12, g22, h1, h2;
};

void build_normal_equations(const PolyExpansion& prev, const PolyExpansion& curr,
                            const ImagePlane& flow_x, const ImagePlane& flow_y,
                            NormalEquations& eq, const FlowContext& ctx) {
  const int w = prev.width;
  for_rows(ctx, prev.height, [&](std::size_t y0, std::size_t y1) {
    for (std::size_t y = y0; y < y1; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = y * w + x;
        const float dx = flow_x.data[i];
        const float dy = flow_y.data[i];
        const Coeffs warped =
            sample_bilinear(curr, static_cast<float>(x) + dx, static_cast<float>(y) + dy);
        const float a11 = 0.5f * (prev.a11[i] + warped.a11);
        const float a22 = 0.5f * (prev.a22[i] + warped.a22);
        const float a12 = 0.5f * (prev.a12[i] + warped.a12);
        const float db1 = -0.5f * (warped.b1 - prev.b1[i]) + (a11 * dx + a12 * dy);
        const float db2 = -0.5f * (warped.b2 - prev.b2[i]) + (a12 * dx + a22 * dy);
        eq.g11.data[i] = a11 * a11 + a12 * a12;
        eq.g12.data[i] = a12 * (a11 + a22);
        eq.g22.data[i] = a22 * a22 + a12 * a12;
        eq.h1.data[i] = a11 * db1 + a12 * db2;
        eq.h2.data[i] = a12 * db1 + a22 * db2;
      }
    }
  });
}

ImagePlane scaled(const ImagePlane& p, float factor) {
  ImagePlane out = p;
  for (float& v : out.data) v *= factor;
  return out;
}

}  // namespace

void FlowParams::validate() const {
  if (pyramid_levels < 1) throw ValidationError("pyramid_levels must be >= 1");
  if (!(pyramid_scale > 0.0 && pyramid_scale < 1.0))
    throw ValidationError("pyramid_scale must lie in (0, 1)");
  if (window_radius < 1) throw ValidationError("window_radius must be >= 1");
  if (iterations < 1) throw ValidationError("iterations must be >= 1");
  if (poly_radius < 1) throw ValidationError("poly_radius must be >= 1");
  if (!(poly_sigma > 0.0)) throw ValidationError("poly_sigma must be > 0");
}

ImagePlane to_plane(const Frame& frame) {
  ImagePlane p(frame.width(), frame.height());
  std::transform(frame.pixels().begin(), frame.pixels().end(), p.data.begin(),
                 [](std::uint8_t v) { return static_cast<float>(v); });
  return p;
}

std::vector<float> gaussian_taps(int radius, double sigma) {
  std::vector<double> g(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int t = -radius; t <= radius; ++t) {
    g[t + radius] = std::exp(-(t * t) / (2.0 * sigma * sigma));
    sum += g[t + radius];
  }
  std::vector<float> taps(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) taps[i] = static_cast<float>(g[i] / sum);
  return taps;
}

ImagePlane separable_filter(const ImagePlane& src, std::span<const float> row_taps,
                            std::span<const float> col_taps, const FlowContext& ctx) {
  ImagePlane rows(src.width, src.height);
  const std::vector<float> row_set(row_taps.begin(), row_taps.end());
  row_pass(src, std::span(&row_set, 1), std::span(&rows, 1), ctx);
  ImagePlane out(src.width, src.height);
  column_pass(rows, col_taps, out, ctx);
  return out;
}

ImagePlane resize_bilinear(const ImagePlane& src, int width, int height) {
  ImagePlane out(width, height);
  const double sx = static_cast<double>(src.width) / width;
  const double sy = static_cast<double>(src.height) / height;
  for (int y = 0; y < height; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(src.height - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, src.height - 1);
    const float wy = static_cast<float>(fy - y0);
    for (int x = 0; x < width; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(src.width - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, src.width - 1);
      const float wx = static_cast<float>(fx - x0);
      const float top = src.at(x0, y0) + wx * (src.at(x1, y0) - src.at(x0, y0));
      const float bottom = src.at(x0, y1) + wx * (src.at(x1, y1) - src.at(x0, y1));
      out.at(x, y) = top + wy * (bottom - top);
    }
  }
  return out;
}

PolyExpansion polynomial_expansion(const Frame& frame, int poly_radius, double poly_sigma) {
  return polynomial_expansion(to_plane(frame), poly_radius, poly_sigma);
}

PolyExpansion polynomial_expansion(const ImagePlane& image, int poly_radius, double poly_sigma,
                                   const FlowContext& ctx) {
  if (poly_radius < 1) throw ValidationError("poly_radius must be >= 1");
  if (!(poly_sigma > 0.0)) throw ValidationError("poly_sigma must be > 0");
  const int side = 2 * poly_radius + 1;
  if (image.width < side || image.height < side) {
    throw DimensionError("image " + std::to_string(image.width) + "x" +
                          std::to_string(image.height) + " smaller than expansion neighborhood " +
                          std::to_string(side) + "x" + std::to_string(side));
  }

  // 1-D applicability and its moments.
  const std::vector<float> g = gaussian_taps(poly_radius, poly_sigma);
  std::vector<float> gt(g.size()), gtt(g.size());
  double m0 = 0.0, m2 = 0.0, m4 = 0.0;
  for (int t = -poly_radius; t <= poly_radius; ++t) {
    const std::size_t i = static_cast<std::size_t>(t + poly_radius);
    gt[i] = g[i] * static_cast<float>(t);
    gtt[i] = g[i] * static_cast<float>(t * t);
    m0 += g[i];
    m2 += static_cast<double>(g[i]) * t * t;
    m4 += static_cast<double>(g[i]) * t * t * t * t;
  }

  // Projections onto the weighted basis {1, x, y, x^2, y^2, xy}.
  const std::array<std::vector<float>, 3> row_sets{g, gt, gtt};
  std::array<ImagePlane, 3> rows{ImagePlane(image.width, image.height),
                                 ImagePlane(image.width, image.height),
                                 ImagePlane(image.width, image.height)};
  row_pass(image, row_sets, rows, ctx);
  ImagePlane p1(image.width, image.height), py(p1), pyy(p1), px(p1), pxy(p1), pxx(p1);
  column_pass(rows[0], g, p1, ctx);
  column_pass(rows[0], gt, py, ctx);
  column_pass(rows[0], gtt, pyy, ctx);
  column_pass(rows[1], g, px, ctx);
  column_pass(rows[1], gt, pxy, ctx);
  column_pass(rows[2], g, pxx, ctx);

  // The Gram matrix decouples into {x}, {y}, {xy} and the coupled {1, x^2, y^2}
  // block [[m0^2, m0m2, m0m2], [m0m2, m0m4, m2^2], [m0m2, m2^2, m0m4]].
  const double gx = 1.0 / (m0 * m2);
  const double gxy = 1.0 / (m2 * m2);
  const double d = m0 * m4 - m2 * m2;  // x^2 - y^2 direction
  // Block restricted to {1, s = x^2 + y^2 sum direction}.
  const double s11 = m0 * m0, s12 = 2.0 * m0 * m2, s22 = 2.0 * (m0 * m4 + m2 * m2);
  const double sdet = s11 * s22 - s12 * s12;
  const float k_bx = static_cast<float>(gx);
  const float k_axy = static_cast<float>(0.5 * gxy);
  const float k_diff = static_cast<float>(0.5 / d);
  // c = (s22*P1 - s12*Q)/sdet, t = (s11*Q - s12*P1)/sdet with Q = (Pxx + Pyy), where
  // a11 + a22 = 2t.
  const float c_p1 = static_cast<float>(s22 / sdet);
  const float c_q = static_cast<float>(-s12 / sdet);
  const float t_p1 = static_cast<float>(-s12 / sdet);
  const float t_q = static_cast<float>(s11 / sdet);

  PolyExpansion out;
  out.width = image.width;
  out.height = image.height;
  const std::size_t n = image.data.size();
  for (auto* ch : {&out.b1, &out.b2, &out.a11, &out.a22, &out.a12, &out.c}) ch->resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const float q = pxx.data[i] + pyy.data[i];
    const float t = t_p1 * p1.data[i] + t_q * q;  // (a11 + a22) / 2
    const float half_diff = k_diff * (pxx.data[i] - pyy.data[i]);
    out.b1[i] = k_bx * px.data[i];
    out.b2[i] = k_bx * py.data[i];
    out.a11[i] = t + half_diff;
    out.a22[i] = t - half_diff;
    out.a12[i] = k_axy * pxy.data[i];
    out.c[i] = c_p1 * p1.data[i] + c_q * q;
  }
  return out;
}

FlowEstimator::FlowEstimator(FlowParams params, FlowContext ctx)
    : params_(params), ctx_(ctx) {
  params_.validate();
}

FlowPyramid FlowEstimator::prepare(const Frame& frame) const {
  const auto sizes = level_sizes(frame.width(), frame.height(), params_);
  const ImagePlane base = to_plane(frame);
  FlowPyramid pyr;
  pyr.levels.reserve(sizes.size());
  double scale = 1.0;
  for (std::size_t level = 0; level < sizes.size(); ++level) {
    if (level == 0) {
      pyr.levels.push_back(polynomial_expansion(base, params_.poly_radius, params_.poly_sigma, ctx_));
      continue;
    }
    scale *= params_.pyramid_scale;
    // Anti-alias blur proportional to the decimation factor.
    const double sigma = (1.0 / scale - 1.0) * 0.5;
    const int ksize = static_cast<int>(std::lround(sigma * 5.0)) | 1;
    const auto taps = gaussian_taps(std::max(1, ksize / 2), sigma);
    const ImagePlane blurred = separable_filter(base, taps, taps, ctx_);
    const ImagePlane small = resize_bilinear(blurred, sizes[level].width, sizes[level].height);
    pyr.levels.push_back(
        polynomial_expansion(small, params_.poly_radius, params_.poly_sigma, ctx_));
  }
  return pyr;
}

FlowField FlowEstimator::estimate(const FlowPyramid& prev, const FlowPyramid& curr,
                                  const std::optional<FlowField>& initial) const {
  if (prev.levels.empty() || curr.levels.empty()) throw ValidationError("empty flow pyramid");
  const PolyExpansion& p0 = prev.levels.front();
  const PolyExpansion& c0 = curr.levels.front();
  require_same_size(p0.width, p0.height, c0.width, c0.height, "estimate_flow");
  if (prev.levels.size() != curr.levels.size()) throw ValidationError("pyramid depth mismatch");
  if (initial) require_same_size(p0.width, p0.height, initial->width(), initial->height(),
                                 "estimate_flow initial");

  const auto& k = kernels_of(ctx_);
  const auto window = gaussian_taps(params_.window_radius, params_.window_radius / 2.0);
  const int levels = static_cast<int>(prev.levels.size());

  ImagePlane fx, fy;
  for (int level = levels - 1; level >= 0; --level) {
    const PolyExpansion& pe = prev.levels[level];
    const PolyExpansion& ce = curr.levels[level];
    if (level == levels - 1) {
      if (initial) {
        const float s = static_cast<float>(std::pow(params_.pyramid_scale, level));
        ImagePlane ix(initial->width(), initial->height());
        ImagePlane iy(initial->width(), initial->height());
        std::copy(initial->vx().begin(), initial->vx().end(), ix.data.begin());
        std::copy(initial->vy().begin(), initial->vy().end(), iy.data.begin());
        fx = scaled(resize_bilinear(ix, pe.width, pe.height), s);
        fy = scaled(resize_bilinear(iy, pe.width, pe.height), s);
      } else {
        fx = ImagePlane(pe.width, pe.height);
        fy = ImagePlane(pe.width, pe.height);
      }
    } else {
      const float up = static_cast<float>(1.0 / params_.pyramid_scale);
      fx = scaled(resize_bilinear(fx, pe.width, pe.height), up);
      fy = scaled(resize_bilinear(fy, pe.width, pe.height), up);
    }

    NormalEquations eq{ImagePlane(pe.width, pe.height), ImagePlane(pe.width, pe.height),
                       ImagePlane(pe.width, pe.height), ImagePlane(pe.width, pe.height),
                       ImagePlane(pe.width, pe.height)};
    for (int it = 0; it < params_.iterations; ++it) {
      build_normal_equations(pe, ce, fx, fy, eq, ctx_);
      const ImagePlane s11 = separable_filter(eq.g11, window, window, ctx_);
      const ImagePlane s12 = separable_filter(eq.g12, window, window, ctx_);
      const ImagePlane s22 = separable_filter(eq.g22, window, window, ctx_);
      const ImagePlane t1 = separable_filter(eq.h1, window, window, ctx_);
      const ImagePlane t2 = separable_filter(eq.h2, window, window, ctx_);
      const int w = pe.width;
      for_rows(ctx_, pe.height, [&](std::size_t y0, std::size_t y1) {
        const std::size_t off = y0 * w;
        const std::size_t len = (y1 - y0) * w;
        auto sub = [&](const ImagePlane& p) { return std::span<const float>(p.data).subspan(off, len); };
        k.solve2x2(sub(s11), sub(s12), sub(s22), sub(t1), sub(t2),
                   std::span<float>(fx.data).subspan(off, len),
                   std::span<float>(fy.data).subspan(off, len));
      });
    }
  }
  return FlowField(fx.width, fx.height, std::move(fx.data), std::move(fy.data));
}

FlowField FlowEstimator::estimate(const Frame& prev, const Frame& curr,
                                  const std::optional<FlowField>& initial) const {
  require_same_size(prev.width(), prev.height(), curr.width(), curr.height(), "estimate_flow");
  return estimate(prepare(prev), prepare(curr), initial);
}

FlowField estimate_flow(const Frame& prev, const Frame& curr, const FlowParams& params,
                        const std::optional<FlowField>& initial) {
  return FlowEstimator(params).estimate(prev, curr, initial);
}

}  // namespace breathflow
