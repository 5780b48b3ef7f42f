#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include "breathflow/imagery.hpp"
#include "breathflow/optflow.hpp"

namespace testing {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("breathflow_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void spit(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

// Smooth random texture as a float plane in [0, 255]: uniform noise, Gaussian blur, stretched.
inline breathflow::ImagePlane smooth_texture(int width, int height, std::uint32_t seed,
                                             double blur_sigma = 1.5) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<float> u(0.0f, 255.0f);
  breathflow::ImagePlane noise(width, height);
  for (float& v : noise.data) v = u(rng);
  const int radius = static_cast<int>(std::ceil(3.0 * blur_sigma));
  const auto taps = breathflow::gaussian_taps(radius, blur_sigma);
  breathflow::ImagePlane out = breathflow::separable_filter(noise, taps, taps);
  const auto [lo, hi] = std::minmax_element(out.data.begin(), out.data.end());
  const float a = *lo, b = *hi;
  for (float& v : out.data) v = 20.0f + 215.0f * (v - a) / (b - a);
  return out;
}

inline double sample_clamped(const breathflow::ImagePlane& p, double x, double y) {
  x = std::clamp(x, 0.0, p.width - 1.0);
  y = std::clamp(y, 0.0, p.height - 1.0);
  const int x0 = std::min(static_cast<int>(x), p.width - 2);
  const int y0 = std::min(static_cast<int>(y), p.height - 2);
  const double fx = x - x0, fy = y - y0;
  return (1 - fy) * ((1 - fx) * p.at(x0, y0) + fx * p.at(x0 + 1, y0)) +
         fy * ((1 - fx) * p.at(x0, y0 + 1) + fx * p.at(x0 + 1, y0 + 1));
}

// Content moved by (dx, dy): out(x, y) = src(x - dx, y - dy), bilinear, edges replicated.
inline breathflow::Frame shifted_frame(const breathflow::ImagePlane& src, double dx, double dy) {
  std::vector<std::uint8_t> px(static_cast<std::size_t>(src.width) * src.height);
  for (int y = 0; y < src.height; ++y)
    for (int x = 0; x < src.width; ++x) {
      const double v = sample_clamped(src, x - dx, y - dy);
      px[static_cast<std::size_t>(y) * src.width + x] =
          static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
    }
  return breathflow::Frame(src.width, src.height, std::move(px));
}

struct FlowError {
  double mean_vx = 0.0;
  double mean_vy = 0.0;
  double mean_epe = 0.0;
};

// Interior statistics, `border` pixels excluded on every side.
inline FlowError interior_error(const breathflow::FlowField& f, double ex, double ey, int border) {
  FlowError e;
  std::size_t n = 0;
  for (int y = border; y < f.height() - border; ++y)
    for (int x = border; x < f.width() - border; ++x) {
      const double vx = f.vx_at(x, y), vy = f.vy_at(x, y);
      e.mean_vx += vx;
      e.mean_vy += vy;
      e.mean_epe += std::hypot(vx - ex, vy - ey);
      ++n;
    }
  e.mean_vx /= n;
  e.mean_vy /= n;
  e.mean_epe /= n;
  return e;
}

}  // namespace testing
