#include "breathflow/motion.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "breathflow/error.hpp"

namespace breathflow {

void DirectionFilterConfig::validate() const {
  if (!(alpha > 0.0 && alpha < std::numbers::pi / 2))
    throw ValidationError("alpha must lie in (0, pi/2)");
}

bool passes_direction_filter(float vx, float vy, double cos_alpha) noexcept {
  // |beta| < alpha or |beta| > pi - alpha  <=>  |vy| > |v| cos(alpha)
  const double x = vx;
  const double y = vy;
  if (x == 0.0 && y == 0.0) return false;
  return std::abs(y) > std::hypot(x, y) * cos_alpha;
}

FlowField direction_filter(const FlowField& flow, const DirectionFilterConfig& config) {
  config.validate();
  const double cos_alpha = std::cos(config.alpha);
  std::vector<float> vx(flow.vx().begin(), flow.vx().end());
  std::vector<float> vy(flow.vy().begin(), flow.vy().end());
  for (std::size_t i = 0; i < vx.size(); ++i) {
    if (!passes_direction_filter(vx[i], vy[i], cos_alpha)) {
      vx[i] = 0.0f;
      vy[i] = 0.0f;
    }
  }
  return FlowField(flow.width(), flow.height(), std::move(vx), std::move(vy));
}

MotionSample aggregate(const FlowField& flow, const Mask& mask) {
  require_same_size(flow.width(), flow.height(), mask.width(), mask.height(), "aggregate");
  const auto bits = mask.bits();
  const auto vx = flow.vx();
  const auto vy = flow.vy();
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (!bits[i]) continue;
    sx += vx[i];
    sy += vy[i];
  }
  MotionSample s;
  s.aggregate_x = sx;
  s.aggregate_y = sy;
  s.degenerate = sx == 0.0 && sy == 0.0;
  return s;
}

MotionSample flip_vertical(const MotionSample& sample) noexcept {
  MotionSample s = sample;
  s.aggregate_y = sample.aggregate_y == 0.0 ? 0.0 : -sample.aggregate_y;
  return s;
}

double angle_of(const MotionSample& sample, double previous_angle) noexcept {
  if (sample.degenerate || (sample.aggregate_x == 0.0 && sample.aggregate_y == 0.0))
    return previous_angle;
  const double a = std::atan2(sample.aggregate_y, sample.aggregate_x);
  return a <= -std::numbers::pi ? std::numbers::pi : a;
}

}  // namespace breathflow
