#pragma once

#include "breathflow/imagery.hpp"

namespace breathflow {

inline constexpr double kDefaultAlpha = 0.52;  // radians

/// Half-angle about the vertical axis inside which flow vectors are kept.
struct DirectionFilterConfig {
  double alpha = kDefaultAlpha;
  void validate() const;  // 0 < alpha < pi/2
};

struct MotionSample {
  int frame_index = 0;
  double aggregate_x = 0.0;
  double aggregate_y = 0.0;
  double angle = 0.0;  // radians, (-pi, pi]
  bool degenerate = false;
};

/// Zeroes every vector whose angle to the vertical axis is not within alpha of
/// straight up or straight down.
FlowField direction_filter(const FlowField& flow, const DirectionFilterConfig& config = {});

bool passes_direction_filter(float vx, float vy, double cos_alpha) noexcept;

/// Sums vectors at mask-true pixels in row-major order. Angle is left at 0.
MotionSample aggregate(const FlowField& flow, const Mask& mask);

/// Image rows grow downward; returns the sample with y pointing up.
MotionSample flip_vertical(const MotionSample& sample) noexcept;

/// Four-quadrant angle of the aggregate from the +x axis, or previous_angle for a
/// degenerate (zero) aggregate.
double angle_of(const MotionSample& sample, double previous_angle) noexcept;

}  // namespace breathflow
