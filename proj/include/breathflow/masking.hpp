#pragma once

#include <cstddef>
#include <deque>

#include "breathflow/imagery.hpp"

namespace breathflow {

/// Rolling AND over the most recent `capacity` masks, current one included.
///
/// Before the window fills, the intersection runs over whatever is buffered, so the
/// first output equals the first mask.
class TemporalMaskWindow {
 public:
  static constexpr std::size_t kDefaultCapacity = 10;

  explicit TemporalMaskWindow(std::size_t capacity = kDefaultCapacity);

  Mask push_and_intersect(const Mask& mask);

  std::size_t capacity() const noexcept { return capacity_; }
  std::size_t size() const noexcept { return buffer_.size(); }
  void clear() noexcept { buffer_.clear(); }

 private:
  std::size_t capacity_;
  std::deque<Mask> buffer_;
};

/// Pixels outside the mask become black.
Frame apply_mask(const Frame& frame, const Mask& mask);

struct FallbackSegmentParams {
  int threshold = 8;  // luminance delta, [1, 255]
  int dilation = 5;   // square structuring element radius, pixels
};

/// Motion-energy mask: |curr - prev| >= threshold, dilated. Stand-in when no
/// segmentation masks are supplied.
Mask fallback_segment(const Frame& prev, const Frame& curr, const FallbackSegmentParams& params = {});

Mask dilate(const Mask& mask, int radius);

}  // namespace breathflow
