#include "breathflow/masking.hpp"

#include <algorithm>
#include <cstdlib>
#include <vector>

#include "breathflow/error.hpp"

namespace breathflow {

TemporalMaskWindow::TemporalMaskWindow(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ValidationError("mask window capacity must be at least 1");
}

Mask TemporalMaskWindow::push_and_intersect(const Mask& mask) {
  if (!buffer_.empty()) {
    require_same_size(buffer_.front().width(), buffer_.front().height(), mask.width(),
                      mask.height(), "mask window");
  }
  if (buffer_.size() == capacity_) buffer_.pop_front();
  buffer_.push_back(mask);

  std::vector<std::uint8_t> bits(mask.bits().begin(), mask.bits().end());
  for (std::size_t k = 0; k + 1 < buffer_.size(); ++k) {
    const auto other = buffer_[k].bits();
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] &= other[i];
  }
  return Mask(mask.width(), mask.height(), std::move(bits));
}

Frame apply_mask(const Frame& frame, const Mask& mask) {
  require_same_size(frame.width(), frame.height(), mask.width(), mask.height(), "apply_mask");
  std::vector<std::uint8_t> out(frame.pixels().begin(), frame.pixels().end());
  const auto bits = mask.bits();
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!bits[i]) out[i] = 0;
  }
  return Frame(frame.width(), frame.height(), std::move(out), frame.index(), frame.fps());
}

Mask dilate(const Mask& mask, int radius) {
  if (radius < 0) throw ValidationError("dilation radius must be non-negative");
  if (radius == 0) return mask;
  const int w = mask.width();
  const int h = mask.height();
  const auto src = mask.bits();
  // Separable max filter: square element = row pass then column pass.
  std::vector<std::uint8_t> rows(src.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!src[static_cast<std::size_t>(y) * w + x]) continue;
      const int x0 = std::max(0, x - radius);
      const int x1 = std::min(w - 1, x + radius);
      std::fill(rows.begin() + static_cast<std::ptrdiff_t>(y) * w + x0,
                rows.begin() + static_cast<std::ptrdiff_t>(y) * w + x1 + 1, std::uint8_t{1});
    }
  }
  std::vector<std::uint8_t> out(src.size(), 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      if (!rows[static_cast<std::size_t>(y) * w + x]) continue;
      const int y0 = std::max(0, y - radius);
      const int y1 = std::min(h - 1, y + radius);
      for (int yy = y0; yy <= y1; ++yy) out[static_cast<std::size_t>(yy) * w + x] = 1;
    }
  }
  return Mask(w, h, std::move(out));
}

Mask fallback_segment(const Frame& prev, const Frame& curr, const FallbackSegmentParams& params) {
  require_same_size(prev.width(), prev.height(), curr.width(), curr.height(), "fallback_segment");
  if (params.threshold < 1 || params.threshold > 255)
    throw ValidationError("fallback threshold must be in [1, 255]");
  const auto a = prev.pixels();
  const auto b = curr.pixels();
  std::vector<std::uint8_t> bits(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    bits[i] = std::abs(int{b[i]} - int{a[i]}) >= params.threshold ? 1 : 0;
  return dilate(Mask(curr.width(), curr.height(), std::move(bits)), params.dilation);
}

}  // namespace breathflow
