#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <vector>

namespace breathflow {

/// Single-channel 8-bit luminance image with its position in a sequence.
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, std::vector<std::uint8_t> pixels, int index = 0, double fps = 1.0);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int index() const noexcept { return index_; }
  double fps() const noexcept { return fps_; }
  double time_s() const noexcept { return index_ / fps_; }
  std::size_t size() const noexcept { return pixels_.size(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::uint8_t at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }

  Frame with_index(int index, double fps) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
  int index_ = 0;
  double fps_ = 1.0;
};

/// Binary body mask. Stored one byte per pixel (0 or 1).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill);
  Mask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return bits_.size(); }

  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }
  std::size_t count() const noexcept;

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

/// Dense per-pixel displacement (pixels/frame), image coordinates: +x right, +y down.
class FlowField {
 public:
  FlowField() = default;
  FlowField(int width, int height);  // zero field
  FlowField(int width, int height, std::vector<float> vx, std::vector<float> vy);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return vx_.size(); }

  std::span<const float> vx() const noexcept { return vx_; }
  std::span<const float> vy() const noexcept { return vy_; }
  float vx_at(int x, int y) const { return vx_[static_cast<std::size_t>(y) * width_ + x]; }
  float vy_at(int x, int y) const { return vy_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const FlowField&, const FlowField&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> vx_;
  std::vector<float> vy_;
};

// Rec.601 luma with integer weights, rounded half up.
std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept;

// PGM (P5) and PPM (P6, converted to luminance), maxval 255.
Frame read_pnm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const Frame& frame);
void write_pgm(const std::filesystem::path& path, const Mask& mask);

/// Raw stream: "BSR1", u32 width, u32 height, u32 count (little-endian), then planes.
std::vector<Frame> read_raw_stream(const std::filesystem::path& path, double fps);
void write_raw_stream(const std::filesystem::path& path, std::span<const Frame> frames);

/// Loads a directory of .pgm/.ppm files (lexicographic order) or a raw stream file.
std::vector<Frame> load_frame_sequence(const std::filesystem::path& path, double fps);

struct MaskExpectation {
  int width = 0;
  int height = 0;
  std::size_t count = 0;
};

std::vector<Mask> load_mask_sequence(const std::filesystem::path& dir, const MaskExpectation& expected);

/// Flow dump: "BFL1", u32 width, u32 height, u32 count, then per field vx plane, vy plane (f32 LE).
void write_flow_dump(const std::filesystem::path& path, std::span<const FlowField> fields);
std::vector<FlowField> read_flow_dump(const std::filesystem::path& path);

/// Streams fields into a flow dump; the header count is patched on finish().
class FlowDumpWriter {
 public:
  FlowDumpWriter(const std::filesystem::path& path, int width, int height);
  FlowDumpWriter(const FlowDumpWriter&) = delete;
  FlowDumpWriter& operator=(const FlowDumpWriter&) = delete;
  ~FlowDumpWriter();

  void append(const FlowField& field);
  void finish();

 private:
  struct State;
  std::unique_ptr<State> state_;
};

}  // namespace breathflow
