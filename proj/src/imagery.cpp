#include "breathflow/imagery.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "breathflow/error.hpp"

namespace breathflow {

namespace fs = std::filesystem;

namespace {

constexpr std::array<char, 4> kStreamMagic{'B', 'S', 'R', '1'};
constexpr std::array<char, 4> kFlowMagic{'B', 'F', 'L', '1'};
constexpr std::size_t kHeaderBytes = 16;

void put_u32(std::ostream& out, std::uint32_t v) {
  const std::array<char, 4> bytes{static_cast<char>(v & 0xff), static_cast<char>((v >> 8) & 0xff),
                                  static_cast<char>((v >> 16) & 0xff),
                                  static_cast<char>((v >> 24) & 0xff)};
  out.write(bytes.data(), 4);
}

std::uint32_t get_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

void put_f32(std::ostream& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::vector<unsigned char> slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw LoadError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_header(std::ostream& out, const std::array<char, 4>& magic, int width, int height,
                  std::uint32_t count) {
  out.write(magic.data(), 4);
  put_u32(out, static_cast<std::uint32_t>(width));
  put_u32(out, static_cast<std::uint32_t>(height));
  put_u32(out, count);
}

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  int width = 0;
  int height = 0;
  int maxval = 0;
  std::size_t data_offset = 0;
};

PnmHeader parse_pnm_header(const std::vector<unsigned char>& bytes, const fs::path& path) {
  auto fail = [&](const std::string& why) -> PnmHeader {
    throw LoadError(path.string() + ": " + why);
  };
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    return fail("not a binary PGM/PPM file");
  PnmHeader h;
  h.kind = static_cast<char>(bytes[1]);
  std::size_t pos = 2;
  std::array<long, 3> values{};
  for (long& value : values) {
    // whitespace and comments
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) return fail("truncated header");
    value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos] - '0');
      if (value > 1'000'000) return fail("header value out of range");
      ++pos;
    }
  }
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) return fail("truncated header");
  ++pos;  // exactly one whitespace byte precedes the raster
  h.width = static_cast<int>(values[0]);
  h.height = static_cast<int>(values[1]);
  h.maxval = static_cast<int>(values[2]);
  h.data_offset = pos;
  if (h.width <= 0 || h.height <= 0) return fail("empty image");
  if (h.maxval != 255) return fail("maxval must be 255, got " + std::to_string(h.maxval));
  const std::size_t channels = h.kind == '6' ? 3 : 1;
  const std::size_t need = static_cast<std::size_t>(h.width) * h.height * channels;
  if (bytes.size() - pos < need) return fail("truncated raster");
  return h;
}

std::vector<fs::path> sorted_files(const fs::path& dir, std::initializer_list<const char*> exts) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const std::string ext = entry.path().extension().string();
    for (const char* e : exts) {
      if (ext == e) {
        files.push_back(entry.path());
        break;
      }
    }
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return files;
}

void write_pgm_bytes(const fs::path& path, int width, int height,
                     std::span<const std::uint8_t> data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  const std::string header =
      "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw LoadError("write failed: " + path.string());
}

}  // namespace

Frame::Frame(int width, int height, std::vector<std::uint8_t> pixels, int index, double fps)
    : width_(width), height_(height), pixels_(std::move(pixels)), index_(index), fps_(fps) {
  if (width <= 0 || height <= 0) throw ValidationError("frame dimensions must be positive");
  if (pixels_.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("frame pixel count does not match dimensions");
  if (!(fps > 0.0) || !std::isfinite(fps)) throw ValidationError("fps must be positive");
  if (index < 0) throw ValidationError("frame index must be non-negative");
}

Frame Frame::with_index(int index, double fps) const {
  return Frame(width_, height_, pixels_, index, fps);
}

Mask::Mask(int width, int height, bool fill)
    : width_(width),
      height_(height),
      bits_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), fill ? 1 : 0) {
  if (width <= 0 || height <= 0) throw ValidationError("mask dimensions must be positive");
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  if (width <= 0 || height <= 0) throw ValidationError("mask dimensions must be positive");
  if (bits_.size() != static_cast<std::size_t>(width) * height)
    throw ValidationError("mask bit count does not match dimensions");
  for (auto& b : bits_) b = b != 0 ? 1 : 0;
}

std::size_t Mask::count() const noexcept {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

FlowField::FlowField(int width, int height)
    : width_(width),
      height_(height),
      vx_(static_cast<std::size_t>(std::max(width, 0)) * std::max(height, 0), 0.0f),
      vy_(vx_.size(), 0.0f) {
  if (width <= 0 || height <= 0) throw ValidationError("flow dimensions must be positive");
}

FlowField::FlowField(int width, int height, std::vector<float> vx, std::vector<float> vy)
    : width_(width), height_(height), vx_(std::move(vx)), vy_(std::move(vy)) {
  if (width <= 0 || height <= 0) throw ValidationError("flow dimensions must be positive");
  const std::size_t n = static_cast<std::size_t>(width) * height;
  if (vx_.size() != n || vy_.size() != n)
    throw ValidationError("flow component length does not match dimensions");
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::isfinite(vx_[i]) || !std::isfinite(vy_[i]))
      throw ValidationError("flow field contains non-finite values");
  }
}

std::uint8_t luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) noexcept {
  const unsigned sum = 299u * r + 587u * g + 114u * b;
  return static_cast<std::uint8_t>((sum + 500u) / 1000u);
}

Frame read_pnm(const fs::path& path) {
  const auto bytes = slurp(path);
  const PnmHeader h = parse_pnm_header(bytes, path);
  const std::size_t n = static_cast<std::size_t>(h.width) * h.height;
  std::vector<std::uint8_t> pixels(n);
  const unsigned char* src = bytes.data() + h.data_offset;
  if (h.kind == '5') {
    std::memcpy(pixels.data(), src, n);
  } else {
    for (std::size_t i = 0; i < n; ++i)
      pixels[i] = luminance(src[3 * i], src[3 * i + 1], src[3 * i + 2]);
  }
  return Frame(h.width, h.height, std::move(pixels));
}

void write_pgm(const fs::path& path, const Frame& frame) {
  write_pgm_bytes(path, frame.width(), frame.height(), frame.pixels());
}

void write_pgm(const fs::path& path, const Mask& mask) {
  std::vector<std::uint8_t> data(mask.size());
  std::transform(mask.bits().begin(), mask.bits().end(), data.begin(),
                 [](std::uint8_t b) { return static_cast<std::uint8_t>(b ? 255 : 0); });
  write_pgm_bytes(path, mask.width(), mask.height(), data);
}

std::vector<Frame> read_raw_stream(const fs::path& path, double fps) {
  const auto bytes = slurp(path);
  if (bytes.size() < kHeaderBytes || !std::equal(kStreamMagic.begin(), kStreamMagic.end(), bytes.begin()))
    throw LoadError(path.string() + ": missing BSR1 header");
  const std::uint32_t width = get_u32(bytes.data() + 4);
  const std::uint32_t height = get_u32(bytes.data() + 8);
  const std::uint32_t count = get_u32(bytes.data() + 12);
  if (width == 0 || height == 0) throw LoadError(path.string() + ": empty frame size in header");
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  if (count == 0) throw SequenceError(path.string() + ": no frames");
  if ((bytes.size() - kHeaderBytes) / plane < count)
    throw LoadError(path.string() + ": truncated stream, frame " +
                    std::to_string((bytes.size() - kHeaderBytes) / plane) + " incomplete");
  std::vector<Frame> frames;
  frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto* begin = bytes.data() + kHeaderBytes + i * plane;
    frames.emplace_back(static_cast<int>(width), static_cast<int>(height),
                        std::vector<std::uint8_t>(begin, begin + plane), static_cast<int>(i), fps);
  }
  return frames;
}

void write_raw_stream(const fs::path& path, std::span<const Frame> frames) {
  if (frames.empty()) throw SequenceError("no frames");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw LoadError("cannot write " + path.string());
  const int w = frames.front().width();
  const int h = frames.front().height();
  write_header(out, kStreamMagic, w, h, static_cast<std::uint32_t>(frames.size()));
  for (const Frame& f : frames) {
    require_same_size(w, h, f.width(), f.height(), "raw stream");
    out.write(reinterpret_cast<const char*>(f.pixels().data()),
              static_cast<std::streamsize>(f.size()));
  }
  if (!out) throw LoadError("write failed: " + path.string());
}

std::vector<Frame> load_frame_sequence(const fs::path& path, double fps) {
  if (!(fps > 0.0)) throw ValidationError("fps must be positive");
  if (!fs::exists(path)) throw LoadError("no such file or directory: " + path.string());
  if (!fs::is_directory(path)) return read_raw_stream(path, fps);

  const auto files = sorted_files(path, {".pgm", ".ppm", ".pnm"});
  if (files.empty()) throw SequenceError(path.string() + ": no frames");
  std::vector<Frame> frames;
  frames.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    Frame f = read_pnm(files[i]);
    if (!frames.empty() &&
        (f.width() != frames.front().width() || f.height() != frames.front().height())) {
      throw SequenceError("frame " + std::to_string(i) + " (" + files[i].filename().string() +
                          ") is " + std::to_string(f.width()) + "x" + std::to_string(f.height()) +
                          ", expected " + std::to_string(frames.front().width()) + "x" +
                          std::to_string(frames.front().height()));
    }
    frames.push_back(f.with_index(static_cast<int>(i), fps));
  }
  return frames;
}

std::vector<Mask> load_mask_sequence(const fs::path& dir, const MaskExpectation& expected) {
  if (!fs::is_directory(dir)) throw LoadError("mask directory not found: " + dir.string());
  const auto files = sorted_files(dir, {".pgm", ".pnm"});
  if (files.size() != expected.count) {
    throw SequenceError("mask count mismatch: " + std::to_string(files.size()) +
                        " != " + std::to_string(expected.count));
  }
  std::vector<Mask> masks;
  masks.reserve(files.size());
  for (std::size_t i = 0; i < files.size(); ++i) {
    const Frame img = read_pnm(files[i]);
    if (img.width() != expected.width || img.height() != expected.height) {
      throw SequenceError("mask " + std::to_string(i) + " (" + files[i].filename().string() +
                          ") is " + std::to_string(img.width()) + "x" +
                          std::to_string(img.height()) + ", expected " +
                          std::to_string(expected.width) + "x" + std::to_string(expected.height));
    }
    std::vector<std::uint8_t> bits(img.pixels().begin(), img.pixels().end());
    masks.emplace_back(img.width(), img.height(), std::move(bits));
  }
  return masks;
}

struct FlowDumpWriter::State {
  std::ofstream out;
  fs::path path;
  int width = 0;
  int height = 0;
  std::uint32_t count = 0;
  bool finished = false;
};

FlowDumpWriter::FlowDumpWriter(const fs::path& path, int width, int height)
    : state_(std::make_unique<State>()) {
  state_->out.open(path, std::ios::binary);
  if (!state_->out) throw LoadError("cannot write " + path.string());
  state_->path = path;
  state_->width = width;
  state_->height = height;
  write_header(state_->out, kFlowMagic, width, height, 0);
}

FlowDumpWriter::~FlowDumpWriter() {
  try {
    finish();
  } catch (...) {
  }
}

void FlowDumpWriter::append(const FlowField& field) {
  require_same_size(state_->width, state_->height, field.width(), field.height(), "flow dump");
  for (float v : field.vx()) put_f32(state_->out, v);
  for (float v : field.vy()) put_f32(state_->out, v);
  ++state_->count;
}

void FlowDumpWriter::finish() {
  if (state_->finished) return;
  state_->finished = true;
  state_->out.seekp(12);
  put_u32(state_->out, state_->count);
  state_->out.close();
  if (!state_->out) throw LoadError("write failed: " + state_->path.string());
}

void write_flow_dump(const fs::path& path, std::span<const FlowField> fields) {
  if (fields.empty()) throw SequenceError("no flow fields");
  FlowDumpWriter writer(path, fields.front().width(), fields.front().height());
  for (const auto& f : fields) writer.append(f);
  writer.finish();
}

std::vector<FlowField> read_flow_dump(const fs::path& path) {
  const auto bytes = slurp(path);
  if (bytes.size() < kHeaderBytes || !std::equal(kFlowMagic.begin(), kFlowMagic.end(), bytes.begin()))
    throw LoadError(path.string() + ": missing BFL1 header");
  const int width = static_cast<int>(get_u32(bytes.data() + 4));
  const int height = static_cast<int>(get_u32(bytes.data() + 8));
  const std::uint32_t count = get_u32(bytes.data() + 12);
  const std::size_t plane = static_cast<std::size_t>(width) * height;
  if (bytes.size() != kHeaderBytes + static_cast<std::size_t>(count) * plane * 8)
    throw LoadError(path.string() + ": size does not match header");
  std::vector<FlowField> fields;
  fields.reserve(count);
  const unsigned char* p = bytes.data() + kHeaderBytes;
  auto read_plane = [&](std::vector<float>& dst) {
    dst.resize(plane);
    for (auto& v : dst) {
      v = std::bit_cast<float>(get_u32(p));
      p += 4;
    }
  };
  for (std::uint32_t i = 0; i < count; ++i) {
    std::vector<float> vx;
    std::vector<float> vy;
    read_plane(vx);
    read_plane(vy);
    fields.emplace_back(width, height, std::move(vx), std::move(vy));
  }
  return fields;
}

}  // namespace breathflow
