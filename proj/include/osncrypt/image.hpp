#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace osncrypt {

// 8-bit interleaved image, gray (1 channel) or RGB (3 channels), row-major.
struct PixelImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<std::uint8_t> samples;

  PixelImage() = default;
  PixelImage(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        samples(static_cast<std::size_t>(w) * h * c, fill) {}

  std::size_t index(int x, int y, int c = 0) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  std::uint8_t& at(int x, int y, int c = 0) { return samples[index(x, y, c)]; }
  std::uint8_t at(int x, int y, int c = 0) const { return samples[index(x, y, c)]; }

  friend bool operator==(const PixelImage&, const PixelImage&) = default;
};

// Real-valued single-channel plane. Values are not clamped, so decoded
// out-of-range samples stay observable.
struct SamplePlane {
  int width = 0;
  int height = 0;
  std::vector<double> samples;

  SamplePlane() = default;
  SamplePlane(int w, int h, double fill = 0.0)
      : width(w), height(h), samples(static_cast<std::size_t>(w) * h, fill) {}

  double& at(int x, int y) { return samples[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return samples[static_cast<std::size_t>(y) * width + x]; }
};

// Y at full resolution; Cb and Cr at half horizontal resolution (4:2:2).
struct YCbCrPlanes {
  SamplePlane y;
  SamplePlane cb;
  SamplePlane cr;
};

// Round to nearest, then clamp into [0, 255].
std::uint8_t clamp_sample(double v);
std::vector<std::uint8_t> clamp_spatial(std::span<const double> samples);

// BT.601 full-range (JFIF) conversion with 4:2:2 chroma: pairwise horizontal
// mean on the way down, replication on the way up.
YCbCrPlanes rgb_to_ycbcr(const PixelImage& rgb);
PixelImage ycbcr_to_rgb(const YCbCrPlanes& planes);
// All three planes at full resolution.
PixelImage ycbcr_full_to_rgb(const SamplePlane& y, const SamplePlane& cb, const SamplePlane& cr);

SamplePlane subsample_horizontal(const SamplePlane& full);
// Nearest-neighbour upscale: output (x, y) reads source (x*num_x/den_x, y*num_y/den_y).
SamplePlane upsample(const SamplePlane& plane, int num_x, int den_x, int num_y, int den_y,
                     int width, int height);

// Binary PGM (P5) / PPM (P6), maxval 255.
PixelImage decode_netpbm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_netpbm(const PixelImage& img);
PixelImage read_netpbm(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace osncrypt
