#include "osncrypt/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <string>
#include <system_error>

#include "osncrypt/errors.hpp"

namespace osncrypt {

std::uint8_t clamp_sample(double v) {
  if (!(v > 0.0)) return 0;
  if (v > 255.0) return 255;
  return static_cast<std::uint8_t>(std::min(255.0, std::round(v)));
}

std::vector<std::uint8_t> clamp_spatial(std::span<const double> samples) {
  std::vector<std::uint8_t> out(samples.size());
  std::transform(samples.begin(), samples.end(), out.begin(), clamp_sample);
  return out;
}

SamplePlane subsample_horizontal(const SamplePlane& full) {
  SamplePlane half((full.width + 1) / 2, full.height);
  for (int y = 0; y < full.height; ++y) {
    for (int x = 0; x < half.width; ++x) {
      const int x0 = 2 * x;
      const int x1 = std::min(x0 + 1, full.width - 1);
      half.at(x, y) = (full.at(x0, y) + full.at(x1, y)) / 2.0;
    }
  }
  return half;
}

SamplePlane upsample(const SamplePlane& plane, int num_x, int den_x, int num_y, int den_y,
                     int width, int height) {
  SamplePlane out(width, height);
  for (int y = 0; y < height; ++y) {
    const int sy = std::min(y * num_y / den_y, plane.height - 1);
    for (int x = 0; x < width; ++x) {
      const int sx = std::min(x * num_x / den_x, plane.width - 1);
      out.at(x, y) = plane.at(sx, sy);
    }
  }
  return out;
}

YCbCrPlanes rgb_to_ycbcr(const PixelImage& rgb) {
  if (rgb.channels != 3) throw InputError("rgb_to_ycbcr needs a 3-channel image");
  SamplePlane y(rgb.width, rgb.height);
  SamplePlane cb(rgb.width, rgb.height);
  SamplePlane cr(rgb.width, rgb.height);
  for (int j = 0; j < rgb.height; ++j) {
    for (int i = 0; i < rgb.width; ++i) {
      const double r = rgb.at(i, j, 0);
      const double g = rgb.at(i, j, 1);
      const double b = rgb.at(i, j, 2);
      y.at(i, j) = 0.299 * r + 0.587 * g + 0.114 * b;
      cb.at(i, j) = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0;
      cr.at(i, j) = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0;
    }
  }
  return {std::move(y), subsample_horizontal(cb), subsample_horizontal(cr)};
}

PixelImage ycbcr_to_rgb(const YCbCrPlanes& planes) {
  const int w = planes.y.width;
  const int h = planes.y.height;
  return ycbcr_full_to_rgb(planes.y, upsample(planes.cb, 1, 2, 1, 1, w, h),
                           upsample(planes.cr, 1, 2, 1, 1, w, h));
}

PixelImage ycbcr_full_to_rgb(const SamplePlane& y, const SamplePlane& cb, const SamplePlane& cr) {
  const int w = y.width;
  const int h = y.height;
  PixelImage out(w, h, 3);
  for (int j = 0; j < h; ++j) {
    for (int i = 0; i < w; ++i) {
      const double yy = y.at(i, j);
      const double u = cb.at(i, j) - 128.0;
      const double v = cr.at(i, j) - 128.0;
      out.at(i, j, 0) = clamp_sample(yy + 1.402 * v);
      out.at(i, j, 1) = clamp_sample(yy - 0.344136 * u - 0.714136 * v);
      out.at(i, j, 2) = clamp_sample(yy + 1.772 * u);
    }
  }
  return out;
}

// ---------------------------------------------------------------- netpbm

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  int read_int() {
    skip_space_and_comments();
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_]))
      throw FormatError("netpbm: expected an integer at byte " + std::to_string(pos_));
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > (1L << 24)) throw FormatError("netpbm: header value too large");
    }
    return static_cast<int>(v);
  }

  // Exactly one whitespace byte separates the header from the raster.
  std::size_t raster_start() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_]))
      throw FormatError("netpbm: missing whitespace before raster");
    return pos_ + 1;
  }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else {
        break;
      }
    }
  }

  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

}  // namespace

PixelImage decode_netpbm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || (bytes[1] != '5' && bytes[1] != '6'))
    throw FormatError("netpbm: expected binary P5 or P6 magic");
  const int channels = bytes[1] == '6' ? 3 : 1;
  HeaderReader header(bytes);
  const int width = header.read_int();
  const int height = header.read_int();
  const int maxval = header.read_int();
  if (width <= 0 || height <= 0) throw FormatError("netpbm: empty image");
  if (maxval != 255) throw FormatError("netpbm: only maxval 255 is supported");
  const std::size_t start = header.raster_start();
  const std::size_t need = static_cast<std::size_t>(width) * height * channels;
  if (bytes.size() - start < need) throw FormatError("netpbm: truncated raster");
  PixelImage img(width, height, channels);
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(start), need, img.samples.begin());
  return img;
}

std::vector<std::uint8_t> encode_netpbm(const PixelImage& img) {
  if (img.channels != 1 && img.channels != 3) throw InputError("netpbm: 1 or 3 channels only");
  const std::string header = std::string(img.channels == 3 ? "P6\n" : "P5\n") +
                             std::to_string(img.width) + " " + std::to_string(img.height) +
                             "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.samples.begin(), img.samples.end());
  return out;
}

PixelImage read_netpbm(const std::filesystem::path& path) { return decode_netpbm(read_file(path)); }

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
      out.close();
      std::filesystem::remove(tmp);
      throw InputError("write failed for " + tmp.string());
    }
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw InputError("cannot rename onto " + path.string() + ": " + ec.message());
  }
}

}  // namespace osncrypt
