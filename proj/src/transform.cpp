#include <algorithm>
#include <cmath>
#include <numbers>

#include "osncrypt/errors.hpp"
#include "osncrypt/jpeg.hpp"

namespace osncrypt::jpeg {

const std::array<int, kBlockArea> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

const std::array<int, kBlockArea> kNaturalToZigzag = [] {
  std::array<int, kBlockArea> inv{};
  for (int k = 0; k < kBlockArea; ++k) inv[kZigzagToNatural[k]] = k;
  return inv;
}();

int magnitude_category(int v) {
  unsigned m = static_cast<unsigned>(v < 0 ? -v : v);
  int bits = 0;
  while (m) {
    ++bits;
    m >>= 1;
  }
  return bits;
}

namespace {

// Annex K.1 tables, row-major.
constexpr std::array<std::uint16_t, kBlockArea> kLuminanceBase = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

constexpr std::array<std::uint16_t, kBlockArea> kChrominanceBase = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

QuantTable from_natural(const std::array<std::uint16_t, kBlockArea>& natural) {
  QuantTable t;
  for (int k = 0; k < kBlockArea; ++k) t.entries[k] = natural[kZigzagToNatural[k]];
  return t;
}

// basis[u][x] = c(u)/2 * cos((2x+1) u pi / 16), c(0) = 1/sqrt(2).
const std::array<std::array<double, 8>, 8> kBasis = [] {
  std::array<std::array<double, 8>, 8> m{};
  for (int u = 0; u < 8; ++u) {
    const double cu = u == 0 ? 1.0 / std::numbers::sqrt2 : 1.0;
    for (int x = 0; x < 8; ++x)
      m[u][x] = 0.5 * cu * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
  }
  return m;
}();

}  // namespace

QuantTable annex_k_luminance() { return from_natural(kLuminanceBase); }
QuantTable annex_k_chrominance() { return from_natural(kChrominanceBase); }

QuantTable quant_table_for_qf(const QuantTable& base, int qf) {
  if (qf < 1 || qf > 100) throw QualityOutOfRange("quality factor must be in 1..100");
  const long scale = qf < 50 ? 5000 / qf : 200 - 2 * qf;
  QuantTable out;
  for (int k = 0; k < kBlockArea; ++k) {
    const long q = (static_cast<long>(base.entries[k]) * scale + 50) / 100;
    out.entries[k] = static_cast<std::uint16_t>(std::clamp(q, 1L, 255L));
  }
  return out;
}

Block forward_block(const PixelBlock& pixels, const QuantTable& q) {
  // rows first, then columns
  std::array<double, kBlockArea> tmp{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int x = 0; x < 8; ++x) s += kBasis[u][x] * (pixels[y * 8 + x] - 128.0);
      tmp[y * 8 + u] = s;
    }
  Block out{};
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double s = 0.0;
      for (int y = 0; y < 8; ++y) s += kBasis[v][y] * tmp[y * 8 + u];
      const int natural = v * 8 + u;
      out[kNaturalToZigzag[natural]] = static_cast<int>(std::round(s / q.natural(natural)));
    }
  return out;
}

PixelBlock inverse_block(const Block& coefs, const QuantTable& q) {
  std::array<double, kBlockArea> freq{};
  for (int k = 0; k < kBlockArea; ++k)
    freq[kZigzagToNatural[k]] = static_cast<double>(coefs[k]) * q.entries[k];
  std::array<double, kBlockArea> tmp{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int u = 0; u < 8; ++u) s += kBasis[u][x] * freq[v * 8 + u];
      tmp[v * 8 + x] = s;
    }
  PixelBlock out{};
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double s = 0.0;
      for (int v = 0; v < 8; ++v) s += kBasis[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = s + 128.0;
    }
  return out;
}

// ---------------------------------------------------------------- planes

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

}  // namespace

int CoefficientImage::max_h() const {
  int m = 1;
  for (const auto& p : planes) m = std::max(m, p.h_samp);
  return m;
}

int CoefficientImage::max_v() const {
  int m = 1;
  for (const auto& p : planes) m = std::max(m, p.v_samp);
  return m;
}

int CoefficientImage::plane_width(std::size_t i) const {
  return ceil_div(width * planes.at(i).h_samp, max_h());
}

int CoefficientImage::plane_height(std::size_t i) const {
  return ceil_div(height * planes.at(i).v_samp, max_v());
}

CoefficientPlane plane_from_samples(const SamplePlane& samples, const QuantTable& q, Component c) {
  CoefficientPlane plane(c, ceil_div(samples.width, kBlockSide), ceil_div(samples.height, kBlockSide));
  PixelBlock px{};
  for (int by = 0; by < plane.blocks_h; ++by)
    for (int bx = 0; bx < plane.blocks_w; ++bx) {
      for (int y = 0; y < 8; ++y) {
        const int sy = std::min(by * 8 + y, samples.height - 1);
        for (int x = 0; x < 8; ++x) {
          const int sx = std::min(bx * 8 + x, samples.width - 1);
          px[y * 8 + x] = samples.at(sx, sy);
        }
      }
      plane.at(bx, by) = forward_block(px, q);
    }
  return plane;
}

SamplePlane plane_to_samples(const CoefficientPlane& plane, const QuantTable& q, int width,
                             int height) {
  SamplePlane out(width, height);
  for (int by = 0; by < plane.blocks_h; ++by)
    for (int bx = 0; bx < plane.blocks_w; ++bx) {
      const auto px = inverse_block(plane.at(bx, by), q);
      for (int y = 0; y < 8; ++y) {
        const int sy = by * 8 + y;
        if (sy >= height) break;
        for (int x = 0; x < 8; ++x) {
          const int sx = bx * 8 + x;
          if (sx >= width) break;
          out.at(sx, sy) = px[y * 8 + x];
        }
      }
    }
  return out;
}

CoefficientImage compress(const PixelImage& img, int qf) {
  if (img.width <= 0 || img.height <= 0) throw InputError("cannot compress an empty image");
  CoefficientImage out;
  out.width = img.width;
  out.height = img.height;
  const auto luma = quant_table_for_qf(annex_k_luminance(), qf);
  if (img.channels == 1) {
    SamplePlane y(img.width, img.height);
    std::transform(img.samples.begin(), img.samples.end(), y.samples.begin(),
                   [](std::uint8_t v) { return static_cast<double>(v); });
    out.qtables = {luma};
    out.planes.push_back(plane_from_samples(y, luma, Component::Y));
    return out;
  }
  if (img.channels != 3) throw InputError("compress expects 1 or 3 channels");
  const auto chroma = quant_table_for_qf(annex_k_chrominance(), qf);
  const auto ycc = rgb_to_ycbcr(img);
  out.qtables = {luma, chroma};
  auto y = plane_from_samples(ycc.y, luma, Component::Y);
  y.h_samp = 2;
  auto cb = plane_from_samples(ycc.cb, chroma, Component::Cb);
  cb.qtable = 1;
  auto cr = plane_from_samples(ycc.cr, chroma, Component::Cr);
  cr.qtable = 1;
  out.planes = {std::move(y), std::move(cb), std::move(cr)};
  return out;
}

SamplePlane component_samples(const CoefficientImage& img, std::size_t i) {
  return plane_to_samples(img.planes.at(i), img.table_for(i), img.plane_width(i),
                          img.plane_height(i));
}

PixelImage decompress(const CoefficientImage& img) {
  if (img.planes.size() == 1) {
    const auto y = component_samples(img, 0);
    PixelImage out(img.width, img.height, 1);
    out.samples = clamp_spatial(y.samples);
    return out;
  }
  if (img.planes.size() != 3) throw Unsupported("only gray and YCbCr images can be rendered");
  std::array<SamplePlane, 3> full;
  for (std::size_t i = 0; i < 3; ++i)
    full[i] = upsample(component_samples(img, i), img.planes[i].h_samp, img.max_h(),
                       img.planes[i].v_samp, img.max_v(), img.width, img.height);
  return ycbcr_full_to_rgb(full[0], full[1], full[2]);
}

}  // namespace osncrypt::jpeg
