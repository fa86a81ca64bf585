#pragma once

// Baseline JPEG in the coefficient domain: quantization tables, 8x8 DCT,
// zigzag order and a sequential Huffman codec that exposes quantized
// coefficients without ever touching pixels.

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "osncrypt/image.hpp"

namespace osncrypt::jpeg {

inline constexpr int kBlockSide = 8;
inline constexpr int kBlockArea = 64;
inline constexpr int kDcMin = -1024;
inline constexpr int kDcMax = 1016;
inline constexpr int kAcMaxMagnitude = 1023;

// kZigzagToNatural[k] is the row-major index of zigzag position k.
extern const std::array<int, kBlockArea> kZigzagToNatural;
extern const std::array<int, kBlockArea> kNaturalToZigzag;

// Bit length of |v|; 0 for v == 0.
int magnitude_category(int v);

// 64 quantizer steps in zigzag order.
struct QuantTable {
  std::array<std::uint16_t, kBlockArea> entries{};

  std::uint16_t natural(int row_major_index) const {
    return entries[kNaturalToZigzag[row_major_index]];
  }
  friend bool operator==(const QuantTable&, const QuantTable&) = default;
};

QuantTable annex_k_luminance();
QuantTable annex_k_chrominance();

// IJG scaling: s = qf < 50 ? 5000/qf : 200 - 2qf; q = clamp((b*s + 50)/100, 1, 255).
// Throws QualityOutOfRange outside 1..100.
QuantTable quant_table_for_qf(const QuantTable& base, int qf);

// Quantized coefficients in zigzag order: [0] is DC, [1..63] are AC.
using Block = std::array<int, kBlockArea>;
// Row-major 8x8 samples.
using PixelBlock = std::array<double, kBlockArea>;

// Level shift, orthonormal 2-D DCT-II, divide and round half away from zero.
Block forward_block(const PixelBlock& pixels, const QuantTable& q);
// Dequantize, inverse DCT, undo the level shift. Values are not clamped.
PixelBlock inverse_block(const Block& coefs, const QuantTable& q);

enum class Component : std::uint8_t { Y = 0, Cb = 1, Cr = 2 };

struct CoefficientPlane {
  Component component = Component::Y;
  int blocks_w = 0;
  int blocks_h = 0;
  int h_samp = 1;
  int v_samp = 1;
  int qtable = 0;  // index into CoefficientImage::qtables
  std::vector<Block> blocks;

  CoefficientPlane() = default;
  CoefficientPlane(Component c, int bw, int bh)
      : component(c), blocks_w(bw), blocks_h(bh),
        blocks(static_cast<std::size_t>(bw) * bh, Block{}) {}

  std::size_t block_count() const { return blocks.size(); }
  Block& at(int bx, int by) { return blocks[static_cast<std::size_t>(by) * blocks_w + bx]; }
  const Block& at(int bx, int by) const {
    return blocks[static_cast<std::size_t>(by) * blocks_w + bx];
  }

  friend bool operator==(const CoefficientPlane&, const CoefficientPlane&) = default;
};

// A whole image in the quantized-DCT domain.
struct CoefficientImage {
  int width = 0;
  int height = 0;
  std::vector<CoefficientPlane> planes;
  std::vector<QuantTable> qtables;

  int max_h() const;
  int max_v() const;
  // Sample dimensions of plane i (before block padding).
  int plane_width(std::size_t i) const;
  int plane_height(std::size_t i) const;
  const QuantTable& table_for(std::size_t i) const { return qtables.at(planes.at(i).qtable); }

  friend bool operator==(const CoefficientImage&, const CoefficientImage&) = default;
};

// Block grid for one sample plane, replicate-padding the last row/column.
CoefficientPlane plane_from_samples(const SamplePlane& samples, const QuantTable& q, Component c);
// Unclamped reconstruction cropped to width x height.
SamplePlane plane_to_samples(const CoefficientPlane& plane, const QuantTable& q, int width,
                             int height);

// Gray images become one 1x1 plane; RGB becomes Y (2x1), Cb, Cr (1x1).
CoefficientImage compress(const PixelImage& img, int qf);
// Unclamped component plane i at its own resolution.
SamplePlane component_samples(const CoefficientImage& img, std::size_t i);
// Full reconstruction: IDCT, chroma upsampling, color conversion, then clamp.
PixelImage decompress(const CoefficientImage& img);

// Baseline sequential JFIF with the Annex K typical Huffman tables.
// Throws DcOutOfRange if any DC leaves [-1024, 1016] and InputError if any AC
// magnitude exceeds 1023.
std::vector<std::uint8_t> encode_jpeg(const CoefficientImage& img);
// Baseline sequential decoder (any sampling factors, restart intervals,
// multiple scans). Throws MalformedBitstream with the byte offset.
CoefficientImage decode_jpeg(std::span<const std::uint8_t> bytes);

}  // namespace osncrypt::jpeg
