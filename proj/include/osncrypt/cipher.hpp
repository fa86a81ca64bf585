#pragma once

// Format-compliant JPEG encryption with a (K1, K2) chaotic key pair.
//
//  * K1 (Logistic) permutes whole 8x8 coefficient blocks: first within each
//    block row, then once across the whole component.
//  * K2 (Henon) yields 11-bit ECUs that are XORed into every nonzero AC
//    coefficient. The leading magnitude bit is kept, so each coefficient stays
//    in its JPEG magnitude category and the zero/nonzero pattern (and hence
//    the Huffman run lengths) is unchanged.
//
// Decryption undoes the AC layer first, then the block permutation.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "osncrypt/chaos.hpp"
#include "osncrypt/image.hpp"
#include "osncrypt/jpeg.hpp"

namespace osncrypt::cipher {

inline constexpr int kQuality = 71;
inline constexpr int kMaxDimension = 2048;

struct BlockPermutationPlan {
  int blocks_w = 0;
  int blocks_h = 0;
  std::vector<std::vector<std::size_t>> row_perms;  // blocks_h permutations over blocks_w
  std::vector<std::size_t> global_perm;             // over blocks_w * blocks_h

  static BlockPermutationPlan identity(int blocks_w, int blocks_h);
};

// Number of chaotic values a plan of this grid consumes.
std::size_t plan_stream_length(int blocks_w, int blocks_h);
// Row permutations first (one argsort per row), then the global permutation.
BlockPermutationPlan plan_from_sequence(std::span<const double> stream, int blocks_w, int blocks_h);
BlockPermutationPlan plan_permutations(chaos::LogisticMap& stream, int blocks_w, int blocks_h);
// One plan per plane, Y then Cb then Cr, from a single Logistic stream.
std::vector<BlockPermutationPlan> plan_permutations(const chaos::EncryptionKey& key,
                                                    const jpeg::CoefficientImage& img);

// Output row slot j takes input block row_perm[j]; then output block i takes
// block global_perm[i]. Throws GridMismatch.
jpeg::CoefficientPlane encrypt_dc_blocks(const jpeg::CoefficientPlane& plane,
                                         const BlockPermutationPlan& plan);
jpeg::CoefficientPlane decrypt_dc_blocks(const jpeg::CoefficientPlane& plane,
                                         const BlockPermutationPlan& plan);

// Sign/magnitude view of a nonzero AC coefficient.
struct AcCode {
  int length = 0;              // magnitude category l, 1..10
  bool negative = false;
  std::uint16_t magnitude = 0; // l-bit pattern, leading bit always 1

  static AcCode from_value(int value);
  int to_value() const;
};

// XOR one nonzero coefficient with ECU(l): bit 1 flips the sign, bits 2..l
// flip the magnitude bits below the leading one. Zero passes through.
int encrypt_ac_value(int coef, chaos::Ecu ecu);

// Self-inverse. groups[p][q-1] keys zigzag position q of block p (raster
// order). Throws EcuExhausted if fewer groups than blocks are supplied.
jpeg::CoefficientPlane encrypt_ac(const jpeg::CoefficientPlane& plane,
                                  std::span<const chaos::EcuGroup> groups);

// Indices of blocks whose DC lies outside [-1024, 1016].
std::vector<std::size_t> check_dc_range(const jpeg::CoefficientPlane& plane);

// Blocks whose reconstruction rounds outside [0, 255].
std::vector<std::size_t> overflow_blocks(const jpeg::CoefficientPlane& plane, const jpeg::QuantTable& q);

// Comparison baseline: scale every AC coefficient of the listed blocks by
// alpha (0 < alpha < 1), rounding half away from zero. DC is untouched.
jpeg::CoefficientPlane alpha_scale_blocks(const jpeg::CoefficientPlane& plane, double alpha,
                                          std::span<const std::size_t> blocks);

// Clamp counterpart of alpha_scale_blocks, confined to one plane: clamp the
// listed blocks' samples to [0, 255] and requantize with the same table.
jpeg::CoefficientPlane clamp_repair_blocks(const jpeg::CoefficientPlane& plane,
                                           const jpeg::QuantTable& q,
                                           std::span<const std::size_t> blocks);

// Overflow repair: render (clamping to [0, 255]) and recompress at `quality`.
jpeg::CoefficientImage repair_overflow(const jpeg::CoefficientImage& img, int quality = kQuality);

struct CiphertextImage {
  std::vector<std::uint8_t> jpeg;
  int quality = kQuality;
  int width = 0;
  int height = 0;
  int channels = 0;
};

// Which layers to apply. Anything other than the defaults is for ablation.
struct CipherOptions {
  bool permute_blocks = true;
  bool xor_ac = true;
  bool repair = true;
};

// Coefficient-domain layers only, per plane in Y, Cb, Cr order.
jpeg::CoefficientImage encrypt_coefficients(const jpeg::CoefficientImage& img,
                                            const chaos::EncryptionKey& key,
                                            const CipherOptions& opts = {});
jpeg::CoefficientImage decrypt_coefficients(const jpeg::CoefficientImage& img,
                                            const chaos::EncryptionKey& key,
                                            const CipherOptions& opts = {});

// Full pipeline: compress at quality 71 (4:2:2 for color), encrypt, repair
// overflow, Huffman-encode. Throws ImageTooLarge for 2048 pixels or more on
// either side.
CiphertextImage encrypt_image(const PixelImage& img, const chaos::EncryptionKey& key,
                              const CipherOptions& opts = {});
// A wrong key is not detectable; it yields noise.
PixelImage decrypt_image(std::span<const std::uint8_t> jpeg_bytes, const chaos::EncryptionKey& key,
                         const CipherOptions& opts = {});
PixelImage decrypt_image(const CiphertextImage& ct, const chaos::EncryptionKey& key,
                         const CipherOptions& opts = {});

}  // namespace osncrypt::cipher
