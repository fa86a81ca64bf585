#include "osncrypt/cipher.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "osncrypt/errors.hpp"

namespace osncrypt::cipher {

using jpeg::Block;
using jpeg::CoefficientImage;
using jpeg::CoefficientPlane;

BlockPermutationPlan BlockPermutationPlan::identity(int blocks_w, int blocks_h) {
  BlockPermutationPlan plan;
  plan.blocks_w = blocks_w;
  plan.blocks_h = blocks_h;
  std::vector<std::size_t> row(static_cast<std::size_t>(blocks_w));
  std::iota(row.begin(), row.end(), std::size_t{0});
  plan.row_perms.assign(static_cast<std::size_t>(blocks_h), row);
  plan.global_perm.resize(static_cast<std::size_t>(blocks_w) * blocks_h);
  std::iota(plan.global_perm.begin(), plan.global_perm.end(), std::size_t{0});
  return plan;
}

std::size_t plan_stream_length(int blocks_w, int blocks_h) {
  return 2 * static_cast<std::size_t>(blocks_w) * static_cast<std::size_t>(blocks_h);
}

BlockPermutationPlan plan_from_sequence(std::span<const double> stream, int blocks_w, int blocks_h) {
  if (blocks_w <= 0 || blocks_h <= 0) throw GridMismatch("empty block grid");
  const auto w = static_cast<std::size_t>(blocks_w);
  const auto total = w * static_cast<std::size_t>(blocks_h);
  if (stream.size() < plan_stream_length(blocks_w, blocks_h))
    throw InsufficientSequence("stream too short for block permutation plan");
  BlockPermutationPlan plan;
  plan.blocks_w = blocks_w;
  plan.blocks_h = blocks_h;
  std::size_t pos = 0;
  for (int r = 0; r < blocks_h; ++r, pos += w)
    plan.row_perms.push_back(chaos::derive_permutation(stream.subspan(pos, w), w));
  plan.global_perm = chaos::derive_permutation(stream.subspan(pos, total), total);
  return plan;
}

BlockPermutationPlan plan_permutations(chaos::LogisticMap& stream, int blocks_w, int blocks_h) {
  const auto values = stream.take(plan_stream_length(blocks_w, blocks_h));
  return plan_from_sequence(values, blocks_w, blocks_h);
}

std::vector<BlockPermutationPlan> plan_permutations(const chaos::EncryptionKey& key,
                                                    const CoefficientImage& img) {
  chaos::LogisticMap stream(key.k1());
  std::vector<BlockPermutationPlan> plans;
  for (const auto& p : img.planes) plans.push_back(plan_permutations(stream, p.blocks_w, p.blocks_h));
  return plans;
}

namespace {

void check_grid(const CoefficientPlane& plane, const BlockPermutationPlan& plan) {
  if (plane.blocks_w != plan.blocks_w || plane.blocks_h != plan.blocks_h ||
      plan.row_perms.size() != static_cast<std::size_t>(plan.blocks_h) ||
      plan.global_perm.size() != plane.block_count())
    throw GridMismatch("permutation plan does not match the plane grid");
}

}  // namespace

CoefficientPlane encrypt_dc_blocks(const CoefficientPlane& plane, const BlockPermutationPlan& plan) {
  check_grid(plane, plan);
  const auto w = static_cast<std::size_t>(plane.blocks_w);
  CoefficientPlane rows = plane;
  for (std::size_t r = 0; r < plan.row_perms.size(); ++r) {
    const auto& perm = plan.row_perms[r];
    for (std::size_t j = 0; j < w; ++j) rows.blocks[r * w + j] = plane.blocks[r * w + perm[j]];
  }
  CoefficientPlane out = rows;
  for (std::size_t i = 0; i < plan.global_perm.size(); ++i)
    out.blocks[i] = rows.blocks[plan.global_perm[i]];
  return out;
}

CoefficientPlane decrypt_dc_blocks(const CoefficientPlane& plane, const BlockPermutationPlan& plan) {
  check_grid(plane, plan);
  const auto w = static_cast<std::size_t>(plane.blocks_w);
  CoefficientPlane rows = plane;
  for (std::size_t i = 0; i < plan.global_perm.size(); ++i)
    rows.blocks[plan.global_perm[i]] = plane.blocks[i];
  CoefficientPlane out = rows;
  for (std::size_t r = 0; r < plan.row_perms.size(); ++r) {
    const auto& perm = plan.row_perms[r];
    for (std::size_t j = 0; j < w; ++j) out.blocks[r * w + perm[j]] = rows.blocks[r * w + j];
  }
  return out;
}

AcCode AcCode::from_value(int value) {
  AcCode c;
  c.negative = value < 0;
  c.magnitude = static_cast<std::uint16_t>(value < 0 ? -value : value);
  c.length = jpeg::magnitude_category(value);
  return c;
}

int AcCode::to_value() const { return negative ? -static_cast<int>(magnitude) : magnitude; }

int encrypt_ac_value(int coef, chaos::Ecu ecu) {
  if (coef == 0) return 0;
  auto code = AcCode::from_value(coef);
  const std::uint16_t key = ecu.prefix(code.length);
  const std::uint16_t below_leading = static_cast<std::uint16_t>((1u << (code.length - 1)) - 1u);
  code.magnitude = static_cast<std::uint16_t>(code.magnitude ^ (key & below_leading));
  if (ecu.bit(1)) code.negative = !code.negative;
  return code.to_value();
}

CoefficientPlane encrypt_ac(const CoefficientPlane& plane, std::span<const chaos::EcuGroup> groups) {
  if (groups.size() < plane.block_count())
    throw EcuExhausted("ECU stream has " + std::to_string(groups.size()) + " groups for " +
                       std::to_string(plane.block_count()) + " blocks");
  CoefficientPlane out = plane;
  for (std::size_t p = 0; p < out.blocks.size(); ++p) {
    auto& block = out.blocks[p];
    for (int q = 1; q < jpeg::kBlockArea; ++q)
      block[q] = encrypt_ac_value(block[q], groups[p][static_cast<std::size_t>(q - 1)]);
  }
  return out;
}

std::vector<std::size_t> check_dc_range(const CoefficientPlane& plane) {
  std::vector<std::size_t> bad;
  for (std::size_t i = 0; i < plane.blocks.size(); ++i) {
    const int dc = plane.blocks[i][0];
    if (dc < jpeg::kDcMin || dc > jpeg::kDcMax) bad.push_back(i);
  }
  return bad;
}

std::vector<std::size_t> overflow_blocks(const CoefficientPlane& plane, const jpeg::QuantTable& q) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < plane.blocks.size(); ++i) {
    const auto px = jpeg::inverse_block(plane.blocks[i], q);
    for (double v : px)
      if (v < -0.5 || v >= 255.5) {
        out.push_back(i);
        break;
      }
  }
  return out;
}

CoefficientPlane alpha_scale_blocks(const CoefficientPlane& plane, double alpha,
                                    std::span<const std::size_t> blocks) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw AlphaOutOfRange("alpha must satisfy 0 < alpha < 1");
  CoefficientPlane out = plane;
  for (std::size_t idx : blocks) {
    if (idx >= out.blocks.size()) throw GridMismatch("block index out of range");
    auto& block = out.blocks[idx];
    for (int k = 1; k < jpeg::kBlockArea; ++k)
      block[k] = static_cast<int>(std::round(alpha * block[k]));
  }
  return out;
}

CoefficientPlane clamp_repair_blocks(const CoefficientPlane& plane, const jpeg::QuantTable& q,
                                     std::span<const std::size_t> blocks) {
  CoefficientPlane out = plane;
  for (std::size_t idx : blocks) {
    if (idx >= out.blocks.size()) throw GridMismatch("block index out of range");
    auto px = jpeg::inverse_block(out.blocks[idx], q);
    for (double& v : px) v = clamp_sample(v);
    out.blocks[idx] = jpeg::forward_block(px, q);
  }
  return out;
}

CoefficientImage repair_overflow(const CoefficientImage& img, int quality) {
  return jpeg::compress(jpeg::decompress(img), quality);
}

CoefficientImage encrypt_coefficients(const CoefficientImage& img, const chaos::EncryptionKey& key,
                                      const CipherOptions& opts) {
  CoefficientImage out = img;
  chaos::LogisticMap logistic(key.k1());
  chaos::EcuStream ecus(key.k2());
  for (auto& plane : out.planes) {
    if (opts.permute_blocks)
      plane = encrypt_dc_blocks(plane, plan_permutations(logistic, plane.blocks_w, plane.blocks_h));
    if (opts.xor_ac) plane = encrypt_ac(plane, ecus.take(plane.block_count()));
  }
  return out;
}

CoefficientImage decrypt_coefficients(const CoefficientImage& img, const chaos::EncryptionKey& key,
                                      const CipherOptions& opts) {
  CoefficientImage out = img;
  chaos::LogisticMap logistic(key.k1());
  chaos::EcuStream ecus(key.k2());
  for (auto& plane : out.planes) {
    if (opts.xor_ac) plane = encrypt_ac(plane, ecus.take(plane.block_count()));
    if (opts.permute_blocks)
      plane = decrypt_dc_blocks(plane, plan_permutations(logistic, plane.blocks_w, plane.blocks_h));
  }
  return out;
}

CiphertextImage encrypt_image(const PixelImage& img, const chaos::EncryptionKey& key,
                              const CipherOptions& opts) {
  if (img.width >= kMaxDimension || img.height >= kMaxDimension)
    throw ImageTooLarge("image is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                        "; encryption needs both sides below 2048");
  const auto plain = jpeg::compress(img, kQuality);
  auto encrypted = encrypt_coefficients(plain, key, opts);
  if (opts.repair) encrypted = repair_overflow(encrypted, kQuality);
  CiphertextImage ct;
  ct.jpeg = jpeg::encode_jpeg(encrypted);
  ct.quality = kQuality;
  ct.width = img.width;
  ct.height = img.height;
  ct.channels = img.channels;
  return ct;
}

PixelImage decrypt_image(std::span<const std::uint8_t> jpeg_bytes, const chaos::EncryptionKey& key,
                         const CipherOptions& opts) {
  const auto encrypted = jpeg::decode_jpeg(jpeg_bytes);
  return jpeg::decompress(decrypt_coefficients(encrypted, key, opts));
}

PixelImage decrypt_image(const CiphertextImage& ct, const chaos::EncryptionKey& key,
                         const CipherOptions& opts) {
  return decrypt_image(ct.jpeg, key, opts);
}

}  // namespace osncrypt::cipher
