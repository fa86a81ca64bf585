#pragma once

// Security and fidelity metrics: channel entropy, PSNR and four block-feature
// sketch attacks on the coefficient domain (DCM, NCC, EAC, PLZ).

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "osncrypt/image.hpp"
#include "osncrypt/jpeg.hpp"

namespace osncrypt::analysis {

// Shannon entropy of the 256-bin histogram, in bits (0..8).
double channel_entropy(std::span<const std::uint8_t> samples);
// Entropy of each decoded component plane (Y, Cb, Cr) of a JPEG, at native
// resolution after rounding and clamping.
std::vector<double> component_entropies(const jpeg::CoefficientImage& img);
// Samples of channel c of an interleaved image.
std::vector<std::uint8_t> channel_of(const PixelImage& img, int c);

// 10 log10(255^2 / MSE) over all samples of all channels. Returns +infinity
// for identical images. Throws DimensionMismatch.
double psnr(const PixelImage& a, const PixelImage& b);

enum class AttackKind { Dcm, Ncc, Eac, Plz };

std::string_view to_string(AttackKind k);
// Accepts "dcm", "ncc", "eac", "plz" (case-insensitive); throws InputError.
AttackKind parse_attack_kind(std::string_view name);

// One intensity per block, normalized to 0..255.
struct AttackMap {
  AttackKind kind = AttackKind::Dcm;
  int blocks_w = 0;
  int blocks_h = 0;
  std::vector<std::uint8_t> intensity;

  friend bool operator==(const AttackMap&, const AttackMap&) = default;
};

// DC magnitude category (0..11) scaled by 255/11.
AttackMap attack_dcm(const jpeg::CoefficientPlane& plane);
// Count of nonzero AC coefficients scaled by 255/63.
AttackMap attack_ncc(const jpeg::CoefficientPlane& plane);
// 255 log(1 + e) / log(1 + e_max), e = sum of squared AC coefficients.
AttackMap attack_eac(const jpeg::CoefficientPlane& plane);
// Zigzag index of the last nonzero coefficient (0 if none) scaled by 255/63.
AttackMap attack_plz(const jpeg::CoefficientPlane& plane);
AttackMap run_attack(AttackKind kind, const jpeg::CoefficientPlane& plane);

// Pearson correlation of two maps on the same grid; 0 when either is constant.
// Throws GridMismatch.
double leak_score(const AttackMap& plain, const AttackMap& cipher);

// Gray image at block resolution, optionally upscaled by nearest neighbour.
PixelImage attack_map_image(const AttackMap& map, int scale = 1);

}  // namespace osncrypt::analysis
