#pragma once

// Stand-in for a photo-sharing platform's upload path: a size guard followed
// by decode, clamp and recompression at a fixed quality with 4:2:2 chroma.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "osncrypt/jpeg.hpp"

namespace osncrypt::osn {

struct PlatformPolicy {
  int recompress_qf = 71;
  int max_dim = 2048;
};

// Throws Unsupported when either side is >= max_dim, MalformedBitstream for
// undecodable input and QualityOutOfRange for a bad policy.
std::vector<std::uint8_t> platform_process(std::span<const std::uint8_t> upload,
                                           const PlatformPolicy& policy = {});

struct ComponentSurvival {
  std::size_t total = 0;
  std::size_t identical = 0;
  std::size_t changed = 0;
  std::size_t category_changes = 0;  // includes zero <-> nonzero flips
  std::size_t zero_flips = 0;

  double identical_fraction() const {
    return total ? static_cast<double>(identical) / static_cast<double>(total) : 1.0;
  }
};

struct SurvivalReport {
  std::vector<ComponentSurvival> components;

  ComponentSurvival overall() const;
  // Human-readable lines followed by key=value pairs.
  std::string to_text() const;
};

// Coefficient-level comparison of two JPEGs of the same geometry. Throws
// DimensionMismatch.
SurvivalReport survival_report(const jpeg::CoefficientImage& before,
                               const jpeg::CoefficientImage& after);
SurvivalReport survival_report(std::span<const std::uint8_t> before,
                               std::span<const std::uint8_t> after);

}  // namespace osncrypt::osn
