#include "osncrypt/osn_sim.hpp"

#include <cstdio>
#include <sstream>

#include "osncrypt/errors.hpp"

namespace osncrypt::osn {

std::vector<std::uint8_t> platform_process(std::span<const std::uint8_t> upload,
                                           const PlatformPolicy& policy) {
  if (policy.recompress_qf < 1 || policy.recompress_qf > 100)
    throw QualityOutOfRange("recompression quality must be in 1..100");
  const auto img = jpeg::decode_jpeg(upload);
  if (img.width >= policy.max_dim || img.height >= policy.max_dim)
    throw Unsupported("upload is " + std::to_string(img.width) + "x" + std::to_string(img.height) +
                      "; resizing of images with a side >= " + std::to_string(policy.max_dim) +
                      " is not simulated");
  return jpeg::encode_jpeg(jpeg::compress(jpeg::decompress(img), policy.recompress_qf));
}

ComponentSurvival SurvivalReport::overall() const {
  ComponentSurvival sum;
  for (const auto& c : components) {
    sum.total += c.total;
    sum.identical += c.identical;
    sum.changed += c.changed;
    sum.category_changes += c.category_changes;
    sum.zero_flips += c.zero_flips;
  }
  return sum;
}

std::string SurvivalReport::to_text() const {
  static const char* names[] = {"Y", "Cb", "Cr", "K"};
  std::ostringstream out;
  char buf[64];
  for (std::size_t i = 0; i < components.size(); ++i) {
    const auto& c = components[i];
    std::snprintf(buf, sizeof(buf), "%.6f", c.identical_fraction());
    out << names[i < 4 ? i : 3] << ": " << c.identical << "/" << c.total
        << " coefficients identical (" << buf << "), " << c.category_changes
        << " category changes, " << c.zero_flips << " zero/nonzero flips\n";
  }
  const auto all = overall();
  std::snprintf(buf, sizeof(buf), "%.6f", all.identical_fraction());
  out << "total=" << all.total << "\n"
      << "identical=" << all.identical << "\n"
      << "changed=" << all.changed << "\n"
      << "identical_fraction=" << buf << "\n"
      << "category_changes=" << all.category_changes << "\n"
      << "zero_flips=" << all.zero_flips << "\n";
  return out.str();
}

SurvivalReport survival_report(const jpeg::CoefficientImage& before,
                               const jpeg::CoefficientImage& after) {
  if (before.width != after.width || before.height != after.height ||
      before.planes.size() != after.planes.size())
    throw DimensionMismatch("survival report needs images of the same geometry");
  SurvivalReport report;
  for (std::size_t i = 0; i < before.planes.size(); ++i) {
    const auto& a = before.planes[i];
    const auto& b = after.planes[i];
    if (a.blocks_w != b.blocks_w || a.blocks_h != b.blocks_h)
      throw DimensionMismatch("component " + std::to_string(i) + " block grids differ");
    ComponentSurvival s;
    for (std::size_t blk = 0; blk < a.blocks.size(); ++blk)
      for (int k = 0; k < jpeg::kBlockArea; ++k) {
        const int u = a.blocks[blk][k];
        const int v = b.blocks[blk][k];
        ++s.total;
        if (u == v) {
          ++s.identical;
          continue;
        }
        ++s.changed;
        if (jpeg::magnitude_category(u) != jpeg::magnitude_category(v)) ++s.category_changes;
        if ((u == 0) != (v == 0)) ++s.zero_flips;
      }
    report.components.push_back(s);
  }
  return report;
}

SurvivalReport survival_report(std::span<const std::uint8_t> before,
                               std::span<const std::uint8_t> after) {
  return survival_report(jpeg::decode_jpeg(before), jpeg::decode_jpeg(after));
}

}  // namespace osncrypt::osn
