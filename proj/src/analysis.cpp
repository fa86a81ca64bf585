#include "osncrypt/analysis.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <limits>

#include "osncrypt/errors.hpp"

namespace osncrypt::analysis {

double channel_entropy(std::span<const std::uint8_t> samples) {
  if (samples.empty()) return 0.0;
  std::array<std::size_t, 256> hist{};
  for (auto v : samples) ++hist[v];
  const double n = static_cast<double>(samples.size());
  double h = 0.0;
  for (auto c : hist) {
    if (c == 0) continue;
    const double p = static_cast<double>(c) / n;
    h -= p * std::log2(p);
  }
  return h;
}

std::vector<double> component_entropies(const jpeg::CoefficientImage& img) {
  std::vector<double> out;
  for (std::size_t i = 0; i < img.planes.size(); ++i) {
    const auto samples = jpeg::component_samples(img, i);
    out.push_back(channel_entropy(clamp_spatial(samples.samples)));
  }
  return out;
}

std::vector<std::uint8_t> channel_of(const PixelImage& img, int c) {
  std::vector<std::uint8_t> out;
  out.reserve(static_cast<std::size_t>(img.width) * img.height);
  for (std::size_t i = static_cast<std::size_t>(c); i < img.samples.size();
       i += static_cast<std::size_t>(img.channels))
    out.push_back(img.samples[i]);
  return out;
}

double psnr(const PixelImage& a, const PixelImage& b) {
  if (a.width != b.width || a.height != b.height || a.channels != b.channels)
    throw DimensionMismatch("psnr: images differ in size or channel count");
  if (a.samples.empty()) throw DimensionMismatch("psnr: empty images");
  double sse = 0.0;
  for (std::size_t i = 0; i < a.samples.size(); ++i) {
    const double d = static_cast<double>(a.samples[i]) - b.samples[i];
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  const double mse = sse / static_cast<double>(a.samples.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

std::string_view to_string(AttackKind k) {
  switch (k) {
    case AttackKind::Dcm: return "dcm";
    case AttackKind::Ncc: return "ncc";
    case AttackKind::Eac: return "eac";
    case AttackKind::Plz: return "plz";
  }
  return "?";
}

AttackKind parse_attack_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  for (auto k : {AttackKind::Dcm, AttackKind::Ncc, AttackKind::Eac, AttackKind::Plz})
    if (lower == to_string(k)) return k;
  throw InputError("unknown attack kind '" + std::string(name) + "'");
}

namespace {

AttackMap blank(AttackKind kind, const jpeg::CoefficientPlane& plane) {
  AttackMap m;
  m.kind = kind;
  m.blocks_w = plane.blocks_w;
  m.blocks_h = plane.blocks_h;
  m.intensity.resize(plane.block_count());
  return m;
}

std::uint8_t scaled(double value, double max_value) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(value * 255.0 / max_value, 0.0, 255.0)));
}

}  // namespace

AttackMap attack_dcm(const jpeg::CoefficientPlane& plane) {
  auto m = blank(AttackKind::Dcm, plane);
  for (std::size_t i = 0; i < plane.blocks.size(); ++i)
    m.intensity[i] = scaled(jpeg::magnitude_category(plane.blocks[i][0]), 11.0);
  return m;
}

AttackMap attack_ncc(const jpeg::CoefficientPlane& plane) {
  auto m = blank(AttackKind::Ncc, plane);
  for (std::size_t i = 0; i < plane.blocks.size(); ++i) {
    const auto& b = plane.blocks[i];
    const auto n = std::count_if(b.begin() + 1, b.end(), [](int v) { return v != 0; });
    m.intensity[i] = scaled(static_cast<double>(n), 63.0);
  }
  return m;
}

AttackMap attack_eac(const jpeg::CoefficientPlane& plane) {
  auto m = blank(AttackKind::Eac, plane);
  std::vector<double> energy(plane.block_count());
  double e_max = 0.0;
  for (std::size_t i = 0; i < plane.blocks.size(); ++i) {
    double e = 0.0;
    for (int k = 1; k < jpeg::kBlockArea; ++k) e += static_cast<double>(plane.blocks[i][k]) * plane.blocks[i][k];
    energy[i] = e;
    e_max = std::max(e_max, e);
  }
  if (e_max == 0.0) return m;
  const double denom = std::log1p(e_max);
  for (std::size_t i = 0; i < energy.size(); ++i) m.intensity[i] = scaled(std::log1p(energy[i]), denom);
  return m;
}

AttackMap attack_plz(const jpeg::CoefficientPlane& plane) {
  auto m = blank(AttackKind::Plz, plane);
  for (std::size_t i = 0; i < plane.blocks.size(); ++i) {
    const auto& b = plane.blocks[i];
    int last = 0;
    for (int k = jpeg::kBlockArea - 1; k > 0; --k)
      if (b[k] != 0) {
        last = k;
        break;
      }
    m.intensity[i] = scaled(last, 63.0);
  }
  return m;
}

AttackMap run_attack(AttackKind kind, const jpeg::CoefficientPlane& plane) {
  switch (kind) {
    case AttackKind::Dcm: return attack_dcm(plane);
    case AttackKind::Ncc: return attack_ncc(plane);
    case AttackKind::Eac: return attack_eac(plane);
    case AttackKind::Plz: return attack_plz(plane);
  }
  throw InputError("unknown attack kind");
}

double leak_score(const AttackMap& plain, const AttackMap& cipher) {
  if (plain.blocks_w != cipher.blocks_w || plain.blocks_h != cipher.blocks_h ||
      plain.intensity.size() != cipher.intensity.size())
    throw GridMismatch("attack maps have different grids");
  const std::size_t n = plain.intensity.size();
  if (n == 0) return 0.0;
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += plain.intensity[i];
    mb += cipher.intensity[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double da = plain.intensity[i] - ma;
    const double db = cipher.intensity[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

PixelImage attack_map_image(const AttackMap& map, int scale) {
  if (scale < 1) throw InputError("scale must be positive");
  PixelImage img(map.blocks_w * scale, map.blocks_h * scale, 1);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x)
      img.at(x, y) = map.intensity[static_cast<std::size_t>(y / scale) * map.blocks_w + x / scale];
  return img;
}

}  // namespace osncrypt::analysis
