#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "osncrypt/analysis.hpp"
#include "osncrypt/cipher.hpp"
#include "osncrypt/errors.hpp"

using namespace osncrypt;
using namespace osncrypt::analysis;
using jpeg::CoefficientPlane;
using jpeg::Component;

TEST_CASE("entropy extremes") {
  const std::vector<std::uint8_t> constant(1000, 77);
  CHECK(channel_entropy(constant) == 0.0);
  std::vector<std::uint8_t> uniform(256 * 4);
  for (std::size_t i = 0; i < uniform.size(); ++i) uniform[i] = static_cast<std::uint8_t>(i);
  CHECK(channel_entropy(uniform) == doctest::Approx(8.0).epsilon(1e-12));
  const std::vector<std::uint8_t> two{0, 255, 0, 255};
  CHECK(channel_entropy(two) == doctest::Approx(1.0));
  CHECK(channel_entropy({}) == 0.0);
}

TEST_CASE("entropy is invariant under permutation of samples") {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> d(0, 40);
  std::vector<std::uint8_t> v(5000);
  for (auto& x : v) x = static_cast<std::uint8_t>(d(rng));
  const double h = channel_entropy(v);
  std::shuffle(v.begin(), v.end(), rng);
  CHECK(channel_entropy(v) == doctest::Approx(h).epsilon(1e-12));
}

TEST_CASE("psnr") {
  PixelImage a(4, 4, 3, 0);
  PixelImage b(4, 4, 3, 255);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, b) == doctest::Approx(0.0));
  PixelImage c = a;
  c.samples[0] = 10;
  CHECK(psnr(a, c) == doctest::Approx(psnr(c, a)));
  CHECK(psnr(a, c) == doctest::Approx(10 * std::log10(255.0 * 255.0 * 48 / 100)));
  CHECK_THROWS_AS(psnr(a, PixelImage(4, 4, 1)), DimensionMismatch);
  CHECK_THROWS_AS(psnr(a, PixelImage(4, 5, 3)), DimensionMismatch);
}

TEST_CASE("attack kinds parse") {
  CHECK(parse_attack_kind("dcm") == AttackKind::Dcm);
  CHECK(parse_attack_kind("PLZ") == AttackKind::Plz);
  CHECK(to_string(AttackKind::Eac) == "eac");
  CHECK_THROWS_AS(parse_attack_kind("sobel"), InputError);
}

TEST_CASE("DCM") {
  CoefficientPlane p(Component::Y, 3, 1);
  const auto zero = attack_dcm(p);
  CHECK(std::all_of(zero.intensity.begin(), zero.intensity.end(), [](auto v) { return v == 0; }));
  p.blocks[1][0] = 1016;
  p.blocks[2][0] = -1;
  const auto m = attack_dcm(p);
  CHECK(m.intensity[1] == 232);
  CHECK(m.intensity[2] == 23);
}

TEST_CASE("DCM on a DC-permuted image keeps the histogram, not the layout") {
  const auto img = read_netpbm(std::string(OSNCRYPT_TEST_DATA) + "/lena.ppm");
  const auto y = jpeg::compress(img, 71).planes[0];
  chaos::LogisticMap lm({3.93, 0.31, 1000});
  const auto shuffled = cipher::encrypt_dc_blocks(y, cipher::plan_permutations(lm, y.blocks_w, y.blocks_h));
  auto a = attack_dcm(y);
  auto b = attack_dcm(shuffled);
  CHECK(std::fabs(leak_score(a, b)) < 0.1);
  std::sort(a.intensity.begin(), a.intensity.end());
  std::sort(b.intensity.begin(), b.intensity.end());
  CHECK(a.intensity == b.intensity);
}

TEST_CASE("NCC") {
  CoefficientPlane p(Component::Y, 2, 1);
  CHECK(attack_ncc(p).intensity == std::vector<std::uint8_t>{0, 0});
  for (int k = 1; k < 64; ++k) p.blocks[1][k] = k % 2 ? 1 : -3;
  p.blocks[0][0] = 500;
  CHECK(attack_ncc(p).intensity == std::vector<std::uint8_t>{0, 255});
}

TEST_CASE("EAC is even in each coefficient") {
  CoefficientPlane p(Component::Y, 3, 1);
  CHECK(attack_eac(p).intensity == std::vector<std::uint8_t>{0, 0, 0});
  p.blocks[0][5] = 7;
  p.blocks[1][5] = -7;
  p.blocks[2][9] = 3;
  const auto m = attack_eac(p);
  CHECK(m.intensity[0] == m.intensity[1]);
  CHECK(m.intensity[0] == 255);
  CHECK(m.intensity[2] == static_cast<std::uint8_t>(std::lround(255 * std::log1p(9.0) / std::log1p(49.0))));
}

TEST_CASE("PLZ") {
  CoefficientPlane p(Component::Y, 3, 1);
  p.blocks[0][0] = 99;
  p.blocks[1][63] = -1;
  p.blocks[2][21] = 4;
  p.blocks[2][3] = 4;
  const auto m = attack_plz(p);
  CHECK(m.intensity[0] == 0);
  CHECK(m.intensity[1] == 255);
  CHECK(m.intensity[2] == static_cast<std::uint8_t>(std::lround(21 * 255.0 / 63)));
}

TEST_CASE("leak score") {
  AttackMap a{AttackKind::Plz, 4, 1, {10, 50, 200, 90}};
  AttackMap neg = a;
  for (auto& v : neg.intensity) v = static_cast<std::uint8_t>(255 - v);
  CHECK(leak_score(a, a) == doctest::Approx(1.0));
  CHECK(leak_score(a, neg) == doctest::Approx(-1.0));
  AttackMap flat{AttackKind::Plz, 4, 1, {5, 5, 5, 5}};
  CHECK(leak_score(a, flat) == 0.0);
  AttackMap other{AttackKind::Plz, 2, 2, {10, 50, 200, 90}};
  CHECK_THROWS_AS(leak_score(a, other), GridMismatch);
}

TEST_CASE("attack map rendering") {
  AttackMap a{AttackKind::Ncc, 2, 1, {10, 200}};
  const auto img = attack_map_image(a, 8);
  CHECK(img.width == 16);
  CHECK(img.height == 8);
  CHECK(img.at(7, 7) == 10);
  CHECK(img.at(8, 0) == 200);
  CHECK(attack_map_image(a).width == 2);
  CHECK_THROWS_AS(attack_map_image(a, 0), InputError);
}

TEST_CASE("plain Lena leaks edges to every attack") {
  const auto img = read_netpbm(std::string(OSNCRYPT_TEST_DATA) + "/lena.ppm");
  const auto y = jpeg::compress(img, 71).planes[0];
  // Each map correlates with the others on a natural image, which is what
  // makes them usable edge detectors in the first place.
  const auto ncc = attack_ncc(y);
  CHECK(leak_score(ncc, attack_eac(y)) > 0.5);
  CHECK(leak_score(ncc, attack_plz(y)) > 0.5);
}

TEST_CASE("component entropies of a ciphertext") {
  const auto img = read_netpbm(std::string(OSNCRYPT_TEST_DATA) + "/lena.ppm");
  const auto plain = jpeg::compress(img, 71);
  const auto e = component_entropies(plain);
  REQUIRE(e.size() == 3);
  for (double h : e) {
    CHECK(h > 0.0);
    CHECK(h <= 8.0);
  }
}
