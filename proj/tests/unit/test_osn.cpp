#include <doctest.h>

#include <random>

#include "osncrypt/cipher.hpp"
#include "osncrypt/errors.hpp"
#include "osncrypt/osn_sim.hpp"

using namespace osncrypt;
using namespace osncrypt::osn;

namespace {

const chaos::EncryptionKey& test_key() {
  static const chaos::EncryptionKey k(3.91234567891, 0.41234567891, 1.39, 0.21, -0.07);
  return k;
}

std::vector<std::uint8_t> smooth_jpeg(int w, int h) {
  PixelImage img(w, h, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      img.at(x, y, 0) = static_cast<std::uint8_t>(100 + (x * 50) / w);
      img.at(x, y, 1) = static_cast<std::uint8_t>(90 + (y * 60) / h);
      img.at(x, y, 2) = 128;
    }
  return jpeg::encode_jpeg(jpeg::compress(img, 71));
}

void check_accounting(const SurvivalReport& r) {
  for (const auto& c : r.components) {
    CHECK(c.identical + c.changed == c.total);
    CHECK(c.zero_flips <= c.category_changes);
    CHECK(c.category_changes <= c.changed);
    CHECK(c.identical_fraction() >= 0.0);
    CHECK(c.identical_fraction() <= 1.0);
  }
}

}  // namespace

TEST_CASE("survival report of a file against itself") {
  const auto bytes = smooth_jpeg(40, 24);
  const auto r = survival_report(bytes, bytes);
  CHECK(r.components.size() == 3);
  CHECK(r.overall().identical_fraction() == 1.0);
  CHECK(r.overall().changed == 0);
  check_accounting(r);
  const auto text = r.to_text();
  CHECK(text.find("identical_fraction=1.000000") != std::string::npos);
  CHECK(text.find("total=") != std::string::npos);
}

TEST_CASE("survival report rejects different geometry") {
  CHECK_THROWS_AS(survival_report(smooth_jpeg(40, 24), smooth_jpeg(48, 24)), DimensionMismatch);
}

TEST_CASE("flat gray image: recompression is the identity on coefficients") {
  const auto bytes = jpeg::encode_jpeg(jpeg::compress(PixelImage(64, 64, 3, 128), 71));
  const auto out = platform_process(bytes);
  CHECK(jpeg::decode_jpeg(out) == jpeg::decode_jpeg(bytes));
}

TEST_CASE("processing twice equals processing once on clamp-free images") {
  const auto once = platform_process(smooth_jpeg(64, 40));
  const auto twice = platform_process(once);
  CHECK(jpeg::decode_jpeg(twice) == jpeg::decode_jpeg(once));
}

TEST_CASE("size guard") {
  const auto big = jpeg::encode_jpeg(jpeg::compress(PixelImage(2048, 2048, 1, 128), 71));
  CHECK_THROWS_AS(platform_process(big), Unsupported);
  const auto wide = jpeg::encode_jpeg(jpeg::compress(PixelImage(2048, 8, 1, 128), 71));
  CHECK_THROWS_AS(platform_process(wide), Unsupported);
  const auto ok = jpeg::encode_jpeg(jpeg::compress(PixelImage(2047, 8, 1, 128), 71));
  CHECK_NOTHROW(platform_process(ok));
}

TEST_CASE("bad policy and bad input") {
  PlatformPolicy p;
  p.recompress_qf = 0;
  CHECK_THROWS_AS(platform_process(smooth_jpeg(8, 8), p), QualityOutOfRange);
  CHECK_THROWS_AS(platform_process(std::vector<std::uint8_t>{1, 2, 3}), MalformedBitstream);
}

TEST_CASE("encrypted Lena survives the platform") {
  const auto img = read_netpbm(std::string(OSNCRYPT_TEST_DATA) + "/lena.ppm");
  const auto ct = cipher::encrypt_image(img, test_key());
  const auto out = platform_process(ct.jpeg);
  CHECK_NOTHROW(jpeg::decode_jpeg(out));
  const auto r = survival_report(ct.jpeg, out);
  check_accounting(r);
  // First measured run: 0.99649 identical; fewer than 10% may differ.
  MESSAGE("identical fraction " << r.overall().identical_fraction());
  CHECK(r.overall().identical_fraction() >= 0.99);
  CHECK(r.overall().identical_fraction() > 0.90);
}

TEST_CASE("a lower platform quality changes more") {
  const auto img = read_netpbm(std::string(OSNCRYPT_TEST_DATA) + "/mandrill.ppm");
  const auto ct = cipher::encrypt_image(img, test_key());
  PlatformPolicy low;
  low.recompress_qf = 50;
  const auto r71 = survival_report(ct.jpeg, platform_process(ct.jpeg));
  const auto out50 = platform_process(ct.jpeg, low);
  const auto r50 = survival_report(ct.jpeg, out50);
  check_accounting(r50);
  CHECK(r50.overall().identical_fraction() < r71.overall().identical_fraction());
}
