#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <ostream>
#include <random>

#include "osncrypt/analysis.hpp"
#include "osncrypt/chaos.hpp"
#include "osncrypt/cipher.hpp"
#include "osncrypt/errors.hpp"
#include "osncrypt/image.hpp"
#include "osncrypt/jpeg.hpp"
#include "osncrypt/osn_sim.hpp"

namespace osncrypt::cli {

namespace fs = std::filesystem;

namespace {

// Re-throws library input errors with the offending file name attached.
template <typename F>
auto with_file(const fs::path& path, F&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const PolicyError& e) {
    throw PolicyError(path.string() + ": " + e.what());
  } catch (const Error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

bool looks_like_jpeg(const std::vector<std::uint8_t>& bytes) {
  return bytes.size() >= 2 && bytes[0] == 0xFF && bytes[1] == 0xD8;
}

std::string fixed(double v, int digits = 4) {
  if (std::isinf(v)) return "inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

struct LoadedImage {
  PixelImage pixels;
  std::optional<jpeg::CoefficientImage> coefficients;
};

LoadedImage load_any_image(const fs::path& path) {
  return with_file(path, [&] {
    const auto bytes = read_file(path);
    LoadedImage img;
    if (looks_like_jpeg(bytes)) {
      img.coefficients = jpeg::decode_jpeg(bytes);
      img.pixels = jpeg::decompress(*img.coefficients);
    } else {
      img.pixels = decode_netpbm(bytes);
    }
    return img;
  });
}

chaos::EncryptionKey load_key(const fs::path& path) {
  return with_file(path, [&] { return chaos::EncryptionKey::load(path); });
}

struct Options {
  std::string in;
  std::string out;
  std::string key;
  std::string a;
  std::string b;
  std::string kind;
  std::string component = "y";
  std::uint64_t seed = 0;
  int qf = 71;
};

int cmd_keygen(const Options& o, CLI::Option* seed_opt, std::ostream& out) {
  const std::uint64_t seed = seed_opt->count() ? o.seed : std::random_device{}();
  const auto key = chaos::EncryptionKey::generate(seed);
  const auto text = key.to_text();
  write_file_atomic(o.out, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
  out << "wrote key " << o.out << "\n";
  return kOk;
}

int cmd_encrypt(const Options& o, std::ostream& out) {
  const auto key = load_key(o.key);
  const auto img = with_file(o.in, [&] { return read_netpbm(o.in); });
  const auto ct = with_file(o.in, [&] { return cipher::encrypt_image(img, key); });
  write_file_atomic(o.out, ct.jpeg);
  out << "encrypted " << img.width << "x" << img.height << " at quality " << ct.quality << " -> "
      << o.out << " (" << ct.jpeg.size() << " bytes)\n";
  return kOk;
}

int cmd_decrypt(const Options& o, std::ostream& out) {
  const auto key = load_key(o.key);
  const auto bytes = with_file(o.in, [&] { return read_file(o.in); });
  const auto img = with_file(o.in, [&] { return cipher::decrypt_image(bytes, key); });
  write_file_atomic(o.out, encode_netpbm(img));
  out << "decrypted " << img.width << "x" << img.height << " -> " << o.out << "\n";
  return kOk;
}

int cmd_analyze(const Options& o, CLI::Option* b_opt, std::ostream& out) {
  const auto a = load_any_image(o.a);
  if (a.coefficients) {
    static const char* names[] = {"Y", "Cb", "Cr", "K"};
    const auto ent = analysis::component_entropies(*a.coefficients);
    for (std::size_t i = 0; i < ent.size(); ++i)
      out << "entropy_" << names[std::min<std::size_t>(i, 3)] << "=" << fixed(ent[i]) << "\n";
  } else {
    static const char* rgb[] = {"R", "G", "B"};
    for (int c = 0; c < a.pixels.channels; ++c)
      out << "entropy_" << (a.pixels.channels == 1 ? "gray" : rgb[c]) << "="
          << fixed(analysis::channel_entropy(analysis::channel_of(a.pixels, c))) << "\n";
  }
  if (b_opt->count()) {
    const auto b = load_any_image(o.b);
    out << "psnr=" << fixed(analysis::psnr(a.pixels, b.pixels)) << "\n";
  }
  return kOk;
}

int cmd_attack(const Options& o, std::ostream& out) {
  const auto kind = analysis::parse_attack_kind(o.kind);
  std::size_t index = 0;
  if (o.component == "y") index = 0;
  else if (o.component == "cb") index = 1;
  else if (o.component == "cr") index = 2;
  else throw InputError("component must be y, cb or cr");
  const auto bytes = with_file(o.in, [&] { return read_file(o.in); });
  const auto img = with_file(o.in, [&] { return jpeg::decode_jpeg(bytes); });
  if (index >= img.planes.size())
    throw InputError(o.in + ": image has no component '" + o.component + "'");
  const auto map = analysis::run_attack(kind, img.planes[index]);

  fs::path upscaled(o.out);
  upscaled.replace_extension(".x8.pgm");
  const auto small = encode_netpbm(analysis::attack_map_image(map, 1));
  const auto large = encode_netpbm(analysis::attack_map_image(map, 8));
  write_file_atomic(o.out, small);
  write_file_atomic(upscaled, large);
  out << analysis::to_string(kind) << " map " << map.blocks_w << "x" << map.blocks_h << " -> "
      << o.out << " (x8: " << upscaled.string() << ")\n";
  return kOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
  osn::PlatformPolicy policy;
  policy.recompress_qf = o.qf;
  const auto bytes = with_file(o.in, [&] { return read_file(o.in); });
  const auto processed = with_file(o.in, [&] { return osn::platform_process(bytes, policy); });
  const auto report = osn::survival_report(bytes, processed);
  write_file_atomic(o.out, processed);
  out << report.to_text();
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"JPEG-domain chaotic image encryption toolkit", "osncrypt"};
  app.require_subcommand(1);
  Options o;

  auto* keygen = app.add_subcommand("keygen", "Generate a key file");
  keygen->add_option("--out", o.out, "Key file to write")->required();
  auto* seed_opt = keygen->add_option("--seed", o.seed, "Deterministic seed");

  auto* encrypt = app.add_subcommand("encrypt", "Encrypt a PPM/PGM image into a JPEG");
  encrypt->add_option("--in", o.in, "Plain PPM/PGM image")->required();
  encrypt->add_option("--key", o.key, "Key file")->required();
  encrypt->add_option("--out", o.out, "Ciphertext JPEG")->required();

  auto* decrypt = app.add_subcommand("decrypt", "Decrypt a ciphertext JPEG into a PPM/PGM image");
  decrypt->add_option("--in", o.in, "Ciphertext JPEG")->required();
  decrypt->add_option("--key", o.key, "Key file")->required();
  decrypt->add_option("--out", o.out, "Recovered PPM/PGM image")->required();

  auto* analyze = app.add_subcommand("analyze", "Channel entropies of --a and PSNR against --b");
  analyze->add_option("--a", o.a, "Image (PPM/PGM or JPEG)")->required();
  auto* b_opt = analyze->add_option("--b", o.b, "Reference image for PSNR");

  auto* attack = app.add_subcommand("attack", "Render an edge-detection attack map");
  attack->add_option("--in", o.in, "JPEG to attack")->required();
  attack->add_option("--kind", o.kind, "dcm | ncc | eac | plz")->required();
  attack->add_option("--out", o.out, "Block-resolution PGM map")->required();
  attack->add_option("--component", o.component, "y | cb | cr")->capture_default_str();

  auto* simulate = app.add_subcommand("simulate", "Simulate platform recompression of a JPEG");
  simulate->add_option("--in", o.in, "Uploaded JPEG")->required();
  simulate->add_option("--out", o.out, "Processed JPEG")->required();
  simulate->add_option("--qf", o.qf, "Recompression quality")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (keygen->parsed()) return cmd_keygen(o, seed_opt, out);
    if (encrypt->parsed()) return cmd_encrypt(o, out);
    if (decrypt->parsed()) return cmd_decrypt(o, out);
    if (analyze->parsed()) return cmd_analyze(o, b_opt, out);
    if (attack->parsed()) return cmd_attack(o, out);
    if (simulate->parsed()) return cmd_simulate(o, out);
  } catch (const PolicyError& e) {
    err << "osncrypt: " << e.what() << "\n";
    return kPolicyRejection;
  } catch (const std::exception& e) {
    err << "osncrypt: " << e.what() << "\n";
    return kInputError;
  }
  return kUsage;
}

}  // namespace osncrypt::cli
