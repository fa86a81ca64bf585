#pragma once

// Logistic and Henon map keystreams.
//
// Both maps are iterated in IEEE binary64 with one fixed expression each, so
// identical parameters give bit-identical streams on every conforming
// platform (the build disables FMA contraction).

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace osncrypt::chaos {

inline constexpr int kDefaultBurnIn = 1000;
inline constexpr double kHenonB = 0.3;

struct LogisticParams {
  double mu = 3.99;
  double x0 = 0.5;
  int burn_in = kDefaultBurnIn;
};

struct HenonParams {
  double a = 1.4;
  double b = kHenonB;
  double x0 = 0.1;
  double y0 = 0.1;
  int burn_in = kDefaultBurnIn;
};

// Throws InvalidKey unless the parameters sit in the chaotic regime used for
// keys: 3.6 < mu < 4, 0 < x0 < 1, and no collapse to 0 or 1 during burn-in.
void validate_key_params(const LogisticParams& p);
// 1.05 < a < 1.8, b == 0.3, and the orbit stays within |x| < 2, |y| < 1
// through burn-in.
void validate_key_params(const HenonParams& p);

// x <- mu * x * (1 - x). Construction runs the burn-in.
class LogisticMap {
 public:
  explicit LogisticMap(const LogisticParams& p);

  // Throws DegenerateOrbit if the state reaches exactly 0 or 1.
  double next();
  std::vector<double> take(std::size_t n);

  // Argsort of the next k values (see derive_permutation).
  std::vector<std::size_t> permutation(std::size_t k);

 private:
  double mu_;
  double x_;
};

// (x, y) <- (1 - a*x*x + y, b*x). Construction runs the burn-in.
class HenonMap {
 public:
  explicit HenonMap(const HenonParams& p);

  // Returns the next x-coordinate. Throws DivergentOrbit once |x| >= 10.
  double next();
  std::vector<double> take(std::size_t n);

  // One keystream bit per iteration (see bits_from_henon).
  bool next_bit();

 private:
  double a_;
  double b_;
  double x_;
  double y_;
};

std::vector<double> logistic_sequence(const LogisticParams& p, std::size_t n);
std::vector<double> henon_sequence(const HenonParams& p, std::size_t n);

// Permutation pi with seq[pi[0]] <= seq[pi[1]] <= ... over the first k values.
// Ties keep index order. Throws InsufficientSequence when seq.size() < k.
std::vector<std::size_t> derive_permutation(std::span<const double> seq, std::size_t k);

// bit i = floor(|seq[i]| * 1e6) mod 2.
bool henon_bit(double x);
std::vector<std::uint8_t> bits_from_henon(std::span<const double> seq, std::size_t n_bits);

// 11-bit encryption minimal unit. Bit 1 is the most significant of the 11.
class Ecu {
 public:
  static constexpr int kBits = 11;

  Ecu() = default;
  explicit Ecu(std::uint16_t pattern) : bits_(pattern & 0x7FF) {}

  std::uint16_t pattern() const { return bits_; }
  // The first k bits as an unsigned integer (ECU(k) notation), 0 <= k <= 11.
  std::uint16_t prefix(int k) const;
  // Bit i, 1-based from the most significant end.
  bool bit(int i) const { return (bits_ >> (kBits - i)) & 1u; }
  std::string to_string() const;

  friend bool operator==(Ecu, Ecu) = default;

 private:
  std::uint16_t bits_ = 0;
};

inline constexpr std::size_t kEcusPerGroup = 63;
inline constexpr std::size_t kBitsPerGroup = kEcusPerGroup * Ecu::kBits;

// One group per 8x8 block: ECU j (0-based) keys zigzag position j + 1.
using EcuGroup = std::array<Ecu, kEcusPerGroup>;

// Slices a bitstream (one bit per byte, values 0/1) into groups of 63 ECUs.
// bits.size() must be a multiple of 693; trailing bits are ignored otherwise.
std::vector<EcuGroup> make_ecus(std::span<const std::uint8_t> bits);

// Henon-driven ECU source that materializes groups on demand. The cursor only
// moves forward; take(n) hands out the next n groups.
class EcuStream {
 public:
  explicit EcuStream(const HenonParams& p) : map_(p) {}

  std::vector<EcuGroup> take(std::size_t n_groups);
  std::size_t consumed() const { return consumed_; }

 private:
  HenonMap map_;
  std::size_t consumed_ = 0;
};

// The (K1, K2) key pair: K1 drives the Logistic map, K2 the Henon map.
class EncryptionKey {
 public:
  // Validates both halves; throws InvalidKey.
  EncryptionKey(const LogisticParams& k1, const HenonParams& k2);
  EncryptionKey(double mu, double logistic_x0, double henon_a, double henon_x0,
                double henon_y0);

  const LogisticParams& k1() const { return k1_; }
  const HenonParams& k2() const { return k2_; }

  // Five decimal lines: mu, logistic_x0, henon_a, henon_x0, henon_y0.
  std::string to_text() const;
  static EncryptionKey parse(const std::string& text);
  static EncryptionKey load(const std::filesystem::path& path);

  // Uniform draws inside the chaotic ranges, rejection-sampled until the key
  // validates and a trial keystream stays bounded and balanced.
  static EncryptionKey generate(std::uint64_t seed);

 private:
  LogisticParams k1_;
  HenonParams k2_;
};

}  // namespace osncrypt::chaos
