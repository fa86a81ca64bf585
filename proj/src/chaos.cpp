#include "osncrypt/chaos.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "osncrypt/errors.hpp"

namespace osncrypt::chaos {

namespace {

constexpr double kDivergenceBound = 10.0;

void check_burn_in(int burn_in) {
  if (burn_in < 0) throw InvalidKey("burn-in must be non-negative");
}

}  // namespace

void validate_key_params(const LogisticParams& p) {
  if (!(p.mu > 3.6 && p.mu < 4.0))
    throw InvalidKey("logistic mu must satisfy 3.6 < mu < 4");
  if (!(p.x0 > 0.0 && p.x0 < 1.0))
    throw InvalidKey("logistic x0 must satisfy 0 < x0 < 1");
  try {
    LogisticMap probe(p);
  } catch (const DegenerateOrbit&) {
    throw InvalidKey("logistic orbit collapses during burn-in");
  }
}

void validate_key_params(const HenonParams& p) {
  if (!(p.a > 1.05 && p.a < 1.8))
    throw InvalidKey("henon a must satisfy 1.05 < a < 1.8");
  if (p.b != kHenonB) throw InvalidKey("henon b must be 0.3");
  if (!std::isfinite(p.x0) || !std::isfinite(p.y0))
    throw InvalidKey("henon initial state must be finite");
  check_burn_in(p.burn_in);
  double x = p.x0;
  double y = p.y0;
  for (int i = 0; i < p.burn_in; ++i) {
    const double nx = 1.0 - p.a * x * x + y;
    y = p.b * x;
    x = nx;
    if (!(std::fabs(x) < 2.0 && std::fabs(y) < 1.0))
      throw InvalidKey("henon orbit leaves the attractor region during burn-in");
  }
}

// ---------------------------------------------------------------- Logistic

LogisticMap::LogisticMap(const LogisticParams& p) : mu_(p.mu), x_(p.x0) {
  check_burn_in(p.burn_in);
  if (!(x_ > 0.0 && x_ < 1.0)) throw DegenerateOrbit("logistic x0 must lie in (0, 1)");
  for (int i = 0; i < p.burn_in; ++i) next();
}

double LogisticMap::next() {
  x_ = mu_ * x_ * (1.0 - x_);
  if (x_ <= 0.0 || x_ >= 1.0 || std::isnan(x_))
    throw DegenerateOrbit("logistic orbit reached a fixed boundary");
  return x_;
}

std::vector<double> LogisticMap::take(std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = next();
  return out;
}

std::vector<std::size_t> LogisticMap::permutation(std::size_t k) {
  const auto values = take(k);
  return derive_permutation(values, k);
}

// ---------------------------------------------------------------- Henon

HenonMap::HenonMap(const HenonParams& p) : a_(p.a), b_(p.b), x_(p.x0), y_(p.y0) {
  check_burn_in(p.burn_in);
  for (int i = 0; i < p.burn_in; ++i) next();
}

double HenonMap::next() {
  const double nx = 1.0 - a_ * x_ * x_ + y_;
  y_ = b_ * x_;
  x_ = nx;
  if (!(std::fabs(x_) < kDivergenceBound))
    throw DivergentOrbit("henon orbit diverged");
  return x_;
}

std::vector<double> HenonMap::take(std::size_t n) {
  std::vector<double> out(n);
  for (auto& v : out) v = next();
  return out;
}

bool HenonMap::next_bit() { return henon_bit(next()); }

std::vector<double> logistic_sequence(const LogisticParams& p, std::size_t n) {
  LogisticMap map(p);
  return map.take(n);
}

std::vector<double> henon_sequence(const HenonParams& p, std::size_t n) {
  HenonMap map(p);
  return map.take(n);
}

std::vector<std::size_t> derive_permutation(std::span<const double> seq, std::size_t k) {
  if (seq.size() < k) throw InsufficientSequence("sequence shorter than permutation size");
  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::stable_sort(perm.begin(), perm.end(),
                   [&](std::size_t l, std::size_t r) { return seq[l] < seq[r]; });
  return perm;
}

bool henon_bit(double x) {
  return static_cast<std::uint64_t>(std::floor(std::fabs(x) * 1e6)) & 1u;
}

std::vector<std::uint8_t> bits_from_henon(std::span<const double> seq, std::size_t n_bits) {
  if (seq.size() < n_bits) throw InsufficientSequence("sequence shorter than requested bits");
  std::vector<std::uint8_t> bits(n_bits);
  for (std::size_t i = 0; i < n_bits; ++i) bits[i] = henon_bit(seq[i]) ? 1 : 0;
  return bits;
}

// ---------------------------------------------------------------- ECUs

std::uint16_t Ecu::prefix(int k) const {
  if (k <= 0) return 0;
  if (k >= kBits) return bits_;
  return static_cast<std::uint16_t>(bits_ >> (kBits - k));
}

std::string Ecu::to_string() const {
  std::string s(kBits, '0');
  for (int i = 1; i <= kBits; ++i)
    if (bit(i)) s[i - 1] = '1';
  return s;
}

std::vector<EcuGroup> make_ecus(std::span<const std::uint8_t> bits) {
  const std::size_t n_groups = bits.size() / kBitsPerGroup;
  std::vector<EcuGroup> groups(n_groups);
  std::size_t pos = 0;
  for (auto& group : groups) {
    for (auto& ecu : group) {
      std::uint16_t v = 0;
      for (int b = 0; b < Ecu::kBits; ++b) v = static_cast<std::uint16_t>((v << 1) | (bits[pos++] & 1u));
      ecu = Ecu(v);
    }
  }
  return groups;
}

std::vector<EcuGroup> EcuStream::take(std::size_t n_groups) {
  std::vector<EcuGroup> groups(n_groups);
  for (auto& group : groups) {
    for (auto& ecu : group) {
      std::uint16_t v = 0;
      for (int b = 0; b < Ecu::kBits; ++b)
        v = static_cast<std::uint16_t>((v << 1) | (map_.next_bit() ? 1u : 0u));
      ecu = Ecu(v);
    }
  }
  consumed_ += n_groups;
  return groups;
}

// ---------------------------------------------------------------- Keys

EncryptionKey::EncryptionKey(const LogisticParams& k1, const HenonParams& k2) : k1_(k1), k2_(k2) {
  validate_key_params(k1_);
  validate_key_params(k2_);
}

EncryptionKey::EncryptionKey(double mu, double logistic_x0, double henon_a, double henon_x0,
                             double henon_y0)
    : EncryptionKey(LogisticParams{mu, logistic_x0, kDefaultBurnIn},
                    HenonParams{henon_a, kHenonB, henon_x0, henon_y0, kDefaultBurnIn}) {}

namespace {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string EncryptionKey::to_text() const {
  std::string out;
  for (double v : {k1_.mu, k1_.x0, k2_.a, k2_.x0, k2_.y0}) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

EncryptionKey EncryptionKey::parse(const std::string& text) {
  std::vector<double> values;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto tok = trim(line);
    if (tok.empty()) continue;
    double v = 0.0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
      throw InvalidKey("key file line " + std::to_string(line_no) + ": not a decimal number: '" +
                       std::string(tok) + "'");
    values.push_back(v);
  }
  if (values.size() != 5)
    throw InvalidKey("key file must hold exactly 5 values, found " + std::to_string(values.size()));
  return EncryptionKey(values[0], values[1], values[2], values[3], values[4]);
}

EncryptionKey EncryptionKey::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open key file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

namespace {

// Portable uniform draw in the open interval (lo, hi).
double draw_open(std::mt19937_64& rng, double lo, double hi) {
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    const double v = lo + (hi - lo) * u;
    if (v > lo && v < hi) return v;
  }
}

bool keystreams_healthy(const EncryptionKey& key) {
  constexpr std::size_t kLogisticTrial = 10'000;
  constexpr std::size_t kHenonTrial = std::size_t{1} << 22;
  try {
    LogisticMap logistic(key.k1());
    auto values = logistic.take(kLogisticTrial);
    std::sort(values.begin(), values.end());
    const auto distinct =
        static_cast<std::size_t>(std::unique(values.begin(), values.end()) - values.begin());
    if (distinct < kLogisticTrial - kLogisticTrial / 1000) return false;

    HenonMap henon(key.k2());
    std::size_t ones = 0;
    for (std::size_t i = 0; i < kHenonTrial; ++i) ones += henon.next_bit() ? 1 : 0;
    const double freq = static_cast<double>(ones) / static_cast<double>(kHenonTrial);
    return freq > 0.48 && freq < 0.52;
  } catch (const Error&) {
    return false;
  }
}

}  // namespace

EncryptionKey EncryptionKey::generate(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  for (;;) {
    const double mu = draw_open(rng, 3.6, 4.0);
    const double lx0 = draw_open(rng, 0.0, 1.0);
    const double a = draw_open(rng, 1.05, 1.8);
    const double hx0 = draw_open(rng, -1.0, 1.0);
    const double hy0 = draw_open(rng, -0.3, 0.3);
    try {
      EncryptionKey key(mu, lx0, a, hx0, hy0);
      if (keystreams_healthy(key)) return key;
    } catch (const InvalidKey&) {
    }
  }
}

}  // namespace osncrypt::chaos
