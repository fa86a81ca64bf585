#include <algorithm>
#include <array>
#include <optional>
#include <string>

#include "osncrypt/errors.hpp"
#include "osncrypt/jpeg.hpp"

namespace osncrypt::jpeg {

namespace {

// ---------------------------------------------------------------- tables

struct HuffmanSpec {
  std::array<std::uint8_t, 16> counts;
  std::vector<std::uint8_t> symbols;
};

// Annex K.3.3 typical tables.
const HuffmanSpec kDcLuminance{{0, 1, 5, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0, 0},
                               {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffmanSpec kDcChrominance{{0, 3, 1, 1, 1, 1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0},
                                 {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}};
const HuffmanSpec kAcLuminance{
    {0, 2, 1, 3, 3, 2, 4, 3, 5, 5, 4, 4, 0, 0, 1, 125},
    {0x01, 0x02, 0x03, 0x00, 0x04, 0x11, 0x05, 0x12, 0x21, 0x31, 0x41, 0x06, 0x13, 0x51, 0x61,
     0x07, 0x22, 0x71, 0x14, 0x32, 0x81, 0x91, 0xA1, 0x08, 0x23, 0x42, 0xB1, 0xC1, 0x15, 0x52,
     0xD1, 0xF0, 0x24, 0x33, 0x62, 0x72, 0x82, 0x09, 0x0A, 0x16, 0x17, 0x18, 0x19, 0x1A, 0x25,
     0x26, 0x27, 0x28, 0x29, 0x2A, 0x34, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44, 0x45,
     0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63, 0x64,
     0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A, 0x83,
     0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97, 0x98, 0x99,
     0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4, 0xB5, 0xB6,
     0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA, 0xD2, 0xD3,
     0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE1, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7, 0xE8,
     0xE9, 0xEA, 0xF1, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA}};
const HuffmanSpec kAcChrominance{
    {0, 2, 1, 2, 4, 4, 3, 4, 7, 5, 4, 4, 0, 1, 2, 119},
    {0x00, 0x01, 0x02, 0x03, 0x11, 0x04, 0x05, 0x21, 0x31, 0x06, 0x12, 0x41, 0x51, 0x07, 0x61,
     0x71, 0x13, 0x22, 0x32, 0x81, 0x08, 0x14, 0x42, 0x91, 0xA1, 0xB1, 0xC1, 0x09, 0x23, 0x33,
     0x52, 0xF0, 0x15, 0x62, 0x72, 0xD1, 0x0A, 0x16, 0x24, 0x34, 0xE1, 0x25, 0xF1, 0x17, 0x18,
     0x19, 0x1A, 0x26, 0x27, 0x28, 0x29, 0x2A, 0x35, 0x36, 0x37, 0x38, 0x39, 0x3A, 0x43, 0x44,
     0x45, 0x46, 0x47, 0x48, 0x49, 0x4A, 0x53, 0x54, 0x55, 0x56, 0x57, 0x58, 0x59, 0x5A, 0x63,
     0x64, 0x65, 0x66, 0x67, 0x68, 0x69, 0x6A, 0x73, 0x74, 0x75, 0x76, 0x77, 0x78, 0x79, 0x7A,
     0x82, 0x83, 0x84, 0x85, 0x86, 0x87, 0x88, 0x89, 0x8A, 0x92, 0x93, 0x94, 0x95, 0x96, 0x97,
     0x98, 0x99, 0x9A, 0xA2, 0xA3, 0xA4, 0xA5, 0xA6, 0xA7, 0xA8, 0xA9, 0xAA, 0xB2, 0xB3, 0xB4,
     0xB5, 0xB6, 0xB7, 0xB8, 0xB9, 0xBA, 0xC2, 0xC3, 0xC4, 0xC5, 0xC6, 0xC7, 0xC8, 0xC9, 0xCA,
     0xD2, 0xD3, 0xD4, 0xD5, 0xD6, 0xD7, 0xD8, 0xD9, 0xDA, 0xE2, 0xE3, 0xE4, 0xE5, 0xE6, 0xE7,
     0xE8, 0xE9, 0xEA, 0xF2, 0xF3, 0xF4, 0xF5, 0xF6, 0xF7, 0xF8, 0xF9, 0xFA}};

struct Code {
  std::uint16_t bits = 0;
  std::uint8_t length = 0;
};

// Canonical code assignment (Annex C).
std::array<Code, 256> build_encoder_table(const HuffmanSpec& spec) {
  std::array<Code, 256> table{};
  std::uint16_t code = 0;
  std::size_t k = 0;
  for (int len = 1; len <= 16; ++len) {
    for (int i = 0; i < spec.counts[len - 1]; ++i) table[spec.symbols[k++]] = {code++, static_cast<std::uint8_t>(len)};
    code = static_cast<std::uint16_t>(code << 1);
  }
  return table;
}

// Decoding tables (Annex F.2.2.3).
struct DecoderTable {
  std::array<int, 17> mincode{};
  std::array<int, 17> maxcode{};
  std::array<int, 17> valptr{};
  std::vector<std::uint8_t> symbols;
};

DecoderTable build_decoder_table(const HuffmanSpec& spec) {
  DecoderTable t;
  t.symbols = spec.symbols;
  int code = 0;
  int k = 0;
  for (int len = 1; len <= 16; ++len) {
    const int n = spec.counts[len - 1];
    if (n == 0) {
      t.maxcode[len] = -1;
    } else {
      t.valptr[len] = k;
      t.mincode[len] = code;
      code += n;
      k += n;
      t.maxcode[len] = code - 1;
    }
    code <<= 1;
  }
  return t;
}

// ---------------------------------------------------------------- writing

class ByteSink {
 public:
  void byte(std::uint8_t b) { out_.push_back(b); }
  void word(std::uint16_t w) {
    byte(static_cast<std::uint8_t>(w >> 8));
    byte(static_cast<std::uint8_t>(w & 0xFF));
  }
  void marker(std::uint8_t m) {
    byte(0xFF);
    byte(m);
  }
  std::vector<std::uint8_t>& bytes() { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class BitWriter {
 public:
  explicit BitWriter(ByteSink& sink) : sink_(sink) {}

  void put(std::uint32_t bits, int length) {
    for (int i = length - 1; i >= 0; --i) {
      acc_ = static_cast<std::uint8_t>((acc_ << 1) | ((bits >> i) & 1u));
      if (++filled_ == 8) emit();
    }
  }

  void put(const Code& c) { put(c.bits, c.length); }

  // Pad the final byte with 1-bits.
  void flush() {
    while (filled_ != 0) put(1, 1);
  }

 private:
  void emit() {
    sink_.byte(acc_);
    if (acc_ == 0xFF) sink_.byte(0x00);
    acc_ = 0;
    filled_ = 0;
  }

  ByteSink& sink_;
  std::uint8_t acc_ = 0;
  int filled_ = 0;
};

// Low `category` bits of the JPEG magnitude encoding of v.
std::uint32_t magnitude_bits(int v, int category) {
  const int adjusted = v < 0 ? v + (1 << category) - 1 : v;
  return static_cast<std::uint32_t>(adjusted) & ((1u << category) - 1u);
}

struct EncoderTables {
  std::array<Code, 256> dc;
  std::array<Code, 256> ac;
};

void encode_block(BitWriter& w, const Block& b, int& pred, const EncoderTables& t) {
  const int diff = b[0] - pred;
  pred = b[0];
  const int dc_cat = magnitude_category(diff);
  w.put(t.dc[dc_cat]);
  if (dc_cat) w.put(magnitude_bits(diff, dc_cat), dc_cat);

  int run = 0;
  for (int k = 1; k < kBlockArea; ++k) {
    const int v = b[k];
    if (v == 0) {
      ++run;
      continue;
    }
    while (run > 15) {
      w.put(t.ac[0xF0]);
      run -= 16;
    }
    const int cat = magnitude_category(v);
    w.put(t.ac[(run << 4) | cat]);
    w.put(magnitude_bits(v, cat), cat);
    run = 0;
  }
  if (run > 0) w.put(t.ac[0x00]);
}

void write_dht(ByteSink& s, std::uint8_t class_id, const HuffmanSpec& spec) {
  s.marker(0xC4);
  s.word(static_cast<std::uint16_t>(2 + 1 + 16 + spec.symbols.size()));
  s.byte(class_id);
  for (auto c : spec.counts) s.byte(c);
  for (auto v : spec.symbols) s.byte(v);
}

int ceil_div(int a, int b) { return (a + b - 1) / b; }

void validate_for_encode(const CoefficientImage& img) {
  if (img.width <= 0 || img.height <= 0 || img.width > 0xFFFF || img.height > 0xFFFF)
    throw InputError("image dimensions out of range for JPEG");
  if (img.planes.empty() || img.planes.size() > 4) throw InputError("JPEG needs 1 to 4 components");
  if (img.qtables.empty() || img.qtables.size() > 4) throw InputError("JPEG needs 1 to 4 quantization tables");
  for (std::size_t i = 0; i < img.planes.size(); ++i) {
    const auto& p = img.planes[i];
    if (p.h_samp < 1 || p.h_samp > 4 || p.v_samp < 1 || p.v_samp > 4)
      throw InputError("sampling factor out of range");
    if (p.qtable < 0 || static_cast<std::size_t>(p.qtable) >= img.qtables.size())
      throw InputError("plane references a missing quantization table");
    if (p.blocks_w != ceil_div(img.plane_width(i), kBlockSide) ||
        p.blocks_h != ceil_div(img.plane_height(i), kBlockSide) ||
        p.blocks.size() != static_cast<std::size_t>(p.blocks_w) * p.blocks_h)
      throw GridMismatch("plane " + std::to_string(i) + " grid does not match image size");
    for (std::size_t b = 0; b < p.blocks.size(); ++b) {
      const auto& blk = p.blocks[b];
      if (blk[0] < kDcMin || blk[0] > kDcMax)
        throw DcOutOfRange("plane " + std::to_string(i) + " block " + std::to_string(b) +
                           ": DC " + std::to_string(blk[0]) + " outside [-1024, 1016]");
      for (int k = 1; k < kBlockArea; ++k)
        if (blk[k] < -kAcMaxMagnitude || blk[k] > kAcMaxMagnitude)
          throw InputError("AC coefficient magnitude exceeds 1023");
    }
  }
  for (const auto& q : img.qtables)
    for (auto e : q.entries)
      if (e < 1 || e > 255) throw InputError("quantizer entry outside 1..255");
}

}  // namespace

std::vector<std::uint8_t> encode_jpeg(const CoefficientImage& img) {
  validate_for_encode(img);
  const std::size_t n = img.planes.size();

  ByteSink s;
  s.marker(0xD8);

  // APP0 JFIF 1.01, no thumbnail, 1:1 aspect.
  s.marker(0xE0);
  s.word(16);
  for (char c : {'J', 'F', 'I', 'F', '\0'}) s.byte(static_cast<std::uint8_t>(c));
  s.byte(1);
  s.byte(1);
  s.byte(0);
  s.word(1);
  s.word(1);
  s.byte(0);
  s.byte(0);

  for (std::size_t t = 0; t < img.qtables.size(); ++t) {
    s.marker(0xDB);
    s.word(2 + 1 + 64);
    s.byte(static_cast<std::uint8_t>(t));
    for (auto e : img.qtables[t].entries) s.byte(static_cast<std::uint8_t>(e));
  }

  s.marker(0xC0);
  s.word(static_cast<std::uint16_t>(8 + 3 * n));
  s.byte(8);
  s.word(static_cast<std::uint16_t>(img.height));
  s.word(static_cast<std::uint16_t>(img.width));
  s.byte(static_cast<std::uint8_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& p = img.planes[i];
    s.byte(static_cast<std::uint8_t>(i + 1));
    s.byte(static_cast<std::uint8_t>((p.h_samp << 4) | p.v_samp));
    s.byte(static_cast<std::uint8_t>(p.qtable));
  }

  write_dht(s, 0x00, kDcLuminance);
  write_dht(s, 0x10, kAcLuminance);
  if (n > 1) {
    write_dht(s, 0x01, kDcChrominance);
    write_dht(s, 0x11, kAcChrominance);
  }

  s.marker(0xDA);
  s.word(static_cast<std::uint16_t>(6 + 2 * n));
  s.byte(static_cast<std::uint8_t>(n));
  for (std::size_t i = 0; i < n; ++i) {
    s.byte(static_cast<std::uint8_t>(i + 1));
    s.byte(i == 0 ? 0x00 : 0x11);
  }
  s.byte(0);
  s.byte(63);
  s.byte(0);

  const EncoderTables luma{build_encoder_table(kDcLuminance), build_encoder_table(kAcLuminance)};
  const EncoderTables chroma{build_encoder_table(kDcChrominance), build_encoder_table(kAcChrominance)};

  BitWriter w(s);
  std::vector<int> pred(n, 0);
  if (n == 1) {
    for (const auto& b : img.planes[0].blocks) encode_block(w, b, pred[0], luma);
  } else {
    const int mcus_x = ceil_div(img.width, kBlockSide * img.max_h());
    const int mcus_y = ceil_div(img.height, kBlockSide * img.max_v());
    Block dummy{};
    for (int my = 0; my < mcus_y; ++my)
      for (int mx = 0; mx < mcus_x; ++mx)
        for (std::size_t c = 0; c < n; ++c) {
          const auto& p = img.planes[c];
          const auto& tables = c == 0 ? luma : chroma;
          for (int v = 0; v < p.v_samp; ++v)
            for (int h = 0; h < p.h_samp; ++h) {
              const int bx = mx * p.h_samp + h;
              const int by = my * p.v_samp + v;
              if (bx < p.blocks_w && by < p.blocks_h) {
                encode_block(w, p.at(bx, by), pred[c], tables);
              } else {
                // MCU padding block: repeat the predictor, no AC energy.
                dummy[0] = pred[c];
                encode_block(w, dummy, pred[c], tables);
              }
            }
        }
  }
  w.flush();
  s.marker(0xD9);
  return std::move(s.bytes());
}

// ---------------------------------------------------------------- reading

namespace {

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::size_t pos() const { return pos_; }
  void seek(std::size_t p) { pos_ = p; }
  bool at_end() const { return pos_ >= bytes_.size(); }

  std::uint8_t byte() {
    if (pos_ >= bytes_.size()) fail("unexpected end of data");
    return bytes_[pos_++];
  }
  std::uint16_t word() {
    const std::uint16_t hi = byte();
    return static_cast<std::uint16_t>((hi << 8) | byte());
  }
  std::uint8_t peek(std::size_t ahead = 0) const {
    return pos_ + ahead < bytes_.size() ? bytes_[pos_ + ahead] : 0;
  }
  std::size_t size() const { return bytes_.size(); }

  [[noreturn]] void fail(const std::string& what) const { throw MalformedBitstream(what, pos_); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

class BitReader {
 public:
  explicit BitReader(Reader& r) : r_(r) {}

  int bit() {
    if (left_ == 0) fill();
    --left_;
    return (cur_ >> left_) & 1;
  }

  int bits(int n) {
    int v = 0;
    for (int i = 0; i < n; ++i) v = (v << 1) | bit();
    return v;
  }

  int decode(const DecoderTable& t) {
    int code = bit();
    for (int len = 1; len <= 16; ++len) {
      if (t.maxcode[len] >= 0 && code <= t.maxcode[len] && code >= t.mincode[len])
        return t.symbols[static_cast<std::size_t>(t.valptr[len] + code - t.mincode[len])];
      code = (code << 1) | bit();
    }
    r_.fail("invalid Huffman code");
  }

  // Consume the RSTn marker expected after a restart interval.
  void restart(int expected) {
    left_ = 0;
    if (!marker_) {
      while (!r_.at_end() && r_.peek() == 0xFF && r_.peek(1) == 0xFF) r_.byte();
      if (r_.peek() != 0xFF) r_.fail("missing restart marker");
    }
    marker_ = false;
    r_.byte();
    const int m = r_.byte();
    if (m != 0xD0 + (expected & 7)) r_.fail("unexpected restart marker");
  }

  Reader& reader() { return r_; }

 private:
  void fill() {
    if (marker_) {
      // Past a marker the decoder feeds zeros, as libjpeg does.
      cur_ = 0;
      left_ = 8;
      return;
    }
    const std::uint8_t b = r_.byte();
    if (b == 0xFF) {
      const std::uint8_t next = r_.peek();
      if (next == 0x00) {
        r_.byte();
      } else {
        // A marker ends the entropy-coded segment; leave it unread.
        r_.seek(r_.pos() - 1);
        marker_ = true;
        cur_ = 0;
        left_ = 8;
        return;
      }
    }
    cur_ = b;
    left_ = 8;
  }

  Reader& r_;
  int cur_ = 0;
  int left_ = 0;
  bool marker_ = false;
};

int extend(int v, int category) {
  return v < (1 << (category - 1)) ? v - (1 << category) + 1 : v;
}

struct FrameComponent {
  int id = 0;
  int h = 1;
  int v = 1;
  int tq = 0;
  int padded_w = 0;  // block grid including MCU padding
  int padded_h = 0;
  int blocks_w = 0;
  int blocks_h = 0;
  std::vector<Block> blocks;
};

struct DecoderState {
  std::array<std::optional<QuantTable>, 4> qtables;
  std::array<std::optional<DecoderTable>, 4> dc;
  std::array<std::optional<DecoderTable>, 4> ac;
  bool have_frame = false;
  int width = 0;
  int height = 0;
  int hmax = 1;
  int vmax = 1;
  int restart_interval = 0;
  std::vector<FrameComponent> comps;
};

void read_dqt(Reader& r, DecoderState& st) {
  const std::size_t start = r.pos();
  const std::size_t len = r.word();
  if (len < 2) r.fail("bad DQT length");
  const std::size_t end = start + len;
  while (r.pos() < end) {
    const int pq_tq = r.byte();
    const int precision = pq_tq >> 4;
    const int id = pq_tq & 15;
    if (id > 3 || precision > 1) r.fail("bad DQT table spec");
    QuantTable t;
    for (auto& e : t.entries) e = precision ? r.word() : r.byte();
    st.qtables[static_cast<std::size_t>(id)] = t;
  }
  if (r.pos() != end) r.fail("DQT length mismatch");
}

void read_dht(Reader& r, DecoderState& st) {
  const std::size_t start = r.pos();
  const std::size_t len = r.word();
  if (len < 2) r.fail("bad DHT length");
  const std::size_t end = start + len;
  while (r.pos() < end) {
    const int tc_th = r.byte();
    const int cls = tc_th >> 4;
    const int id = tc_th & 15;
    if (cls > 1 || id > 3) r.fail("bad DHT table spec");
    HuffmanSpec spec{};
    int total = 0;
    for (auto& c : spec.counts) {
      c = r.byte();
      total += c;
    }
    if (total > 256) r.fail("too many Huffman symbols");
    spec.symbols.resize(static_cast<std::size_t>(total));
    for (auto& s : spec.symbols) s = r.byte();
    (cls == 0 ? st.dc : st.ac)[static_cast<std::size_t>(id)] = build_decoder_table(spec);
  }
  if (r.pos() != end) r.fail("DHT length mismatch");
}

void read_sof(Reader& r, DecoderState& st) {
  if (st.have_frame) r.fail("multiple frames");
  const std::size_t len = r.word();
  if (r.byte() != 8) r.fail("only 8-bit precision is supported");
  st.height = r.word();
  st.width = r.word();
  if (st.width == 0 || st.height == 0) r.fail("zero image dimension");
  const int n = r.byte();
  if (n != 1 && n != 3 && n != 4) r.fail("unsupported component count");
  if (len != static_cast<std::size_t>(8 + 3 * n)) r.fail("SOF length mismatch");
  for (int i = 0; i < n; ++i) {
    FrameComponent c;
    c.id = r.byte();
    const int hv = r.byte();
    c.h = hv >> 4;
    c.v = hv & 15;
    c.tq = r.byte();
    if (c.h < 1 || c.h > 4 || c.v < 1 || c.v > 4 || c.tq > 3) r.fail("bad component spec");
    st.hmax = std::max(st.hmax, c.h);
    st.vmax = std::max(st.vmax, c.v);
    st.comps.push_back(c);
  }
  const int mcus_x = ceil_div(st.width, 8 * st.hmax);
  const int mcus_y = ceil_div(st.height, 8 * st.vmax);
  for (auto& c : st.comps) {
    c.blocks_w = ceil_div(ceil_div(st.width * c.h, st.hmax), 8);
    c.blocks_h = ceil_div(ceil_div(st.height * c.v, st.vmax), 8);
    c.padded_w = mcus_x * c.h;
    c.padded_h = mcus_y * c.v;
    c.blocks.assign(static_cast<std::size_t>(c.padded_w) * c.padded_h, Block{});
  }
  st.have_frame = true;
}

void decode_block(BitReader& br, Block& out, int& pred, const DecoderTable& dc,
                  const DecoderTable& ac) {
  out.fill(0);
  const int s = br.decode(dc);
  if (s > 11) br.reader().fail("DC category out of range");
  if (s) pred += extend(br.bits(s), s);
  out[0] = pred;
  for (int k = 1; k < kBlockArea;) {
    const int rs = br.decode(ac);
    const int run = rs >> 4;
    const int size = rs & 15;
    if (size == 0) {
      if (run != 15) break;
      k += 16;
      continue;
    }
    if (size > 10) br.reader().fail("AC category out of range");
    k += run;
    if (k >= kBlockArea) br.reader().fail("AC run past end of block");
    out[static_cast<std::size_t>(k)] = extend(br.bits(size), size);
    ++k;
  }
}

void read_scan(Reader& r, DecoderState& st) {
  if (!st.have_frame) r.fail("scan before frame header");
  const std::size_t len = r.word();
  const int n = r.byte();
  if (n < 1 || n > 4 || len != static_cast<std::size_t>(6 + 2 * n)) r.fail("bad SOS header");
  std::vector<std::size_t> members;
  std::vector<int> td;
  std::vector<int> ta;
  for (int i = 0; i < n; ++i) {
    const int id = r.byte();
    const int tables = r.byte();
    const auto it = std::find_if(st.comps.begin(), st.comps.end(),
                                 [&](const FrameComponent& c) { return c.id == id; });
    if (it == st.comps.end()) r.fail("scan references unknown component");
    members.push_back(static_cast<std::size_t>(it - st.comps.begin()));
    td.push_back(tables >> 4);
    ta.push_back(tables & 15);
    if (td.back() > 3 || ta.back() > 3 || !st.dc[static_cast<std::size_t>(td.back())] ||
        !st.ac[static_cast<std::size_t>(ta.back())])
      r.fail("scan references undefined Huffman table");
  }
  const int ss = r.byte();
  const int se = r.byte();
  const int ahal = r.byte();
  if (ss != 0 || se != 63 || ahal != 0) r.fail("not a sequential baseline scan");

  BitReader br(r);
  std::vector<int> pred(static_cast<std::size_t>(n), 0);
  int restarts = 0;
  std::size_t mcu = 0;
  auto maybe_restart = [&] {
    if (st.restart_interval > 0 && mcu > 0 && mcu % static_cast<std::size_t>(st.restart_interval) == 0) {
      br.restart(restarts++);
      std::fill(pred.begin(), pred.end(), 0);
    }
  };

  if (n == 1) {
    auto& c = st.comps[members[0]];
    const auto& dc = *st.dc[static_cast<std::size_t>(td[0])];
    const auto& ac = *st.ac[static_cast<std::size_t>(ta[0])];
    for (int by = 0; by < c.blocks_h; ++by)
      for (int bx = 0; bx < c.blocks_w; ++bx, ++mcu) {
        maybe_restart();
        decode_block(br, c.blocks[static_cast<std::size_t>(by) * c.padded_w + bx], pred[0], dc, ac);
      }
  } else {
    const int mcus_x = ceil_div(st.width, 8 * st.hmax);
    const int mcus_y = ceil_div(st.height, 8 * st.vmax);
    for (int my = 0; my < mcus_y; ++my)
      for (int mx = 0; mx < mcus_x; ++mx, ++mcu) {
        maybe_restart();
        for (std::size_t i = 0; i < members.size(); ++i) {
          auto& c = st.comps[members[i]];
          const auto& dc = *st.dc[static_cast<std::size_t>(td[i])];
          const auto& ac = *st.ac[static_cast<std::size_t>(ta[i])];
          for (int v = 0; v < c.v; ++v)
            for (int h = 0; h < c.h; ++h) {
              const int bx = mx * c.h + h;
              const int by = my * c.v + v;
              decode_block(br, c.blocks[static_cast<std::size_t>(by) * c.padded_w + bx], pred[i], dc, ac);
            }
        }
      }
  }
}

// Skip to the next marker after entropy-coded data (tolerates trailing garbage
// and stray restart markers).
void skip_to_marker(Reader& r) {
  while (!r.at_end()) {
    if (r.peek() == 0xFF) {
      const std::uint8_t m = r.peek(1);
      if (m == 0xFF) {
        r.byte();
        continue;
      }
      if (m != 0x00 && !(m >= 0xD0 && m <= 0xD7)) return;
      r.byte();
    }
    r.byte();
  }
}

}  // namespace

CoefficientImage decode_jpeg(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  if (r.byte() != 0xFF || r.byte() != 0xD8) throw MalformedBitstream("missing SOI marker", 0);
  DecoderState st;
  bool scanned = false;
  for (;;) {
    if (r.at_end()) r.fail("missing EOI marker");
    if (r.byte() != 0xFF) r.fail("expected a marker");
    std::uint8_t m = r.byte();
    while (m == 0xFF) m = r.byte();
    if (m == 0xD9) break;
    switch (m) {
      case 0xDB:
        read_dqt(r, st);
        break;
      case 0xC4:
        read_dht(r, st);
        break;
      case 0xC0:
      case 0xC1:
        read_sof(r, st);
        break;
      case 0xDD:
        if (r.word() != 4) r.fail("bad DRI length");
        st.restart_interval = r.word();
        break;
      case 0xDA:
        read_scan(r, st);
        scanned = true;
        skip_to_marker(r);
        break;
      default:
        if ((m >= 0xC2 && m <= 0xCF && m != 0xC4 && m != 0xC8 && m != 0xCC))
          r.fail("unsupported JPEG process (only baseline sequential Huffman)");
        if (m == 0xCC) r.fail("arithmetic coding is not supported");
        if (m >= 0xD0 && m <= 0xD8) r.fail("unexpected marker");
        {
          const std::size_t start = r.pos();
          const std::size_t len = r.word();
          if (len < 2 || start + len > r.size()) r.fail("bad segment length");
          r.seek(start + len);
        }
    }
  }
  if (!st.have_frame || !scanned) throw MalformedBitstream("no image data", r.pos());

  CoefficientImage img;
  img.width = st.width;
  img.height = st.height;
  std::vector<int> table_ids;
  for (std::size_t i = 0; i < st.comps.size(); ++i) {
    auto& c = st.comps[i];
    if (!st.qtables[static_cast<std::size_t>(c.tq)])
      throw MalformedBitstream("component uses undefined quantization table", r.pos());
    auto it = std::find(table_ids.begin(), table_ids.end(), c.tq);
    if (it == table_ids.end()) {
      table_ids.push_back(c.tq);
      img.qtables.push_back(*st.qtables[static_cast<std::size_t>(c.tq)]);
      it = table_ids.end() - 1;
    }
    CoefficientPlane p(static_cast<Component>(std::min<std::size_t>(i, 2)), c.blocks_w, c.blocks_h);
    p.h_samp = c.h;
    p.v_samp = c.v;
    p.qtable = static_cast<int>(it - table_ids.begin());
    for (int by = 0; by < c.blocks_h; ++by)
      for (int bx = 0; bx < c.blocks_w; ++bx)
        p.at(bx, by) = c.blocks[static_cast<std::size_t>(by) * c.padded_w + bx];
    img.planes.push_back(std::move(p));
  }
  return img;
}

}  // namespace osncrypt::jpeg
