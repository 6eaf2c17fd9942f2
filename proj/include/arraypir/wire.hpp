#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "arraypir/common.hpp"
#include "arraypir/pir.hpp"

namespace arraypir::wire {

inline constexpr std::uint8_t kFormatVersion = 1;

// MSB-first bit packing; symbols travel as width-bit big-endian groups.
class BitWriter {
 public:
  void put(std::uint32_t value, int bits) {
    for (int i = bits - 1; i >= 0; --i) put_bit((value >> i) & 1);
  }
  void put_bit(std::uint32_t bit) {
    if (fill_ == 0) buf_.push_back(0);
    buf_.back() = static_cast<std::uint8_t>(buf_.back() | ((bit & 1) << (7 - fill_)));
    fill_ = (fill_ + 1) % 8;
  }
  std::size_t bit_count() const { return buf_.size() * 8 - (fill_ == 0 ? 0 : 8 - fill_); }
  std::vector<std::uint8_t> take() { return std::move(buf_); }

 private:
  std::vector<std::uint8_t> buf_;
  int fill_ = 0;
};

class BitReader {
 public:
  explicit BitReader(std::span<const std::uint8_t> data) : data_(data) {}
  std::uint32_t get(int bits) {
    std::uint32_t v = 0;
    for (int i = 0; i < bits; ++i) v = (v << 1) | get_bit();
    return v;
  }
  std::uint32_t get_bit() {
    if (pos_ >= data_.size() * 8) throw DataError("wire: truncated message");
    const std::uint8_t byte = data_[pos_ / 8];
    const std::uint32_t bit = (byte >> (7 - pos_ % 8)) & 1;
    ++pos_;
    return bit;
  }
  std::size_t bits_left() const { return data_.size() * 8 - pos_; }

 private:
  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

// ---- symbol <-> byte framing ------------------------------------------------

// Chunks a byte stream into width-bit symbols, MSB-first, zero-padding up to
// `count` symbols. A symbol straddling the end of the input takes its high
// bits from the input and zero low bits. Throws if the stream holds more
// bits than count symbols can carry.
inline std::vector<gf::Sym> symbols_from_bytes(std::span<const std::uint8_t> bytes, int width,
                                               std::size_t count) {
  const std::size_t capacity_bits = count * static_cast<std::size_t>(width);
  if (bytes.size() * 8 > capacity_bits)
    throw DataError("symbols_from_bytes: input of " + std::to_string(bytes.size()) +
                    " bytes exceeds the " + std::to_string(capacity_bits) + "-bit capacity");
  std::vector<gf::Sym> out(count, 0);
  BitReader reader(bytes);
  std::size_t available_bits = bytes.size() * 8;
  for (std::size_t t = 0; t < count && available_bits > 0; ++t) {
    const int take = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(width), available_bits));
    std::uint32_t v = reader.get(take);
    v <<= (width - take);  // final partial symbol is left-aligned
    out[t] = static_cast<gf::Sym>(v);
    available_bits -= static_cast<std::size_t>(take);
  }
  return out;
}

inline std::vector<std::uint8_t> bytes_from_symbols(std::span<const gf::Sym> symbols, int width) {
  BitWriter writer;
  for (gf::Sym s : symbols) writer.put(s, width);
  return writer.take();
}

// Inverse of bytes_from_symbols: expects exactly ceil(count*width/8) bytes
// with zero padding bits in the final byte.
inline std::vector<gf::Sym> unpack_symbols(std::span<const std::uint8_t> bytes, int width,
                                           std::size_t count) {
  const std::size_t expected = (count * static_cast<std::size_t>(width) + 7) / 8;
  if (bytes.size() != expected)
    throw DataError("unpack_symbols: expected " + std::to_string(expected) + " bytes, got " +
                    std::to_string(bytes.size()));
  BitReader reader(bytes);
  std::vector<gf::Sym> out(count);
  for (std::size_t t = 0; t < count; ++t) out[t] = static_cast<gf::Sym>(reader.get(width));
  while (reader.bits_left() > 0)
    if (reader.get_bit() != 0) throw DataError("unpack_symbols: nonzero padding bits");
  return out;
}

// ---- query serialization -----------------------------------------------------
//
// [version:1][rows:u16be][cols:u16be][entries row-major, u16be each]

inline std::vector<std::uint8_t> serialize_query(const pir::QueryMatrix& q) {
  std::vector<std::uint8_t> out;
  out.reserve(5 + q.e.size() * 2);
  out.push_back(kFormatVersion);
  auto put16 = [&](std::uint16_t v) {
    out.push_back(static_cast<std::uint8_t>(v >> 8));
    out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  };
  put16(static_cast<std::uint16_t>(q.rows));
  put16(static_cast<std::uint16_t>(q.cols));
  for (std::uint16_t v : q.e) put16(v);
  return out;
}

inline pir::QueryMatrix parse_query(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 5) throw DataError("parse_query: truncated");
  if (bytes[0] != kFormatVersion)
    throw DataError("parse_query: unsupported format version " + std::to_string(bytes[0]));
  auto get16 = [&](std::size_t off) {
    return static_cast<std::uint16_t>((bytes[off] << 8) | bytes[off + 1]);
  };
  const int rows = get16(1);
  const int cols = get16(3);
  if (rows < 1 || cols < 1) throw DataError("parse_query: empty matrix");
  if (bytes.size() != 5 + static_cast<std::size_t>(rows) * cols * 2)
    throw DataError("parse_query: length mismatch");
  pir::QueryMatrix q(rows, cols);
  for (std::size_t t = 0; t < q.e.size(); ++t) q.e[t] = get16(5 + t * 2);
  return q;
}

inline std::vector<std::uint8_t> serialize_server_query(const pir::ServerQuery& sq) {
  return serialize_query(sq.q);
}

// ---- response serialization ---------------------------------------------------
//
// [version:1][presence bitmap: ceil(S/8) bytes, MSB-first]
// [present blocks in column order, alpha symbols each, width bits big-endian]
// zero-padded to a whole byte.

inline std::vector<std::uint8_t> serialize_response(const pir::Response& r, int width) {
  BitWriter writer;
  writer.put(kFormatVersion, 8);
  for (bool b : r.present) writer.put_bit(b ? 1 : 0);
  while (writer.bit_count() % 8 != 0) writer.put_bit(0);
  for (const codes::Block& blk : r.blocks)
    for (gf::Sym s : blk) writer.put(s, width);
  while (writer.bit_count() % 8 != 0) writer.put_bit(0);
  return writer.take();
}

inline pir::Response parse_response(std::span<const std::uint8_t> bytes, const pir::SystemParams& p) {
  BitReader reader(bytes);
  const std::uint32_t version = reader.get(8);
  if (version != kFormatVersion)
    throw DataError("parse_response: unsupported format version " + std::to_string(version));
  pir::Response r;
  r.alpha = p.alpha;
  r.present.resize(static_cast<std::size_t>(p.query_cols));
  for (int j = 0; j < p.query_cols; ++j) r.present[static_cast<std::size_t>(j)] = reader.get_bit() != 0;
  for (int pad = p.query_cols; pad % 8 != 0; ++pad) {
    if (reader.get_bit() != 0) throw DataError("parse_response: nonzero bitmap padding");
  }
  const int width = p.code->field().width();
  for (int j = 0; j < p.query_cols; ++j) {
    if (!r.present[static_cast<std::size_t>(j)]) continue;
    codes::Block blk(static_cast<std::size_t>(p.alpha));
    for (int t = 0; t < p.alpha; ++t) blk[static_cast<std::size_t>(t)] = static_cast<gf::Sym>(reader.get(width));
    r.blocks.push_back(std::move(blk));
  }
  while (reader.bits_left() > 0) {
    if (reader.get_bit() != 0) throw DataError("parse_response: nonzero trailing padding");
  }
  return r;
}

}  // namespace arraypir::wire
