#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "arraypir/common.hpp"

namespace arraypir::gf {

// Field elements are stored by value; GF(2^w) with w <= 16 fits in 16 bits.
using Sym = std::uint16_t;

inline constexpr int kMaxWidth = 16;

// Conventional primitive polynomial for each width, bit i = coefficient of x^i.
inline constexpr std::array<std::uint32_t, kMaxWidth + 1> kCanonicalPoly = {
    0x0,      // unused
    0x3,      // x + 1
    0x7,      // x^2 + x + 1
    0xB,      // x^3 + x + 1
    0x13,     // x^4 + x + 1
    0x25,     // x^5 + x^2 + 1
    0x43,     // x^6 + x + 1
    0x89,     // x^7 + x^3 + 1
    0x11D,    // x^8 + x^4 + x^3 + x^2 + 1
    0x211,    // x^9 + x^4 + 1
    0x409,    // x^10 + x^3 + 1
    0x805,    // x^11 + x^2 + 1
    0x1053,   // x^12 + x^6 + x^4 + x + 1
    0x201B,   // x^13 + x^4 + x^3 + x + 1
    0x4443,   // x^14 + x^10 + x^6 + x + 1
    0x8003,   // x^15 + x + 1
    0x1100B,  // x^16 + x^12 + x^3 + x + 1
};

inline int poly_degree(std::uint64_t p) {
  int d = -1;
  while (p) {
    ++d;
    p >>= 1;
  }
  return d;
}

// Remainder of a mod b for polynomials over GF(2).
inline std::uint64_t poly_mod(std::uint64_t a, std::uint64_t b) {
  if (b == 0) throw std::invalid_argument("poly_mod: division by zero polynomial");
  const int db = poly_degree(b);
  int da = poly_degree(a);
  while (da >= db) {
    a ^= b << (da - db);
    da = poly_degree(a);
  }
  return a;
}

// Trial division by every polynomial of degree 1..w/2.
inline bool is_irreducible(std::uint32_t poly, int w) {
  if (poly_degree(poly) != w) return false;
  if (w == 1) return true;
  for (int d = 1; 2 * d <= w; ++d) {
    for (std::uint64_t div = std::uint64_t{1} << d; div < (std::uint64_t{2} << d); ++div) {
      if (poly_mod(poly, div) == 0) return false;
    }
  }
  return true;
}

// Arithmetic in GF(2^w). Operations validate that operands lie inside the
// field, which is what catches symbols that belong to a different field.
class Field {
 public:
  explicit Field(int width) : Field(width, canonical_polynomial(width)) {}

  Field(int width, std::uint32_t poly) : width_(width), poly_(poly) {
    if (width < 1 || width > kMaxWidth)
      throw std::invalid_argument("Field: width must be in [1, 16]");
    order_ = std::uint32_t{1} << width;
    if (!is_irreducible(poly, width))
      throw std::invalid_argument("Field: reduction polynomial is not irreducible of degree " +
                                  std::to_string(width));
  }

  int width() const { return width_; }
  std::uint32_t order() const { return order_; }
  std::uint32_t polynomial() const { return poly_; }

  Sym add(Sym a, Sym b) const {
    check(a);
    check(b);
    return static_cast<Sym>(a ^ b);
  }

  // Subtraction coincides with addition in characteristic 2.
  Sym sub(Sym a, Sym b) const { return add(a, b); }

  Sym mul(Sym a, Sym b) const {
    check(a);
    check(b);
    std::uint32_t acc = 0;
    std::uint32_t x = a;
    std::uint32_t y = b;
    while (y) {
      if (y & 1) acc ^= x;
      y >>= 1;
      x <<= 1;
      if (x & order_) x ^= poly_;
    }
    return static_cast<Sym>(acc);
  }

  Sym pow(Sym a, std::uint64_t e) const {
    check(a);
    Sym result = 1;
    Sym base = a;
    while (e) {
      if (e & 1) result = mul(result, base);
      base = mul(base, base);
      e >>= 1;
    }
    return result;
  }

  Sym inv(Sym a) const {
    check(a);
    if (a == 0) throw std::domain_error("Field::inv: zero has no inverse");
    return pow(a, order_ - 2);
  }

  Sym div(Sym a, Sym b) const { return mul(a, inv(b)); }

  bool operator==(const Field& other) const = default;

 private:
  static std::uint32_t canonical_polynomial(int width) {
    if (width < 1 || width > kMaxWidth)
      throw std::invalid_argument("Field: width must be in [1, 16]");
    return kCanonicalPoly[static_cast<std::size_t>(width)];
  }

  void check(Sym a) const {
    if (a >= order_)
      throw std::invalid_argument("Field: symbol " + std::to_string(a) + " is not in GF(2^" +
                                  std::to_string(width_) + ") (field mismatch)");
  }

  int width_;
  std::uint32_t poly_;
  std::uint32_t order_;
};

}  // namespace arraypir::gf
