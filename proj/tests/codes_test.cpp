#include "arraypir/codes.hpp"

#include <gtest/gtest.h>

#include <functional>
#include <random>

#include "arraypir/common.hpp"

namespace {

using arraypir::DataError;
using arraypir::uniform_below;
using arraypir::codes::Block;
using arraypir::codes::Codeword;
using arraypir::codes::MdsArrayCode;
using arraypir::codes::Stripe;
using arraypir::gf::Sym;

Stripe random_stripe(const MdsArrayCode& code, std::mt19937_64& rng) {
  Stripe s(static_cast<std::size_t>(code.k()));
  for (auto& blk : s) {
    blk.resize(static_cast<std::size_t>(code.alpha()));
    for (auto& v : blk) v = static_cast<Sym>(uniform_below(rng, code.field().order()));
  }
  return s;
}

// Independent EVENODD oracle: the raw row/diagonal parity equations over the
// (p-1) x p data array (columns >= K zero, imaginary row p-1 zero).
struct EvenOddOracle {
  int k, p;

  Codeword encode(const Stripe& stripe) const {
    const int alpha = p - 1;
    auto cell = [&](int r, int j) -> int {
      if (r == p - 1 || j >= k) return 0;  // imaginary row / shortened column
      return stripe[static_cast<std::size_t>(j)][static_cast<std::size_t>(r)];
    };
    Codeword cw(static_cast<std::size_t>(k + 2), Block(static_cast<std::size_t>(alpha), 0));
    for (int j = 0; j < k; ++j) cw[static_cast<std::size_t>(j)] = stripe[static_cast<std::size_t>(j)];
    int adjuster = 0;
    for (int t = 1; t < p; ++t) adjuster ^= cell(p - 1 - t, t);
    for (int i = 0; i < alpha; ++i) {
      int row_parity = 0;
      int diag_parity = adjuster;
      for (int j = 0; j < p; ++j) {
        row_parity ^= cell(i, j);
        diag_parity ^= cell(((i - j) % p + p) % p, j);
      }
      cw[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)] = static_cast<Sym>(row_parity);
      cw[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(i)] = static_cast<Sym>(diag_parity);
    }
    return cw;
  }
};

// Determinant by Laplace expansion; independent of the Gaussian-elimination
// path inside the library. Small matrices only.
Sym det_laplace(const arraypir::gf::Field& f, const std::vector<Sym>& m, int n) {
  if (n == 1) return m[0];
  Sym acc = 0;
  for (int c = 0; c < n; ++c) {
    if (m[static_cast<std::size_t>(c)] == 0) continue;
    std::vector<Sym> minor;
    minor.reserve(static_cast<std::size_t>((n - 1) * (n - 1)));
    for (int r = 1; r < n; ++r)
      for (int cc = 0; cc < n; ++cc)
        if (cc != c) minor.push_back(m[static_cast<std::size_t>(r) * n + cc]);
    // characteristic 2: no sign alternation
    acc = f.add(acc, f.mul(m[static_cast<std::size_t>(c)], det_laplace(f, minor, n - 1)));
  }
  return acc;
}

void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& fn) {
  std::vector<int> subset(static_cast<std::size_t>(k));
  auto rec = [&](auto&& self, int depth, int next) -> void {
    if (depth == k) {
      fn(subset);
      return;
    }
    for (int c = next; c <= n - (k - depth); ++c) {
      subset[static_cast<std::size_t>(depth)] = c;
      self(self, depth + 1, c + 1);
    }
  };
  rec(rec, 0, 0);
}

TEST(EncodeStripe, ZeroAndBasis) {
  const auto code = MdsArrayCode::stacked_rs(5, 3, 1, 4);
  const Stripe zero(3, Block(1, 0));
  for (const Block& b : code.encode_stripe(zero)) EXPECT_EQ(b, Block(1, 0));

  Stripe e0(3, Block(1, 0));
  e0[0][0] = 1;
  const Codeword cw = code.encode_stripe(e0);
  for (int c = 0; c < 5; ++c) EXPECT_EQ(cw[static_cast<std::size_t>(c)][0], code.generator().at(0, c));
}

TEST(EncodeStripe, EvenOddMatchesParityOracle) {
  const auto code = MdsArrayCode::evenodd(3, 5);
  EXPECT_EQ(code.n(), 5);
  EXPECT_EQ(code.alpha(), 4);
  const EvenOddOracle oracle{3, 5};
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const Stripe s = random_stripe(code, rng);
    const Codeword got = code.encode_stripe(s);
    const Codeword want = oracle.encode(s);
    EXPECT_EQ(got, want);
    // row parity column is the XOR of the data columns
    for (int i = 0; i < code.alpha(); ++i) {
      Sym x = 0;
      for (int j = 0; j < code.k(); ++j)
        x = static_cast<Sym>(x ^ s[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)]);
      EXPECT_EQ(got[3][static_cast<std::size_t>(i)], x);
    }
  }
}

TEST(EncodeStripe, DimensionMismatchRejected) {
  const auto code = MdsArrayCode::stacked_rs(5, 3, 2, 4);
  EXPECT_THROW(code.encode_stripe(Stripe(2, Block(2, 0))), std::invalid_argument);
  EXPECT_THROW(code.encode_stripe(Stripe(3, Block(1, 0))), std::invalid_argument);
}

TEST(ErasureDecode, SystematicVerbatimAndExhaustive) {
  std::mt19937_64 rng(11);
  const auto code = MdsArrayCode::stacked_rs(5, 3, 2, 4);
  const Stripe s = random_stripe(code, rng);
  const Codeword cw = code.encode_stripe(s);

  std::vector<std::pair<int, Block>> all;
  for (int c = 0; c < 5; ++c) all.emplace_back(c, cw[static_cast<std::size_t>(c)]);
  EXPECT_EQ(code.erasure_decode(all), s);

  for_each_subset(5, 3, [&](const std::vector<int>& subset) {
    std::vector<std::pair<int, Block>> avail;
    for (int c : subset) avail.emplace_back(c, cw[static_cast<std::size_t>(c)]);
    EXPECT_EQ(code.erasure_decode(avail), s);
  });
}

TEST(ErasureDecode, ErrorsOnShortOrInconsistentInput) {
  std::mt19937_64 rng(13);
  const auto code = MdsArrayCode::stacked_rs(5, 3, 1, 4);
  const Stripe s = random_stripe(code, rng);
  const Codeword cw = code.encode_stripe(s);

  std::vector<std::pair<int, Block>> two = {{0, cw[0]}, {1, cw[1]}};
  EXPECT_THROW(code.erasure_decode(two), std::invalid_argument);

  std::vector<std::pair<int, Block>> corrupted;
  for (int c = 0; c < 4; ++c) corrupted.emplace_back(c, cw[static_cast<std::size_t>(c)]);
  corrupted[3].second[0] = static_cast<Sym>(corrupted[3].second[0] ^ 1);
  EXPECT_THROW(code.erasure_decode(corrupted), DataError);
}

TEST(ReencodeFull, CompletesCodewords) {
  std::mt19937_64 rng(17);
  const auto code = MdsArrayCode::stacked_rs(4, 2, 2, 4);
  const Stripe s = random_stripe(code, rng);
  const Codeword cw = code.encode_stripe(s);

  std::vector<std::pair<int, Block>> some = {{1, cw[1]}, {3, cw[3]}};
  EXPECT_EQ(code.reencode_full(some), cw);

  const Stripe zero(2, Block(2, 0));
  std::vector<std::pair<int, Block>> zeros = {{0, Block(2, 0)}, {2, Block(2, 0)}};
  EXPECT_EQ(code.reencode_full(zeros), code.encode_stripe(zero));

  std::vector<std::pair<int, Block>> all;
  for (int c = 0; c < 4; ++c) all.emplace_back(c, cw[static_cast<std::size_t>(c)]);
  EXPECT_EQ(code.reencode_full(all), cw);
}

TEST(Repair, DefaultStrategyBandwidthAndCorrectness) {
  std::mt19937_64 rng(19);
  for (int alpha : {1, 2, 4}) {
    const auto code = MdsArrayCode::stacked_rs(5, 3, alpha, 4);
    const Stripe s = random_stripe(code, rng);
    const Codeword cw = code.encode_stripe(s);
    auto reader = [&](int col) { return cw[static_cast<std::size_t>(col)]; };
    for (int failed = 0; failed < 5; ++failed) {
      std::vector<int> helpers;
      for (int c = 0; c < 5; ++c)
        if (c != failed) helpers.push_back(c);
      const auto result = code.repair(failed, helpers, reader);
      EXPECT_EQ(result.block, cw[static_cast<std::size_t>(failed)]);
      EXPECT_EQ(result.bandwidth_symbols, 3 * alpha);
    }
  }
}

TEST(Repair, RejectsBadHelperSets) {
  const auto code = MdsArrayCode::stacked_rs(5, 3, 1, 4);
  auto reader = [&](int) { return Block(1, 0); };
  EXPECT_THROW(code.repair(0, {0, 1, 2}, reader), std::invalid_argument);  // failed among helpers
  EXPECT_THROW(code.repair(0, {1, 2}, reader), std::invalid_argument);     // too few
  EXPECT_THROW(code.repair(7, {1, 2, 3}, reader), std::invalid_argument);  // out of range
}

TEST(StackedRs, VandermondeSubsetsInvertibleByDeterminantOracle) {
  const auto code = MdsArrayCode::stacked_rs(5, 3, 1, 4);
  const auto& g = code.generator();
  int checked = 0;
  for_each_subset(5, 3, [&](const std::vector<int>& subset) {
    std::vector<Sym> sub(9);
    for (int r = 0; r < 3; ++r)
      for (int idx = 0; idx < 3; ++idx)
        sub[static_cast<std::size_t>(r) * 3 + idx] = g.at(r, subset[static_cast<std::size_t>(idx)]);
    EXPECT_NE(det_laplace(code.field(), sub, 3), 0);
    ++checked;
  });
  EXPECT_EQ(checked, 10);
}

TEST(StackedRs, ArrayMdsPropertyAndFieldBound) {
  const auto code = MdsArrayCode::stacked_rs(4, 2, 2, 4);
  EXPECT_TRUE(code.mds_exhaustive_check());
  EXPECT_THROW(MdsArrayCode::stacked_rs(5, 3, 1, 1), std::invalid_argument);  // GF(2) too small
  EXPECT_THROW(MdsArrayCode::stacked_rs(5, 3, 1, 2), std::invalid_argument);  // GF(4) too small
}

TEST(EvenOdd, ParametersAndErrors) {
  const auto code53 = MdsArrayCode::evenodd(3, 5);
  EXPECT_EQ(code53.n(), 5);
  EXPECT_EQ(code53.k(), 3);
  EXPECT_EQ(code53.alpha(), 4);
  EXPECT_EQ(code53.field().width(), 1);

  const auto code42 = MdsArrayCode::evenodd(2, 3);
  EXPECT_EQ(code42.n(), 4);
  EXPECT_EQ(code42.alpha(), 2);

  EXPECT_THROW(MdsArrayCode::evenodd(4, 4), std::invalid_argument);  // p not prime
  EXPECT_THROW(MdsArrayCode::evenodd(4, 3), std::invalid_argument);  // K > p
  EXPECT_THROW(MdsArrayCode::evenodd(2, 2), std::invalid_argument);  // p = 2 degenerate
}

TEST(EvenOdd, BoundaryShapes) {
  // unshortened column count (K = p) and the single-column edge
  const auto full = MdsArrayCode::evenodd(5, 5);
  EXPECT_EQ(full.n(), 7);
  EXPECT_EQ(full.alpha(), 4);
  EXPECT_TRUE(full.mds_exhaustive_check());

  const auto tiny = MdsArrayCode::evenodd(1, 3);
  EXPECT_EQ(tiny.n(), 3);
  std::mt19937_64 rng(41);
  const Stripe s = random_stripe(tiny, rng);
  const Codeword cw = tiny.encode_stripe(s);
  for (int c = 0; c < 3; ++c) {
    std::vector<std::pair<int, Block>> one = {{c, cw[static_cast<std::size_t>(c)]}};
    EXPECT_EQ(tiny.erasure_decode(one), s);
  }
}

TEST(EvenOdd, AllSubsetsDecodeRandomStripes) {
  std::mt19937_64 rng(23);
  for (const auto& [k, p] : std::vector<std::pair<int, int>>{{3, 5}, {2, 3}}) {
    const auto code = MdsArrayCode::evenodd(k, p);
    for (int trial = 0; trial < 20; ++trial) {
      const Stripe s = random_stripe(code, rng);
      const Codeword cw = code.encode_stripe(s);
      for_each_subset(code.n(), code.k(), [&](const std::vector<int>& subset) {
        std::vector<std::pair<int, Block>> avail;
        for (int c : subset) avail.emplace_back(c, cw[static_cast<std::size_t>(c)]);
        EXPECT_EQ(code.erasure_decode(avail), s);
      });
    }
  }
}

TEST(Properties, LinearityAndSystematicProjection) {
  std::mt19937_64 rng(29);
  const auto code = MdsArrayCode::stacked_rs(6, 4, 2, 8);
  const auto& f = code.field();
  for (int trial = 0; trial < 25; ++trial) {
    const Stripe s1 = random_stripe(code, rng);
    const Stripe s2 = random_stripe(code, rng);
    const Sym scale = static_cast<Sym>(uniform_below(rng, f.order()));
    Stripe combo(static_cast<std::size_t>(code.k()), Block(static_cast<std::size_t>(code.alpha())));
    for (int l = 0; l < code.k(); ++l)
      for (int t = 0; t < code.alpha(); ++t)
        combo[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)] =
            f.add(f.mul(scale, s1[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]),
                  s2[static_cast<std::size_t>(l)][static_cast<std::size_t>(t)]);
    const Codeword c1 = code.encode_stripe(s1);
    const Codeword c2 = code.encode_stripe(s2);
    const Codeword cc = code.encode_stripe(combo);
    for (int c = 0; c < code.n(); ++c)
      for (int t = 0; t < code.alpha(); ++t)
        EXPECT_EQ(cc[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)],
                  f.add(f.mul(scale, c1[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)]),
                        c2[static_cast<std::size_t>(c)][static_cast<std::size_t>(t)]));
    // systematic projection
    for (int l = 0; l < code.k(); ++l)
      EXPECT_EQ(c1[static_cast<std::size_t>(l)], s1[static_cast<std::size_t>(l)]);
  }
}

TEST(Descriptor, RoundTrips) {
  const auto rs = MdsArrayCode::stacked_rs(6, 4, 2, 8);
  const auto rs2 = MdsArrayCode::from_descriptor(rs.descriptor());
  EXPECT_EQ(rs2.descriptor(), rs.descriptor());
  EXPECT_EQ(rs2.n(), 6);
  EXPECT_EQ(rs2.generator().at(1, 9), rs.generator().at(1, 9));

  const auto eo = MdsArrayCode::evenodd(3, 5);
  const auto eo2 = MdsArrayCode::from_descriptor(eo.descriptor());
  EXPECT_EQ(eo2.descriptor(), "evenodd,k=3,p=5");

  EXPECT_THROW(MdsArrayCode::from_descriptor("nonsense,n=1"), DataError);
  EXPECT_THROW(MdsArrayCode::from_descriptor("stacked-rs,n=5,k=3"), DataError);
}

}  // namespace
