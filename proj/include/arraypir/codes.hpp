#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "arraypir/common.hpp"
#include "arraypir/gf.hpp"

namespace arraypir::codes {

using gf::Sym;

// One code column's worth of symbols for a single stripe (alpha symbols).
using Block = std::vector<Sym>;
// K data blocks forming one sub-stripe.
using Stripe = std::vector<Block>;
// N blocks, one per code column.
using Codeword = std::vector<Block>;

namespace detail {

// Row-major square-matrix inverse by Gauss-Jordan elimination.
inline std::vector<Sym> invert_matrix(const gf::Field& f, std::vector<Sym> a, int n) {
  std::vector<Sym> inv(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i) inv[static_cast<std::size_t>(i) * n + i] = 1;
  for (int col = 0; col < n; ++col) {
    int pivot = -1;
    for (int r = col; r < n; ++r) {
      if (a[static_cast<std::size_t>(r) * n + col] != 0) {
        pivot = r;
        break;
      }
    }
    if (pivot < 0) throw std::domain_error("invert_matrix: singular matrix");
    if (pivot != col) {
      for (int j = 0; j < n; ++j) {
        std::swap(a[static_cast<std::size_t>(pivot) * n + j], a[static_cast<std::size_t>(col) * n + j]);
        std::swap(inv[static_cast<std::size_t>(pivot) * n + j], inv[static_cast<std::size_t>(col) * n + j]);
      }
    }
    const Sym scale = f.inv(a[static_cast<std::size_t>(col) * n + col]);
    for (int j = 0; j < n; ++j) {
      a[static_cast<std::size_t>(col) * n + j] = f.mul(a[static_cast<std::size_t>(col) * n + j], scale);
      inv[static_cast<std::size_t>(col) * n + j] = f.mul(inv[static_cast<std::size_t>(col) * n + j], scale);
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Sym factor = a[static_cast<std::size_t>(r) * n + col];
      if (factor == 0) continue;
      for (int j = 0; j < n; ++j) {
        a[static_cast<std::size_t>(r) * n + j] = f.add(
            a[static_cast<std::size_t>(r) * n + j],
            f.mul(factor, a[static_cast<std::size_t>(col) * n + j]));
        inv[static_cast<std::size_t>(r) * n + j] = f.add(
            inv[static_cast<std::size_t>(r) * n + j],
            f.mul(factor, inv[static_cast<std::size_t>(col) * n + j]));
      }
    }
  }
  return inv;
}

// row vector (len rows) times matrix (rows x cols), row-major.
inline std::vector<Sym> vec_mat(const gf::Field& f, const std::vector<Sym>& v,
                                const std::vector<Sym>& m, int rows, int cols) {
  std::vector<Sym> out(static_cast<std::size_t>(cols), 0);
  for (int r = 0; r < rows; ++r) {
    const Sym vr = v[static_cast<std::size_t>(r)];
    if (vr == 0) continue;
    for (int c = 0; c < cols; ++c) {
      const Sym prod = f.mul(vr, m[static_cast<std::size_t>(r) * cols + c]);
      out[static_cast<std::size_t>(c)] = f.add(out[static_cast<std::size_t>(c)], prod);
    }
  }
  return out;
}

inline bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

}  // namespace detail

// K x N block matrix of alpha x alpha blocks, stored element-wise as a
// (K*alpha) x (N*alpha) row-major matrix. Systematic in the first K block
// columns; enforced at construction.
class GeneratorMatrix {
 public:
  GeneratorMatrix(int k, int n, int alpha, std::vector<Sym> elems)
      : k_(k), n_(n), alpha_(alpha), elems_(std::move(elems)) {
    if (k < 1 || n <= k || alpha < 1)
      throw std::invalid_argument("GeneratorMatrix: need 0 < K < N and alpha >= 1");
    if (elems_.size() != static_cast<std::size_t>(k) * alpha * n * alpha)
      throw std::invalid_argument("GeneratorMatrix: element count mismatch");
    const int rows = k_ * alpha_;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < rows; ++c)
        if (at(r, c) != (r == c ? 1 : 0))
          throw std::invalid_argument("GeneratorMatrix: not systematic in the first K block columns");
  }

  int k() const { return k_; }
  int n() const { return n_; }
  int alpha() const { return alpha_; }
  int rows() const { return k_ * alpha_; }
  int cols() const { return n_ * alpha_; }

  Sym at(int row, int col) const {
    return elems_[static_cast<std::size_t>(row) * cols() + col];
  }

  // Element columns belonging to block column c, stacked into rows x alpha.
  void copy_block_column(int c, std::vector<Sym>& dst, int dst_cols, int dst_col0) const {
    for (int r = 0; r < rows(); ++r)
      for (int j = 0; j < alpha_; ++j)
        dst[static_cast<std::size_t>(r) * dst_cols + dst_col0 + j] = at(r, c * alpha_ + j);
  }

 private:
  int k_, n_, alpha_;
  std::vector<Sym> elems_;
};

enum class Family { kStackedRs, kEvenOdd };

struct RepairResult {
  Block block;
  long bandwidth_symbols = 0;
};

// An (N, K, alpha) MDS array code given by a systematic generator matrix.
// Two concrete constructions are provided: independent Reed-Solomon codewords
// stacked alpha rows deep, and the EVENODD binary array code.
class MdsArrayCode {
 public:
  static MdsArrayCode stacked_rs(int n, int k, int alpha, int width) {
    gf::Field field(width);
    if (field.order() <= static_cast<std::uint32_t>(n))
      throw std::invalid_argument("stacked_rs: field of order " + std::to_string(field.order()) +
                                  " is too small for N = " + std::to_string(n));
    if (k < 1 || n <= k || alpha < 1)
      throw std::invalid_argument("stacked_rs: need 0 < K < N and alpha >= 1");

    // Vandermonde on evaluation points 0..N-1, brought to systematic form.
    // Every K columns of the K-row Vandermonde are invertible, and row
    // operations preserve that, so the result is MDS.
    std::vector<Sym> vand(static_cast<std::size_t>(k) * n);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < n; ++c)
        vand[static_cast<std::size_t>(r) * n + c] = field.pow(static_cast<Sym>(c), static_cast<std::uint64_t>(r));
    std::vector<Sym> head(static_cast<std::size_t>(k) * k);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < k; ++c) head[static_cast<std::size_t>(r) * k + c] = vand[static_cast<std::size_t>(r) * n + c];
    const std::vector<Sym> head_inv = detail::invert_matrix(field, head, k);
    std::vector<Sym> scalar(static_cast<std::size_t>(k) * n, 0);
    for (int r = 0; r < k; ++r)
      for (int c = 0; c < n; ++c) {
        Sym acc = 0;
        for (int t = 0; t < k; ++t)
          acc = field.add(acc, field.mul(head_inv[static_cast<std::size_t>(r) * k + t],
                                         vand[static_cast<std::size_t>(t) * n + c]));
        scalar[static_cast<std::size_t>(r) * n + c] = acc;
      }

    // Each alpha x alpha block is the scalar entry times the identity.
    std::vector<Sym> elems(static_cast<std::size_t>(k) * alpha * n * alpha, 0);
    const int cols = n * alpha;
    for (int br = 0; br < k; ++br)
      for (int bc = 0; bc < n; ++bc) {
        const Sym g = scalar[static_cast<std::size_t>(br) * n + bc];
        for (int d = 0; d < alpha; ++d)
          elems[static_cast<std::size_t>(br * alpha + d) * cols + bc * alpha + d] = g;
      }
    return MdsArrayCode(Family::kStackedRs, std::move(field),
                        GeneratorMatrix(k, n, alpha, std::move(elems)), width, 0);
  }

  // EVENODD over GF(2): N = K + 2 columns, alpha = p - 1 rows, p an odd prime,
  // K <= p (columns beyond K of the full p-column array are shortened away).
  // Parity column K is the row parity; column K+1 holds the diagonal parity
  // with the common adjuster term S folded into every row.
  static MdsArrayCode evenodd(int k, int p) {
    if (!detail::is_prime(p) || p < 3)
      throw std::invalid_argument("evenodd: p must be an odd prime, got " + std::to_string(p));
    if (k < 1 || k > p)
      throw std::invalid_argument("evenodd: need 1 <= K <= p");
    gf::Field field(1);
    const int alpha = p - 1;
    const int n = k + 2;
    const int cols = n * alpha;
    std::vector<Sym> elems(static_cast<std::size_t>(k) * alpha * cols, 0);
    auto set = [&](int row, int col) { elems[static_cast<std::size_t>(row) * cols + col] ^= 1; };
    for (int j = 0; j < k; ++j) {
      for (int r = 0; r < alpha; ++r) {
        set(j * alpha + r, j * alpha + r);  // systematic
        set(j * alpha + r, k * alpha + r);  // row parity
      }
      for (int i = 0; i < alpha; ++i) {
        const int r = ((i - j) % p + p) % p;   // cell of column j on diagonal i
        if (r < alpha) set(j * alpha + r, (k + 1) * alpha + i);
        if (j >= 1) set(j * alpha + (p - 1 - j), (k + 1) * alpha + i);  // adjuster S
      }
    }
    return MdsArrayCode(Family::kEvenOdd, std::move(field),
                        GeneratorMatrix(k, n, alpha, std::move(elems)), 1, p);
  }

  Family family() const { return family_; }
  int n() const { return g_.n(); }
  int k() const { return g_.k(); }
  int alpha() const { return g_.alpha(); }
  const gf::Field& field() const { return field_; }
  const GeneratorMatrix& generator() const { return g_; }

  // Text form round-tripped by the CLI: family plus its defining parameters.
  std::string descriptor() const {
    std::ostringstream out;
    if (family_ == Family::kStackedRs)
      out << "stacked-rs,n=" << n() << ",k=" << k() << ",alpha=" << alpha() << ",w=" << width_;
    else
      out << "evenodd,k=" << k() << ",p=" << prime_;
    return out.str();
  }

  static MdsArrayCode from_descriptor(const std::string& text) {
    std::map<std::string, int> kv;
    std::string family;
    std::stringstream stream(text);
    std::string token;
    bool first = true;
    while (std::getline(stream, token, ',')) {
      if (first) {
        family = token;
        first = false;
        continue;
      }
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw DataError("code descriptor: bad token '" + token + "'");
      kv[token.substr(0, eq)] = std::stoi(token.substr(eq + 1));
    }
    try {
      if (family == "stacked-rs")
        return stacked_rs(kv.at("n"), kv.at("k"), kv.at("alpha"), kv.at("w"));
      if (family == "evenodd") return evenodd(kv.at("k"), kv.at("p"));
    } catch (const std::out_of_range&) {
      throw DataError("code descriptor: missing parameter in '" + text + "'");
    }
    throw DataError("code descriptor: unknown family '" + family + "'");
  }

  Codeword encode_stripe(const Stripe& stripe) const {
    const std::vector<Sym> flat = flatten_stripe(stripe);
    std::vector<Sym> enc(static_cast<std::size_t>(g_.cols()), 0);
    for (int r = 0; r < g_.rows(); ++r) {
      const Sym v = flat[static_cast<std::size_t>(r)];
      if (v == 0) continue;
      for (int c = 0; c < g_.cols(); ++c)
        enc[static_cast<std::size_t>(c)] = field_.add(enc[static_cast<std::size_t>(c)], field_.mul(v, g_.at(r, c)));
    }
    Codeword out(static_cast<std::size_t>(n()));
    for (int c = 0; c < n(); ++c)
      out[static_cast<std::size_t>(c)] = Block(enc.begin() + static_cast<std::ptrdiff_t>(c) * alpha(),
                                               enc.begin() + static_cast<std::ptrdiff_t>(c + 1) * alpha());
    return out;
  }

  // Recovers the unique stripe consistent with the supplied column blocks.
  // Uses the K lowest supplied column indices, then checks every remaining
  // supplied block against the reconstruction; a mismatch means corrupt input.
  Stripe erasure_decode(const std::vector<std::pair<int, Block>>& available) const {
    const std::map<int, Block> cols = collect_columns(available);
    if (static_cast<int>(cols.size()) < k())
      throw std::invalid_argument("erasure_decode: need at least K = " + std::to_string(k()) +
                                  " distinct columns, got " + std::to_string(cols.size()));
    std::vector<int> chosen;
    for (const auto& [c, _] : cols) {
      chosen.push_back(c);
      if (static_cast<int>(chosen.size()) == k()) break;
    }
    const int dim = g_.rows();
    std::vector<Sym> sub(static_cast<std::size_t>(dim) * dim);
    std::vector<Sym> rhs(static_cast<std::size_t>(dim));
    for (int idx = 0; idx < k(); ++idx) {
      g_.copy_block_column(chosen[static_cast<std::size_t>(idx)], sub, dim, idx * alpha());
      const Block& blk = cols.at(chosen[static_cast<std::size_t>(idx)]);
      std::copy(blk.begin(), blk.end(), rhs.begin() + static_cast<std::ptrdiff_t>(idx) * alpha());
    }
    const std::vector<Sym> inv = detail::invert_matrix(field_, std::move(sub), dim);
    const std::vector<Sym> flat = detail::vec_mat(field_, rhs, inv, dim, dim);
    Stripe stripe(static_cast<std::size_t>(k()));
    for (int l = 0; l < k(); ++l)
      stripe[static_cast<std::size_t>(l)] = Block(flat.begin() + static_cast<std::ptrdiff_t>(l) * alpha(),
                                                  flat.begin() + static_cast<std::ptrdiff_t>(l + 1) * alpha());
    const Codeword full = encode_stripe(stripe);
    for (const auto& [c, blk] : cols)
      if (full[static_cast<std::size_t>(c)] != blk)
        throw DataError("erasure_decode: supplied block for column " + std::to_string(c) +
                        " is inconsistent with the reconstruction");
    return stripe;
  }

  Codeword reencode_full(const std::vector<std::pair<int, Block>>& available) const {
    return encode_stripe(erasure_decode(available));
  }

  // Rebuilds one column by reading whole blocks from K helpers. The reader is
  // charged for every symbol it returns, so bandwidth reflects actual reads;
  // codes with cheaper repair can override the strategy behind this interface.
  RepairResult repair(int failed, std::vector<int> helpers,
                      const std::function<Block(int)>& read_column) const {
    if (failed < 0 || failed >= n()) throw std::invalid_argument("repair: failed column out of range");
    std::sort(helpers.begin(), helpers.end());
    helpers.erase(std::unique(helpers.begin(), helpers.end()), helpers.end());
    for (int h : helpers) {
      if (h < 0 || h >= n()) throw std::invalid_argument("repair: helper column out of range");
      if (h == failed) throw std::invalid_argument("repair: failed column cannot help itself");
    }
    if (static_cast<int>(helpers.size()) < k())
      throw std::invalid_argument("repair: need at least K = " + std::to_string(k()) + " helpers");
    RepairResult result;
    std::vector<std::pair<int, Block>> read;
    for (int idx = 0; idx < k(); ++idx) {
      Block blk = read_column(helpers[static_cast<std::size_t>(idx)]);
      if (static_cast<int>(blk.size()) != alpha()) throw DataError("repair: helper returned a short block");
      result.bandwidth_symbols += static_cast<long>(blk.size());
      read.emplace_back(helpers[static_cast<std::size_t>(idx)], std::move(blk));
    }
    result.block = reencode_full(read)[static_cast<std::size_t>(failed)];
    return result;
  }

  // True iff every K-subset of block columns is invertible. Exhaustive; meant
  // for small N.
  bool mds_exhaustive_check() const {
    std::vector<int> subset(static_cast<std::size_t>(k()));
    return mds_check_rec(subset, 0, 0);
  }

 private:
  MdsArrayCode(Family family, gf::Field field, GeneratorMatrix g, int width, int prime)
      : family_(family), field_(std::move(field)), g_(std::move(g)), width_(width), prime_(prime) {}

  std::vector<Sym> flatten_stripe(const Stripe& stripe) const {
    if (static_cast<int>(stripe.size()) != k())
      throw std::invalid_argument("encode_stripe: stripe must have exactly K blocks");
    std::vector<Sym> flat;
    flat.reserve(static_cast<std::size_t>(g_.rows()));
    for (const Block& b : stripe) {
      if (static_cast<int>(b.size()) != alpha())
        throw std::invalid_argument("encode_stripe: block length must be alpha");
      flat.insert(flat.end(), b.begin(), b.end());
    }
    return flat;
  }

  std::map<int, Block> collect_columns(const std::vector<std::pair<int, Block>>& available) const {
    std::map<int, Block> cols;
    for (const auto& [c, blk] : available) {
      if (c < 0 || c >= n()) throw std::invalid_argument("erasure_decode: column index out of range");
      if (static_cast<int>(blk.size()) != alpha())
        throw std::invalid_argument("erasure_decode: block length must be alpha");
      auto [it, inserted] = cols.emplace(c, blk);
      if (!inserted && it->second != blk)
        throw DataError("erasure_decode: conflicting blocks supplied for column " + std::to_string(c));
    }
    return cols;
  }

  bool mds_check_rec(std::vector<int>& subset, int depth, int next) const {
    if (depth == k()) {
      const int dim = g_.rows();
      std::vector<Sym> sub(static_cast<std::size_t>(dim) * dim);
      for (int idx = 0; idx < k(); ++idx)
        g_.copy_block_column(subset[static_cast<std::size_t>(idx)], sub, dim, idx * alpha());
      try {
        detail::invert_matrix(field_, std::move(sub), dim);
      } catch (const std::domain_error&) {
        return false;
      }
      return true;
    }
    for (int c = next; c <= n() - (k() - depth); ++c) {
      subset[static_cast<std::size_t>(depth)] = c;
      if (!mds_check_rec(subset, depth + 1, c + 1)) return false;
    }
    return true;
  }

  Family family_;
  gf::Field field_;
  GeneratorMatrix g_;
  int width_;  // stacked-rs only
  int prime_;  // evenodd only
};

}  // namespace arraypir::codes
