#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "arraypir/codes.hpp"
#include "arraypir/common.hpp"
#include "arraypir/gf.hpp"

namespace arraypir::pir {

using codes::Block;
using codes::MdsArrayCode;
using gf::Sym;

// Derived system parameters for one (N, K, alpha, M) deployment.
//
// Each file is split into sub_stripes rows of K blocks; queries have
// query_cols columns indexing into [0, sub_stripes + query_cols), where the
// top query_cols row indices address all-zero padding rows that are never
// stored.
struct SystemParams {
  int n = 0;
  int k = 0;
  int alpha = 0;
  int m = 0;
  int sub_stripes = 0;            // rows per file
  int query_cols = 0;             // columns per query
  long file_symbols = 0;          // alpha * sub_stripes * k
  std::shared_ptr<const MdsArrayCode> code;

  int index_domain() const { return sub_stripes + query_cols; }
  bool is_padding_row(int row) const { return row >= sub_stripes; }
};

inline SystemParams derive_params(int n, int k, int alpha, int m,
                                  std::shared_ptr<const MdsArrayCode> code) {
  if (k < 1 || n <= k) throw std::invalid_argument("derive_params: need N > K >= 1");
  if (alpha < 1) throw std::invalid_argument("derive_params: need alpha >= 1");
  if (m < 1) throw std::invalid_argument("derive_params: need M >= 1");
  if (!code) throw std::invalid_argument("derive_params: missing code");
  if (code->n() != n || code->k() != k || code->alpha() != alpha)
    throw std::invalid_argument("derive_params: code does not match (N, K, alpha)");
  SystemParams p;
  p.n = n;
  p.k = k;
  p.alpha = alpha;
  p.m = m;
  const int g = std::gcd(n, k);
  p.sub_stripes = (n - k) / g;
  p.query_cols = k / g;
  p.file_symbols = static_cast<long>(alpha) * p.sub_stripes * k;
  p.code = std::move(code);
  return p;
}

// One file, as a sub_stripes x K grid of alpha-symbol blocks.
struct FileMatrix {
  int rows = 0;
  int k = 0;
  int alpha = 0;
  std::vector<Sym> sym;  // rows * k * alpha, row-major by (row, column)

  FileMatrix() = default;
  FileMatrix(int rows_, int k_, int alpha_)
      : rows(rows_), k(k_), alpha(alpha_),
        sym(static_cast<std::size_t>(rows_) * k_ * alpha_, 0) {}

  std::span<const Sym> block(int row, int col) const {
    return {sym.data() + (static_cast<std::size_t>(row) * k + col) * alpha,
            static_cast<std::size_t>(alpha)};
  }
  std::span<Sym> block(int row, int col) {
    return {sym.data() + (static_cast<std::size_t>(row) * k + col) * alpha,
            static_cast<std::size_t>(alpha)};
  }

  bool operator==(const FileMatrix&) const = default;
};

// Everything one server stores: for each file, its column block of every
// stored row. Padding rows are materialized as zero on read, never stored.
struct ServerShard {
  int server = 0;
  int m = 0;
  int rows = 0;  // stored rows per file
  int alpha = 0;
  std::vector<Sym> sym;  // m * rows * alpha

  std::span<const Sym> stored_block(int file, int row) const {
    return {sym.data() + (static_cast<std::size_t>(file) * rows + row) * alpha,
            static_cast<std::size_t>(alpha)};
  }

  // Zero for padding rows.
  Block block(int file, int row) const {
    if (row >= rows) return Block(static_cast<std::size_t>(alpha), 0);
    const auto s = stored_block(file, row);
    return Block(s.begin(), s.end());
  }

  bool operator==(const ServerShard&) const = default;
};

struct EncodedStore {
  std::vector<ServerShard> shards;
};

struct QueryMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint16_t> e;

  QueryMatrix() = default;
  QueryMatrix(int rows_, int cols_)
      : rows(rows_), cols(cols_), e(static_cast<std::size_t>(rows_) * cols_, 0) {}

  std::uint16_t at(int i, int j) const { return e[static_cast<std::size_t>(i) * cols + j]; }
  std::uint16_t& at(int i, int j) { return e[static_cast<std::size_t>(i) * cols + j]; }

  // Membership in the query space: entries in range, rows duplicate-free.
  bool well_formed(const SystemParams& p) const {
    if (rows != p.m || cols != p.query_cols) return false;
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j) {
        if (at(i, j) >= p.index_domain()) return false;
        for (int l = j + 1; l < cols; ++l)
          if (at(i, j) == at(i, l)) return false;
      }
    return true;
  }

  bool operator==(const QueryMatrix&) const = default;
};

struct ServerQuery {
  QueryMatrix q;
  int server = 0;

  std::uint16_t at(int i, int j) const { return q.at(i, j); }
};

// Response to one server query: a presence bit per query column, plus one
// block per present column. Columns whose every row index lands in the
// padding zone would be all-zero and are pruned from the wire.
struct Response {
  int alpha = 0;
  std::vector<bool> present;
  std::vector<Block> blocks;  // in column order, present columns only

  int present_count() const {
    return static_cast<int>(std::count(present.begin(), present.end(), true));
  }
  long symbol_count() const { return static_cast<long>(alpha) * present_count(); }

  // Block for column j; zero if pruned.
  Block block_or_zero(int j) const {
    if (!present[static_cast<std::size_t>(j)]) return Block(static_cast<std::size_t>(alpha), 0);
    int idx = 0;
    for (int t = 0; t < j; ++t)
      if (present[static_cast<std::size_t>(t)]) ++idx;
    return blocks[static_cast<std::size_t>(idx)];
  }

  bool operator==(const Response&) const = default;
};

inline std::vector<FileMatrix> random_files(const SystemParams& p, std::mt19937_64& rng) {
  std::vector<FileMatrix> files;
  files.reserve(static_cast<std::size_t>(p.m));
  const std::uint32_t order = p.code->field().order();
  for (int i = 0; i < p.m; ++i) {
    FileMatrix f(p.sub_stripes, p.k, p.alpha);
    for (Sym& s : f.sym) s = static_cast<Sym>(uniform_below(rng, order));
    files.push_back(std::move(f));
  }
  return files;
}

// Encodes every row of every file and scatters the codeword columns to shards.
inline EncodedStore encode_system(const std::vector<FileMatrix>& files, const SystemParams& p) {
  if (static_cast<int>(files.size()) != p.m)
    throw std::invalid_argument("encode_system: expected M files");
  EncodedStore store;
  store.shards.resize(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) {
    ServerShard& sh = store.shards[static_cast<std::size_t>(i)];
    sh.server = i;
    sh.m = p.m;
    sh.rows = p.sub_stripes;
    sh.alpha = p.alpha;
    sh.sym.assign(static_cast<std::size_t>(p.m) * p.sub_stripes * p.alpha, 0);
  }
  for (int f = 0; f < p.m; ++f) {
    const FileMatrix& file = files[static_cast<std::size_t>(f)];
    if (file.rows != p.sub_stripes || file.k != p.k || file.alpha != p.alpha)
      throw std::invalid_argument("encode_system: file dimensions do not match params");
    for (int row = 0; row < p.sub_stripes; ++row) {
      codes::Stripe stripe(static_cast<std::size_t>(p.k));
      for (int col = 0; col < p.k; ++col) {
        const auto b = file.block(row, col);
        stripe[static_cast<std::size_t>(col)] = Block(b.begin(), b.end());
      }
      const codes::Codeword cw = p.code->encode_stripe(stripe);
      for (int i = 0; i < p.n; ++i) {
        ServerShard& sh = store.shards[static_cast<std::size_t>(i)];
        const Block& blk = cw[static_cast<std::size_t>(i)];
        std::copy(blk.begin(), blk.end(),
                  sh.sym.begin() + (static_cast<std::ptrdiff_t>(f) * p.sub_stripes + row) * p.alpha);
      }
    }
  }
  return store;
}

// Uniform over the query space: each row is an ordered selection of
// query_cols distinct values from the index domain (partial Fisher-Yates).
inline QueryMatrix sample_query_matrix(const SystemParams& p, std::mt19937_64& rng) {
  QueryMatrix q(p.m, p.query_cols);
  std::vector<std::uint16_t> pool(static_cast<std::size_t>(p.index_domain()));
  for (int i = 0; i < p.m; ++i) {
    std::iota(pool.begin(), pool.end(), static_cast<std::uint16_t>(0));
    for (int j = 0; j < p.query_cols; ++j) {
      const auto pick = static_cast<std::size_t>(
          j + static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(pool.size() - j))));
      std::swap(pool[static_cast<std::size_t>(j)], pool[pick]);
      q.at(i, j) = pool[static_cast<std::size_t>(j)];
    }
  }
  return q;
}

// The query for one server: the target file's row is cyclically shifted by
// the server index; every other row is forwarded untouched. Shifting
// preserves per-row distinctness, so the result stays in the query space.
inline ServerQuery build_server_query(const QueryMatrix& q, int target_file, int server,
                                      const SystemParams& p) {
  if (target_file < 0 || target_file >= p.m)
    throw std::invalid_argument("build_server_query: file index out of range");
  if (server < 0 || server >= p.n)
    throw std::invalid_argument("build_server_query: server index out of range");
  if (!q.well_formed(p)) throw std::invalid_argument("build_server_query: query matrix not in query space");
  ServerQuery sq{q, server};
  const int domain = p.index_domain();
  for (int j = 0; j < p.query_cols; ++j)
    sq.q.at(target_file, j) = static_cast<std::uint16_t>((q.at(target_file, j) + server) % domain);
  return sq;
}

// The server's side of the protocol: for each query column, the sum over all
// M rows of the addressed blocks (padding rows contribute zero). The server
// applies the same rule to every row -- it has no way of knowing which row is
// shifted. Columns addressed entirely inside the padding zone are pruned.
inline Response answer(const ServerShard& shard, const ServerQuery& sq, const SystemParams& p) {
  if (!sq.q.well_formed(p)) throw std::invalid_argument("answer: malformed server query");
  if (shard.m != p.m || shard.rows != p.sub_stripes || shard.alpha != p.alpha)
    throw std::invalid_argument("answer: shard does not match params");
  Response r;
  r.alpha = p.alpha;
  r.present.resize(static_cast<std::size_t>(p.query_cols));
  for (int j = 0; j < p.query_cols; ++j) {
    bool any_stored = false;
    for (int l = 0; l < p.m; ++l)
      if (!p.is_padding_row(sq.at(l, j))) any_stored = true;
    r.present[static_cast<std::size_t>(j)] = any_stored;
    if (!any_stored) continue;
    Block acc(static_cast<std::size_t>(p.alpha), 0);
    for (int l = 0; l < p.m; ++l) {
      const int row = sq.at(l, j);
      if (p.is_padding_row(row)) continue;
      const auto blk = shard.stored_block(l, row);
      for (int t = 0; t < p.alpha; ++t)
        acc[static_cast<std::size_t>(t)] = static_cast<Sym>(acc[static_cast<std::size_t>(t)] ^ blk[static_cast<std::size_t>(t)]);
    }
    r.blocks.push_back(std::move(acc));
  }
  return r;
}

// Symbols any server transmits for this query, computable from the query
// alone: alpha per column whose smallest row index addresses stored data.
inline long response_length(const ServerQuery& sq, const SystemParams& p) {
  if (!sq.q.well_formed(p)) throw std::invalid_argument("response_length: malformed server query");
  long present = 0;
  for (int j = 0; j < p.query_cols; ++j) {
    for (int l = 0; l < p.m; ++l)
      if (!p.is_padding_row(sq.at(l, j))) {
        ++present;
        break;
      }
  }
  return static_cast<long>(p.alpha) * present;
}

// Which servers play which role when decoding one retrieval, fixed entirely
// by the query's target row and the index arithmetic:
//  - per query column j, the servers whose shifted index lands in the padding
//    zone contribute pure interference;
//  - per stored row t, the servers whose shifted index equals t contribute
//    code blocks of that row.
// Both sets always have exactly K members.
struct DecodePlan {
  std::vector<std::vector<int>> interference_servers;  // per query column
  std::vector<std::vector<int>> row_contributors;      // per stored row

  // column j of the target row maps server i to stored row
  // (query value + i) mod (B + S), or to the padding zone.
};

inline DecodePlan build_decode_plan(const QueryMatrix& q, int target_file, const SystemParams& p) {
  if (target_file < 0 || target_file >= p.m)
    throw std::invalid_argument("build_decode_plan: file index out of range");
  if (!q.well_formed(p)) throw std::invalid_argument("build_decode_plan: query matrix not in query space");
  DecodePlan plan;
  plan.interference_servers.resize(static_cast<std::size_t>(p.query_cols));
  plan.row_contributors.resize(static_cast<std::size_t>(p.sub_stripes));
  const int domain = p.index_domain();
  for (int j = 0; j < p.query_cols; ++j) {
    const int qv = q.at(target_file, j);
    for (int i = 0; i < p.n; ++i) {
      const int row = (qv + i) % domain;
      if (p.is_padding_row(row))
        plan.interference_servers[static_cast<std::size_t>(j)].push_back(i);
      else
        plan.row_contributors[static_cast<std::size_t>(row)].push_back(i);
    }
    if (static_cast<int>(plan.interference_servers[static_cast<std::size_t>(j)].size()) != p.k)
      throw std::logic_error("build_decode_plan: interference set size is not K");
  }
  for (const auto& contributors : plan.row_contributors)
    if (static_cast<int>(contributors.size()) != p.k)
      throw std::logic_error("build_decode_plan: contributor set size is not K");
  return plan;
}

// Client-side reconstruction of the target file.
//
// Stage 1, per query column: the K interference-only positions determine the
// interference codeword; re-encoding it and subtracting exposes the target
// file's code blocks at the other N - K positions. Stage 2, per file row:
// the exposed blocks contributing to that row form exactly K codeword
// columns, which erasure-decode to the row's K data blocks.
inline FileMatrix decode_file(const std::vector<Response>& responses, const QueryMatrix& q,
                              int target_file, const SystemParams& p) {
  if (static_cast<int>(responses.size()) != p.n)
    throw DataError("decode_file: expected one response per server");
  if (target_file < 0 || target_file >= p.m)
    throw std::invalid_argument("decode_file: file index out of range");

  // Recompute each server's query and cross-check the presence bitmaps
  // before trusting any block.
  std::vector<ServerQuery> queries;
  queries.reserve(static_cast<std::size_t>(p.n));
  for (int i = 0; i < p.n; ++i) queries.push_back(build_server_query(q, target_file, i, p));
  for (int i = 0; i < p.n; ++i) {
    const Response& r = responses[static_cast<std::size_t>(i)];
    if (static_cast<int>(r.present.size()) != p.query_cols || r.alpha != p.alpha)
      throw DataError("decode_file: response " + std::to_string(i) + " has the wrong shape");
    if (static_cast<int>(r.blocks.size()) != r.present_count())
      throw DataError("decode_file: response " + std::to_string(i) + " block count mismatch");
    for (int j = 0; j < p.query_cols; ++j) {
      bool expect_present = false;
      for (int l = 0; l < p.m; ++l)
        if (!p.is_padding_row(queries[static_cast<std::size_t>(i)].at(l, j))) expect_present = true;
      if (expect_present != r.present[static_cast<std::size_t>(j)])
        throw DataError("decode_file: response " + std::to_string(i) +
                        " presence bitmap disagrees with the query");
    }
  }

  const DecodePlan plan = build_decode_plan(q, target_file, p);
  const int domain = p.index_domain();
  std::vector<std::vector<Block>> exposed(static_cast<std::size_t>(p.sub_stripes),
                                          std::vector<Block>(static_cast<std::size_t>(p.n)));

  for (int j = 0; j < p.query_cols; ++j) {
    const int qv = q.at(target_file, j);
    std::vector<std::pair<int, Block>> points;
    points.reserve(static_cast<std::size_t>(p.k));
    for (int i : plan.interference_servers[static_cast<std::size_t>(j)])
      points.emplace_back(i, responses[static_cast<std::size_t>(i)].block_or_zero(j));
    codes::Codeword interference;
    try {
      interference = p.code->reencode_full(points);
    } catch (const DataError& e) {
      throw DataError(std::string("decode_file: inconsistent responses: ") + e.what());
    }
    for (int i = 0; i < p.n; ++i) {
      const int row = (qv + i) % domain;
      if (p.is_padding_row(row)) continue;
      Block blk = responses[static_cast<std::size_t>(i)].block_or_zero(j);
      const Block& noise = interference[static_cast<std::size_t>(i)];
      for (int t = 0; t < p.alpha; ++t)
        blk[static_cast<std::size_t>(t)] = static_cast<Sym>(blk[static_cast<std::size_t>(t)] ^ noise[static_cast<std::size_t>(t)]);
      exposed[static_cast<std::size_t>(row)][static_cast<std::size_t>(i)] = std::move(blk);
    }
  }

  FileMatrix out(p.sub_stripes, p.k, p.alpha);
  for (int row = 0; row < p.sub_stripes; ++row) {
    std::vector<std::pair<int, Block>> points;
    for (int i : plan.row_contributors[static_cast<std::size_t>(row)])
      points.emplace_back(i, exposed[static_cast<std::size_t>(row)][static_cast<std::size_t>(i)]);
    codes::Stripe stripe;
    try {
      stripe = p.code->erasure_decode(points);
    } catch (const DataError& e) {
      throw DataError(std::string("decode_file: inconsistent responses: ") + e.what());
    }
    for (int col = 0; col < p.k; ++col) {
      const Block& blk = stripe[static_cast<std::size_t>(col)];
      std::copy(blk.begin(), blk.end(), out.block(row, col).begin());
    }
  }
  return out;
}

// ---- query-space enumeration -----------------------------------------------

// Number of per-row choices: ordered selections of query_cols distinct values
// from the index domain.
inline std::uint64_t row_arrangement_count(const SystemParams& p) {
  std::uint64_t count = 1;
  for (int t = 0; t < p.query_cols; ++t)
    count *= static_cast<std::uint64_t>(p.index_domain() - t);
  return count;
}

inline std::uint64_t query_space_size(const SystemParams& p) {
  const std::uint64_t per_row = row_arrangement_count(p);
  unsigned __int128 total = 1;
  for (int i = 0; i < p.m; ++i) {
    total *= per_row;
    if (total > static_cast<unsigned __int128>(UINT64_MAX))
      throw std::overflow_error("query_space_size: overflow");
  }
  return static_cast<std::uint64_t>(total);
}

namespace detail {

inline std::vector<std::vector<std::uint16_t>> all_row_arrangements(const SystemParams& p) {
  std::vector<std::vector<std::uint16_t>> rows;
  std::vector<std::uint16_t> current;
  std::vector<bool> used(static_cast<std::size_t>(p.index_domain()), false);
  auto rec = [&](auto&& self) -> void {
    if (static_cast<int>(current.size()) == p.query_cols) {
      rows.push_back(current);
      return;
    }
    for (int v = 0; v < p.index_domain(); ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = true;
      current.push_back(static_cast<std::uint16_t>(v));
      self(self);
      current.pop_back();
      used[static_cast<std::size_t>(v)] = false;
    }
  };
  rec(rec);
  return rows;
}

}  // namespace detail

// Visits every matrix in the query space exactly once.
template <typename Fn>
inline void for_each_query_matrix(const SystemParams& p, Fn&& fn) {
  const auto rows = detail::all_row_arrangements(p);
  std::vector<std::size_t> idx(static_cast<std::size_t>(p.m), 0);
  QueryMatrix q(p.m, p.query_cols);
  while (true) {
    for (int i = 0; i < p.m; ++i)
      for (int j = 0; j < p.query_cols; ++j)
        q.at(i, j) = rows[idx[static_cast<std::size_t>(i)]][static_cast<std::size_t>(j)];
    fn(q);
    int pos = p.m - 1;
    while (pos >= 0) {
      if (++idx[static_cast<std::size_t>(pos)] < rows.size()) break;
      idx[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
}

struct PrivacyVerdict {
  bool ok = false;
  std::uint64_t space_size = 0;
  int servers_checked = 0;
  int files_checked = 0;
  std::string detail;
};

// Exhaustively verifies that, for every server, the distribution of derived
// server queries does not depend on the requested file: for each (server,
// file) pair the multiset of derived queries over the whole query space must
// equal the query space itself.
inline PrivacyVerdict privacy_enumeration_check(const SystemParams& p,
                                                std::uint64_t enumeration_cap = 1'000'000) {
  PrivacyVerdict verdict;
  verdict.space_size = query_space_size(p);
  if (verdict.space_size > enumeration_cap)
    throw std::length_error("privacy_enumeration_check: query space of size " +
                            std::to_string(verdict.space_size) + " exceeds cap " +
                            std::to_string(enumeration_cap));
  std::vector<std::vector<std::uint16_t>> space;
  space.reserve(static_cast<std::size_t>(verdict.space_size));
  for_each_query_matrix(p, [&](const QueryMatrix& q) { space.push_back(q.e); });
  std::sort(space.begin(), space.end());

  for (int server = 0; server < p.n; ++server) {
    for (int file = 0; file < p.m; ++file) {
      std::vector<std::vector<std::uint16_t>> image;
      image.reserve(space.size());
      for_each_query_matrix(p, [&](const QueryMatrix& q) {
        image.push_back(build_server_query(q, file, server, p).q.e);
      });
      std::sort(image.begin(), image.end());
      if (image != space) {
        verdict.ok = false;
        verdict.detail = "derived query distribution for server " + std::to_string(server) +
                         ", file " + std::to_string(file) + " is not uniform over the query space";
        return verdict;
      }
    }
  }
  verdict.ok = true;
  verdict.servers_checked = p.n;
  verdict.files_checked = p.m;
  verdict.detail = "all derived distributions identical (uniform over the query space)";
  return verdict;
}

}  // namespace arraypir::pir
