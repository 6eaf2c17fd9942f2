#pragma once

#include <atomic>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <json.hpp>

#include "arraypir/analysis.hpp"
#include "arraypir/pir.hpp"
#include "arraypir/wire.hpp"

namespace arraypir::sim {

struct SessionReport {
  std::uint64_t session_id = 0;
  int theta = 0;
  std::vector<long> per_server_symbols;  // realized l_i
  long total_symbols = 0;
  long overhead_bits = 0;  // framing + presence bitmaps, kept apart from l_i
  bool ok = false;

  nlohmann::json to_json() const {
    return nlohmann::json{{"session_id", session_id}, {"theta", theta},
                          {"l", per_server_symbols},  {"total", total_symbols},
                          {"overhead_bits", overhead_bits}, {"ok", ok}};
  }
  std::string to_json_line() const { return to_json().dump(); }
};

struct RepairReport {
  int failed = 0;
  std::vector<int> helpers;
  long bandwidth_symbols = 0;
  analysis::Rational gamma_msr;  // optimal bandwidth at this repair degree
  analysis::Rational ratio;      // measured / optimal

  nlohmann::json to_json() const {
    return nlohmann::json{{"failed", failed},
                          {"helpers", helpers},
                          {"bandwidth_symbols", bandwidth_symbols},
                          {"gamma_msr", analysis::rational_str(gamma_msr)},
                          {"ratio", analysis::rational_str(ratio)}};
  }
};

// In-process cluster of N servers. Shards are immutable while retrieval
// sessions run; fail/repair mutate and need exclusive access. Every query and
// response crosses the wire format even in-process, so the accounting equals
// what a networked deployment would transfer.
class Cluster {
 public:
  Cluster(pir::SystemParams params, const std::vector<pir::FileMatrix>& files)
      : params_(std::move(params)) {
    pir::EncodedStore store = pir::encode_system(files, params_);
    for (auto& sh : store.shards) shards_.emplace_back(std::move(sh));
  }

  // Counters are atomic only to allow concurrent retrievals on one instance;
  // moving needs exclusive access anyway, so plain value transfer is fine.
  Cluster(Cluster&& other) noexcept
      : params_(std::move(other.params_)),
        shards_(std::move(other.shards_)),
        next_session_(other.next_session_.load()),
        downloaded_symbols_(other.downloaded_symbols_.load()),
        repair_bandwidth_(other.repair_bandwidth_.load()) {}
  Cluster& operator=(Cluster&& other) noexcept {
    params_ = std::move(other.params_);
    shards_ = std::move(other.shards_);
    next_session_.store(other.next_session_.load());
    downloaded_symbols_.store(other.downloaded_symbols_.load());
    repair_bandwidth_.store(other.repair_bandwidth_.load());
    return *this;
  }

  // Frames a byte payload into M files of L symbols (zero-padded) and encodes.
  static Cluster ingest(std::span<const std::uint8_t> payload, pir::SystemParams params) {
    const int width = params.code->field().width();
    const std::size_t total_symbols =
        static_cast<std::size_t>(params.m) * static_cast<std::size_t>(params.file_symbols);
    std::vector<gf::Sym> symbols;
    try {
      symbols = wire::symbols_from_bytes(payload, width, total_symbols);
    } catch (const DataError&) {
      throw DataError("ingest: payload exceeds the system capacity of " +
                      std::to_string(total_symbols * static_cast<std::size_t>(width) / 8) + " bytes");
    }
    std::vector<pir::FileMatrix> files;
    files.reserve(static_cast<std::size_t>(params.m));
    for (int i = 0; i < params.m; ++i) {
      pir::FileMatrix f(params.sub_stripes, params.k, params.alpha);
      std::copy(symbols.begin() + static_cast<std::ptrdiff_t>(i) * params.file_symbols,
                symbols.begin() + static_cast<std::ptrdiff_t>(i + 1) * params.file_symbols,
                f.sym.begin());
      files.push_back(std::move(f));
    }
    return Cluster(std::move(params), files);
  }

  static Cluster random(pir::SystemParams params, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    const auto files = pir::random_files(params, rng);
    return Cluster(std::move(params), files);
  }

  // Reconstitutes a cluster from previously stored shards (snapshot load).
  static Cluster from_shards(pir::SystemParams params, std::vector<pir::ServerShard> shards) {
    if (static_cast<int>(shards.size()) != params.n)
      throw DataError("from_shards: expected N shards");
    Cluster c(std::move(params));
    for (int i = 0; i < c.params_.n; ++i) {
      pir::ServerShard& sh = shards[static_cast<std::size_t>(i)];
      if (sh.m != c.params_.m || sh.rows != c.params_.sub_stripes || sh.alpha != c.params_.alpha ||
          sh.sym.size() !=
              static_cast<std::size_t>(c.params_.m) * c.params_.sub_stripes * c.params_.alpha)
        throw DataError("from_shards: shard " + std::to_string(i) + " has the wrong shape");
      sh.server = i;
      c.shards_.emplace_back(std::move(sh));
    }
    return c;
  }

  const pir::SystemParams& params() const { return params_; }
  int live_count() const {
    int c = 0;
    for (const auto& s : shards_)
      if (s) ++c;
    return c;
  }
  bool live(int i) const { return shards_[static_cast<std::size_t>(check_index(i))].has_value(); }

  const pir::ServerShard& shard(int i) const {
    const auto& slot = shards_[static_cast<std::size_t>(check_index(i))];
    if (!slot) throw DataError("shard " + std::to_string(i) + " has failed");
    return *slot;
  }

  std::pair<pir::FileMatrix, SessionReport> retrieve(int theta, std::mt19937_64& rng) const {
    return retrieve_with_query(theta, pir::sample_query_matrix(params_, rng));
  }

  std::pair<pir::FileMatrix, SessionReport> retrieve_with_query(int theta,
                                                                const pir::QueryMatrix& q) const {
    if (theta < 0 || theta >= params_.m)
      throw std::invalid_argument("retrieve: theta out of range");
    for (int i = 0; i < params_.n; ++i)
      if (!shards_[static_cast<std::size_t>(i)])
        throw DataError("retrieve: server " + std::to_string(i) + " is down; repair it first");

    SessionReport report;
    report.session_id = next_session_.fetch_add(1);
    report.theta = theta;
    report.per_server_symbols.resize(static_cast<std::size_t>(params_.n));
    const int width = params_.code->field().width();

    std::vector<pir::Response> responses;
    responses.reserve(static_cast<std::size_t>(params_.n));
    for (int i = 0; i < params_.n; ++i) {
      const pir::ServerQuery sq = pir::build_server_query(q, theta, i, params_);
      const auto query_bytes = wire::serialize_server_query(sq);
      // server side
      const pir::QueryMatrix received = wire::parse_query(query_bytes);
      const pir::Response resp =
          pir::answer(*shards_[static_cast<std::size_t>(i)], pir::ServerQuery{received, i}, params_);
      const auto response_bytes = wire::serialize_response(resp, width);
      // client side
      const pir::Response parsed = wire::parse_response(response_bytes, params_);
      const long symbols = parsed.symbol_count();
      report.per_server_symbols[static_cast<std::size_t>(i)] = symbols;
      report.total_symbols += symbols;
      report.overhead_bits += static_cast<long>(response_bytes.size()) * 8 - symbols * width;
      responses.push_back(parsed);
    }
    pir::FileMatrix file = pir::decode_file(responses, q, theta, params_);
    report.ok = true;
    downloaded_symbols_ += static_cast<std::uint64_t>(report.total_symbols);
    return {std::move(file), std::move(report)};
  }

  void fail_server(int i) {
    check_index(i);
    if (!shards_[static_cast<std::size_t>(i)])
      throw std::invalid_argument("fail_server: server " + std::to_string(i) + " already failed");
    if (params_.n - live_count() + 1 > params_.n - params_.k)
      throw std::invalid_argument("fail_server: more than N-K failures would lose the system");
    shards_[static_cast<std::size_t>(i)].reset();
  }

  // Rebuilds a failed shard stripe by stripe, reading whole blocks from the
  // helpers. Empty helper list means every other live server.
  RepairReport repair_server(int i, std::vector<int> helpers = {}) {
    check_index(i);
    if (shards_[static_cast<std::size_t>(i)])
      throw std::invalid_argument("repair_server: server " + std::to_string(i) + " is live");
    if (helpers.empty()) {
      for (int h = 0; h < params_.n; ++h)
        if (h != i && shards_[static_cast<std::size_t>(h)]) helpers.push_back(h);
    }
    for (int h : helpers)
      if (h < 0 || h >= params_.n || !shards_[static_cast<std::size_t>(h)])
        throw std::invalid_argument("repair_server: helper " + std::to_string(h) + " is not live");
    if (static_cast<int>(helpers.size()) < params_.k)
      throw std::invalid_argument("repair_server: need at least K live helpers");

    pir::ServerShard rebuilt;
    rebuilt.server = i;
    rebuilt.m = params_.m;
    rebuilt.rows = params_.sub_stripes;
    rebuilt.alpha = params_.alpha;
    rebuilt.sym.assign(
        static_cast<std::size_t>(params_.m) * params_.sub_stripes * params_.alpha, 0);

    RepairReport report;
    report.failed = i;
    report.helpers = helpers;
    for (int f = 0; f < params_.m; ++f) {
      for (int row = 0; row < params_.sub_stripes; ++row) {
        const auto result = params_.code->repair(i, helpers, [&](int col) {
          return shards_[static_cast<std::size_t>(col)]->block(f, row);
        });
        report.bandwidth_symbols += result.bandwidth_symbols;
        std::copy(result.block.begin(), result.block.end(),
                  rebuilt.sym.begin() +
                      (static_cast<std::ptrdiff_t>(f) * params_.sub_stripes + row) * params_.alpha);
      }
    }
    shards_[static_cast<std::size_t>(i)] = std::move(rebuilt);
    repair_bandwidth_ += static_cast<std::uint64_t>(report.bandwidth_symbols);

    // Optimal bandwidth reference at this repair degree, for the whole store.
    const analysis::Rational stored_size =
        analysis::Rational(params_.m) * params_.file_symbols;
    report.gamma_msr =
        analysis::msr_mbr_params(stored_size, params_.k, static_cast<int>(helpers.size())).gamma_msr;
    report.ratio = analysis::Rational(report.bandwidth_symbols) / report.gamma_msr;
    return report;
  }

  std::uint64_t downloaded_symbols_total() const { return downloaded_symbols_.load(); }
  std::uint64_t repair_bandwidth_total() const { return repair_bandwidth_.load(); }

  // Byte payload of one decoded file (the framing inverse of ingest).
  std::vector<std::uint8_t> file_bytes(const pir::FileMatrix& file) const {
    return wire::bytes_from_symbols(file.sym, params_.code->field().width());
  }

 private:
  explicit Cluster(pir::SystemParams params) : params_(std::move(params)) {}

  int check_index(int i) const {
    if (i < 0 || i >= params_.n) throw std::invalid_argument("server index out of range");
    return i;
  }

  pir::SystemParams params_;
  std::vector<std::optional<pir::ServerShard>> shards_;
  mutable std::atomic<std::uint64_t> next_session_{0};
  mutable std::atomic<std::uint64_t> downloaded_symbols_{0};
  mutable std::atomic<std::uint64_t> repair_bandwidth_{0};
};

}  // namespace arraypir::sim
