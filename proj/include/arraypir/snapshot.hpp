#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "arraypir/sim.hpp"
#include "arraypir/wire.hpp"

namespace arraypir::io {

inline constexpr int kSnapshotVersion = 1;

inline std::uint64_t fnv1a64(std::span<const std::uint8_t> data) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : data) {
    hash ^= b;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

inline std::string digest_string(std::span<const std::uint8_t> data) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(data)));
  return buf;
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Write-then-rename so readers never observe a half-written file.
inline void write_file_atomic(const std::filesystem::path& path, std::span<const std::uint8_t> data) {
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + tmp.string());
    out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
    if (!out) throw DataError("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

inline std::string shard_file_name(int server) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "shard_%03d.bin", server);
  return buf;
}

inline std::vector<std::uint8_t> packed_shard_bytes(const pir::ServerShard& shard, int width) {
  return wire::bytes_from_symbols(shard.sym, width);
}

// Cluster snapshot: manifest.json plus one packed shard file per server.
inline void save_cluster(const std::filesystem::path& dir, const sim::Cluster& cluster,
                         std::uint64_t payload_bytes) {
  std::filesystem::create_directories(dir);
  const pir::SystemParams& p = cluster.params();
  const int width = p.code->field().width();

  nlohmann::json manifest;
  manifest["version"] = kSnapshotVersion;
  manifest["code"] = p.code->descriptor();
  manifest["params"] = {{"n", p.n},
                        {"k", p.k},
                        {"alpha", p.alpha},
                        {"m", p.m},
                        {"b", p.sub_stripes},
                        {"s", p.query_cols},
                        {"file_symbols", p.file_symbols},
                        {"field_width", width}};
  manifest["payload_bytes"] = payload_bytes;
  nlohmann::json shards = nlohmann::json::array();
  for (int i = 0; i < p.n; ++i) {
    const auto bytes = packed_shard_bytes(cluster.shard(i), width);
    const std::string name = shard_file_name(i);
    write_file_atomic(dir / name, bytes);
    shards.push_back({{"file", name}, {"digest", digest_string(bytes)}});
  }
  manifest["shards"] = std::move(shards);
  const std::string text = manifest.dump(2) + "\n";
  write_file_atomic(dir / "manifest.json",
                    std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

struct LoadedCluster {
  sim::Cluster cluster;
  std::uint64_t payload_bytes = 0;
};

// treat_failed < 0 loads every shard and checks every digest. Passing a
// server index skips that shard's file entirely and marks it failed in the
// loaded cluster (the repair flow treats it as lost regardless of what is on
// disk).
inline LoadedCluster load_cluster(const std::filesystem::path& dir, int treat_failed = -1) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
  try {
    if (manifest.at("version").get<int>() != kSnapshotVersion)
      throw DataError("unsupported snapshot version");
    auto code = std::make_shared<codes::MdsArrayCode>(
        codes::MdsArrayCode::from_descriptor(manifest.at("code").get<std::string>()));
    const auto& jp = manifest.at("params");
    pir::SystemParams params = pir::derive_params(jp.at("n").get<int>(), jp.at("k").get<int>(),
                                                  jp.at("alpha").get<int>(), jp.at("m").get<int>(), code);
    if (jp.at("b").get<int>() != params.sub_stripes || jp.at("s").get<int>() != params.query_cols ||
        jp.at("file_symbols").get<long>() != params.file_symbols)
      throw DataError("manifest parameters are internally inconsistent");
    const int width = code->field().width();
    const std::size_t shard_symbols =
        static_cast<std::size_t>(params.m) * params.sub_stripes * params.alpha;

    std::vector<pir::ServerShard> shards;
    const auto& jshards = manifest.at("shards");
    if (static_cast<int>(jshards.size()) != params.n) throw DataError("manifest lists wrong shard count");
    for (int i = 0; i < params.n; ++i) {
      pir::ServerShard sh;
      sh.server = i;
      sh.m = params.m;
      sh.rows = params.sub_stripes;
      sh.alpha = params.alpha;
      if (i == treat_failed) {
        sh.sym.assign(shard_symbols, 0);  // placeholder; marked failed below
      } else {
        const auto bytes =
            read_file(dir / jshards.at(static_cast<std::size_t>(i)).at("file").get<std::string>());
        if (digest_string(bytes) != jshards.at(static_cast<std::size_t>(i)).at("digest").get<std::string>())
          throw DataError("shard " + std::to_string(i) + " digest mismatch (corrupt snapshot)");
        sh.sym = wire::unpack_symbols(bytes, width, shard_symbols);
      }
      shards.push_back(std::move(sh));
    }
    LoadedCluster out{sim::Cluster::from_shards(std::move(params), std::move(shards)),
                      manifest.value("payload_bytes", std::uint64_t{0})};
    if (treat_failed >= 0) out.cluster.fail_server(treat_failed);
    return out;
  } catch (const nlohmann::json::exception& e) {
    throw DataError("manifest.json: " + std::string(e.what()));
  }
}

}  // namespace arraypir::io
