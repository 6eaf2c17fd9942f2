#include "arraypir/snapshot.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

namespace {

namespace fs = std::filesystem;
using arraypir::DataError;
using arraypir::codes::MdsArrayCode;
using namespace arraypir::pir;
using arraypir::sim::Cluster;

class SnapshotTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pir_snapshot_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  static SystemParams make_params(int n, int k, int alpha, int m, int width = 4) {
    auto code = std::make_shared<MdsArrayCode>(MdsArrayCode::stacked_rs(n, k, alpha, width));
    return derive_params(n, k, alpha, m, code);
  }

  fs::path dir_;
};

TEST_F(SnapshotTest, SaveLoadPreservesShardsAndParams) {
  const SystemParams p = make_params(5, 3, 3, 2, 5);
  const Cluster original = Cluster::random(p, 77);
  arraypir::io::save_cluster(dir_, original, 123);

  const auto loaded = arraypir::io::load_cluster(dir_);
  EXPECT_EQ(loaded.payload_bytes, 123u);
  const SystemParams& lp = loaded.cluster.params();
  EXPECT_EQ(lp.n, 5);
  EXPECT_EQ(lp.k, 3);
  EXPECT_EQ(lp.alpha, 3);
  EXPECT_EQ(lp.m, 2);
  EXPECT_EQ(lp.code->descriptor(), p.code->descriptor());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(loaded.cluster.shard(i), original.shard(i));

  // retrievals agree across the round trip
  const QueryMatrix q = [&] {
    std::mt19937_64 rng(5);
    return sample_query_matrix(p, rng);
  }();
  EXPECT_EQ(loaded.cluster.retrieve_with_query(1, q).first,
            original.retrieve_with_query(1, q).first);
}

TEST_F(SnapshotTest, LoadTreatingOneShardAsFailed) {
  const SystemParams p = make_params(4, 2, 2, 1);
  const Cluster original = Cluster::random(p, 13);
  arraypir::io::save_cluster(dir_, original, 0);
  fs::remove(dir_ / "shard_001.bin");  // the shard being repaired may be gone entirely

  auto loaded = arraypir::io::load_cluster(dir_, 1);
  EXPECT_FALSE(loaded.cluster.live(1));
  loaded.cluster.repair_server(1);
  EXPECT_EQ(loaded.cluster.shard(1), original.shard(1));
}

TEST_F(SnapshotTest, RejectsTamperedManifestOrShards) {
  const SystemParams p = make_params(4, 2, 1, 1);
  arraypir::io::save_cluster(dir_, Cluster::random(p, 1), 0);

  {
    auto bytes = arraypir::io::read_file(dir_ / "shard_000.bin");
    bytes[0] = static_cast<std::uint8_t>(bytes[0] ^ 0x01);
    arraypir::io::write_file_atomic(dir_ / "shard_000.bin", bytes);
    EXPECT_THROW(arraypir::io::load_cluster(dir_), DataError);
  }
  {
    const std::string junk = "{not json";
    arraypir::io::write_file_atomic(
        dir_ / "manifest.json",
        std::span(reinterpret_cast<const std::uint8_t*>(junk.data()), junk.size()));
    EXPECT_THROW(arraypir::io::load_cluster(dir_), DataError);
  }
  EXPECT_THROW(arraypir::io::load_cluster(dir_ / "missing"), DataError);
}

TEST_F(SnapshotTest, DigestIsStable) {
  const std::vector<std::uint8_t> data = {0x61, 0x62, 0x63};  // "abc"
  EXPECT_EQ(arraypir::io::fnv1a64(data), 0xe71fa2190541574bULL);
  EXPECT_EQ(arraypir::io::digest_string(data), "fnv1a64:e71fa2190541574b");
}

}  // namespace
