// Drives the built `pir` binary end to end: snapshots on disk, retrieval
// round-trips, repair, benchmarks, CSV output, exit codes.

#include <gtest/gtest.h>

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace {

namespace fs = std::filesystem;

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run(const std::string& args) {
  const std::string cmd = std::string(PIR_CLI_PATH) + " " + args + " 2>&1";
  FILE* pipe = popen(cmd.c_str(), "r");
  EXPECT_NE(pipe, nullptr);
  RunResult result;
  char buf[4096];
  while (std::size_t got = std::fread(buf, 1, sizeof buf, pipe)) result.output.append(buf, got);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("pir_cli_test_" + std::to_string(::getpid()) + "_" +
            ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  static std::vector<std::uint8_t> read_bytes(const std::string& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  }

  static void write_bytes(const std::string& p, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(p, std::ios::binary);
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  }

  fs::path dir_;
};

TEST_F(CliTest, EncodeWritesSnapshotDeterministically) {
  const std::string a = path("a");
  const std::string b = path("b");
  const std::string common = "encode --n 5 --k 3 --alpha 2 --m 2 --code stacked-rs --w 4 --seed 9";
  EXPECT_EQ(run(common + " --out " + a).exit_code, 0);
  EXPECT_EQ(run(common + " --out " + b).exit_code, 0);

  for (int i = 0; i < 5; ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "shard_%03d.bin", i);
    EXPECT_TRUE(fs::exists(fs::path(a) / name)) << name;
    EXPECT_EQ(read_bytes((fs::path(a) / name).string()), read_bytes((fs::path(b) / name).string()));
  }
  EXPECT_TRUE(fs::exists(fs::path(a) / "manifest.json"));
  EXPECT_EQ(read_bytes((fs::path(a) / "manifest.json").string()),
            read_bytes((fs::path(b) / "manifest.json").string()));
}

TEST_F(CliTest, PayloadRoundTripPerFile) {
  // (5,3,alpha=4,w=8): 24 payload bytes per file, 48 total
  std::vector<std::uint8_t> payload(37);
  for (std::size_t i = 0; i < payload.size(); ++i) payload[i] = static_cast<std::uint8_t>(13 * i + 5);
  write_bytes(path("payload.bin"), payload);

  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 5 --k 3 --alpha 4 --m 2 --code stacked-rs --w 8 --input " +
                path("payload.bin") + " --out " + cluster)
                .exit_code,
            0);

  std::vector<std::uint8_t> expect0(payload.begin(), payload.begin() + 24);
  std::vector<std::uint8_t> expect1(payload.begin() + 24, payload.end());
  expect1.resize(24, 0);  // zero padding up to the file capacity

  for (int theta = 0; theta < 2; ++theta) {
    const std::string out = path("file" + std::to_string(theta));
    const RunResult r = run("retrieve --cluster " + cluster + " --theta " + std::to_string(theta) +
                            " --seed 3 --out " + out);
    ASSERT_EQ(r.exit_code, 0) << r.output;
    EXPECT_EQ(read_bytes(out), theta == 0 ? expect0 : expect1);
    const auto report = nlohmann::json::parse(r.output);
    EXPECT_EQ(report.at("theta").get<int>(), theta);
    EXPECT_TRUE(report.at("ok").get<bool>());
    EXPECT_EQ(report.at("l").size(), 5u);
  }
}

TEST_F(CliTest, ForcedQueryMatchesPredictedDownload) {
  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 5 --k 3 --alpha 2 --m 2 --code stacked-rs --w 4 --seed 1 --out " + cluster)
                .exit_code,
            0);
  const RunResult r =
      run("retrieve --cluster " + cluster + " --theta 0 --query \"0,2,4;1,3,0\"");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  const auto report = nlohmann::json::parse(r.output);
  EXPECT_EQ(report.at("total").get<long>(), 24);  // 12 blocks of alpha = 2
  EXPECT_EQ(report.at("l"), nlohmann::json({4, 4, 4, 6, 6}));
}

TEST_F(CliTest, RetrieveRejectsBadTheta) {
  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 4 --k 2 --alpha 1 --m 2 --code stacked-rs --w 4 --out " + cluster).exit_code,
            0);
  const RunResult r = run("retrieve --cluster " + cluster + " --theta 7");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("out of range"), std::string::npos);
}

TEST_F(CliTest, EvenOddShapeValidated) {
  const RunResult bad =
      run("encode --n 5 --k 2 --m 1 --code evenodd --p 3 --out " + path("x"));
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.output.find("N = K + 2"), std::string::npos);

  const RunResult good =
      run("encode --n 4 --k 2 --m 2 --code evenodd --p 3 --out " + path("cluster"));
  EXPECT_EQ(good.exit_code, 0) << good.output;
  const RunResult ret = run("retrieve --cluster " + path("cluster") + " --theta 1 --seed 2");
  EXPECT_EQ(ret.exit_code, 0) << ret.output;
}

TEST_F(CliTest, RepairRestoresShardAndReportsRatio) {
  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 5 --k 3 --alpha 2 --m 2 --code stacked-rs --w 4 --seed 4 --out " + cluster)
                .exit_code,
            0);
  const RunResult before = run("retrieve --cluster " + cluster + " --theta 0 --seed 11 --out " +
                               path("before.bin"));
  ASSERT_EQ(before.exit_code, 0);
  const auto original_shard = read_bytes((fs::path(cluster) / "shard_002.bin").string());

  // clobber one shard on disk and rebuild it
  write_bytes((fs::path(cluster) / "shard_002.bin").string(), {0xDE, 0xAD});
  const RunResult rep = run("repair --cluster " + cluster + " --failed 2");
  ASSERT_EQ(rep.exit_code, 0) << rep.output;
  const auto report = nlohmann::json::parse(rep.output);
  EXPECT_EQ(report.at("failed").get<int>(), 2);
  EXPECT_EQ(report.at("helpers"), nlohmann::json({0, 1, 3, 4}));
  EXPECT_EQ(report.at("bandwidth_symbols").get<long>(), 24);  // M*B*K*alpha
  EXPECT_EQ(report.at("ratio").get<std::string>(), "3/2");    // K(N-K)/(N-1)

  EXPECT_EQ(read_bytes((fs::path(cluster) / "shard_002.bin").string()), original_shard);
  const RunResult after = run("retrieve --cluster " + cluster + " --theta 0 --seed 11 --out " +
                              path("after.bin"));
  ASSERT_EQ(after.exit_code, 0);
  EXPECT_EQ(read_bytes(path("after.bin")), read_bytes(path("before.bin")));
}

TEST_F(CliTest, RepairWithExplicitHelpers) {
  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 5 --k 3 --alpha 2 --m 2 --code stacked-rs --w 4 --seed 6 --out " + cluster)
                .exit_code,
            0);
  // with D = K helpers the regenerating bound degenerates to a full download,
  // so the measured/optimal ratio is exactly 1
  const RunResult rep = run("repair --cluster " + cluster + " --failed 2 --helpers 0,1,3");
  ASSERT_EQ(rep.exit_code, 0) << rep.output;
  const auto report = nlohmann::json::parse(rep.output);
  EXPECT_EQ(report.at("helpers"), nlohmann::json({0, 1, 3}));
  EXPECT_EQ(report.at("bandwidth_symbols").get<long>(), 24);
  EXPECT_EQ(report.at("ratio").get<std::string>(), "1");

  const RunResult bad = run("repair --cluster " + cluster + " --failed 2 --helpers 0,1");
  EXPECT_EQ(bad.exit_code, 1);  // fewer than K helpers
}

TEST_F(CliTest, CorruptSnapshotDetected) {
  const std::string cluster = path("cluster");
  ASSERT_EQ(run("encode --n 4 --k 2 --alpha 1 --m 1 --code stacked-rs --w 4 --out " + cluster).exit_code,
            0);
  auto bytes = read_bytes((fs::path(cluster) / "shard_001.bin").string());
  bytes[0] = static_cast<std::uint8_t>(bytes[0] ^ 0x80);
  write_bytes((fs::path(cluster) / "shard_001.bin").string(), bytes);
  const RunResult r = run("retrieve --cluster " + cluster + " --theta 0");
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.output.find("digest mismatch"), std::string::npos);
}

TEST_F(CliTest, BenchRateExhaustiveHitsCapacityExactly) {
  const RunResult r = run("bench-rate --n 5 --k 3 --alpha 1 --m 2 --code stacked-rs --w 4 "
                          "--mode exhaustive");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("N,K,M,empirical_rate,capacity,mode"), std::string::npos);
  EXPECT_NE(r.output.find("5,3,2,5/8,5/8,exhaustive"), std::string::npos);

  const RunResult one = run("bench-rate --n 5 --k 3 --alpha 1 --m 1 --code stacked-rs --w 4 "
                            "--mode exhaustive");
  ASSERT_EQ(one.exit_code, 0);
  EXPECT_NE(one.output.find("5,3,1,1,1,exhaustive"), std::string::npos);
}

TEST_F(CliTest, BenchRateEnforcesEnumerationCap) {
  const RunResult r = run("bench-rate --n 5 --k 3 --alpha 1 --m 2 --code stacked-rs --w 4 "
                          "--mode exhaustive --max-omega 100");
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_NE(r.output.find("exceeds cap"), std::string::npos);
}

TEST_F(CliTest, BenchRateMonteCarloRuns) {
  const RunResult r = run("bench-rate --n 6 --k 4 --alpha 1 --m 3 --code stacked-rs --w 4 "
                          "--mode monte-carlo --sessions 2000 --seed 17");
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_NE(r.output.find("6,4,3,"), std::string::npos);
  EXPECT_NE(r.output.find("monte-carlo"), std::string::npos);
}

TEST_F(CliTest, CompareEmitsTablesAndSweeps) {
  const RunResult point = run("compare --sweep point --n 5 --k 3 --m 2");
  ASSERT_EQ(point.exit_code, 0);
  EXPECT_NE(point.output.find("zhu-zhou,yes,\"\",6,6,3/2,5/8"), std::string::npos);

  const RunResult fig = run("compare --sweep fig5 --out " + path("fig5.csv"));
  ASSERT_EQ(fig.exit_code, 0);
  const auto csv = read_bytes(path("fig5.csv"));
  const std::string text(csv.begin(), csv.end());
  EXPECT_EQ(text.rfind("N,gamma1_", 0), 0u);

  const RunResult bad = run("compare --sweep fig9");
  EXPECT_EQ(bad.exit_code, 1);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_NE(run("").exit_code, 0);
  EXPECT_NE(run("retrieve").exit_code, 0);          // missing required options
  EXPECT_NE(run("frobnicate --x 1").exit_code, 0);  // unknown subcommand
}

}  // namespace
