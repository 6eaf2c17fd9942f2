// pir: encode/retrieve/repair against a simulated coded cluster, plus rate
// benchmarks and protocol comparison tables.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "arraypir/analysis.hpp"
#include "arraypir/codes.hpp"
#include "arraypir/pir.hpp"
#include "arraypir/sim.hpp"
#include "arraypir/snapshot.hpp"

namespace {

using namespace arraypir;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct RunConfig {
  int n = 5;
  int k = 3;
  int alpha = 1;
  int m = 2;
  std::string code_family = "stacked-rs";
  int width = 8;
  int prime = 0;
  std::uint64_t seed = 1;
  int theta = 0;
  std::string mode = "exhaustive";
  long sessions = 100000;
  std::uint64_t max_omega = 1'000'000;
  std::string sweep;
  std::string out;
  std::string cluster_dir;
  std::string input;
  std::string query;
  std::string report_path;
  int failed = -1;
  std::string helpers;
  int s_factor = 0;
};

std::shared_ptr<const codes::MdsArrayCode> make_code(RunConfig& cfg) {
  if (cfg.code_family == "stacked-rs") {
    return std::make_shared<codes::MdsArrayCode>(
        codes::MdsArrayCode::stacked_rs(cfg.n, cfg.k, cfg.alpha, cfg.width));
  }
  if (cfg.code_family == "evenodd") {
    if (cfg.prime == 0) throw std::invalid_argument("evenodd requires --p");
    if (cfg.n != cfg.k + 2)
      throw std::invalid_argument("evenodd forces N = K + 2; got N=" + std::to_string(cfg.n));
    auto code = std::make_shared<codes::MdsArrayCode>(codes::MdsArrayCode::evenodd(cfg.k, cfg.prime));
    cfg.alpha = code->alpha();
    cfg.width = 1;
    return code;
  }
  throw std::invalid_argument("unknown code family '" + cfg.code_family + "'");
}

std::vector<int> parse_int_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream stream(text);
  std::string token;
  while (std::getline(stream, token, ',')) {
    if (!token.empty()) out.push_back(std::stoi(token));
  }
  return out;
}

// "0,2,4;1,3,0" -> M x S matrix
pir::QueryMatrix parse_query_arg(const std::string& text, const pir::SystemParams& params) {
  std::vector<std::vector<int>> rows;
  std::stringstream stream(text);
  std::string row;
  while (std::getline(stream, row, ';')) rows.push_back(parse_int_list(row));
  if (static_cast<int>(rows.size()) != params.m)
    throw std::invalid_argument("--query must have M rows");
  pir::QueryMatrix q(params.m, params.query_cols);
  for (int i = 0; i < params.m; ++i) {
    if (static_cast<int>(rows[static_cast<std::size_t>(i)].size()) != params.query_cols)
      throw std::invalid_argument("--query rows must have S entries");
    for (int j = 0; j < params.query_cols; ++j)
      q.at(i, j) = static_cast<std::uint16_t>(rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
  }
  if (!q.well_formed(params)) throw std::invalid_argument("--query is not a valid query matrix");
  return q;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  io::write_file_atomic(path,
                        std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

int cmd_encode(RunConfig cfg) {
  auto code = make_code(cfg);
  pir::SystemParams params = pir::derive_params(cfg.n, cfg.k, cfg.alpha, cfg.m, code);
  if (cfg.cluster_dir.empty()) throw std::invalid_argument("encode: --out directory required");

  std::uint64_t payload_bytes = 0;
  std::optional<sim::Cluster> cluster;
  if (!cfg.input.empty()) {
    const auto payload = io::read_file(cfg.input);
    payload_bytes = payload.size();
    cluster.emplace(sim::Cluster::ingest(payload, params));
  } else {
    cluster.emplace(sim::Cluster::random(params, cfg.seed));
  }
  io::save_cluster(cfg.cluster_dir, *cluster, payload_bytes);
  nlohmann::json summary{{"cluster", cfg.cluster_dir},
                         {"code", code->descriptor()},
                         {"n", params.n},
                         {"k", params.k},
                         {"alpha", params.alpha},
                         {"m", params.m},
                         {"b", params.sub_stripes},
                         {"s", params.query_cols},
                         {"file_symbols", params.file_symbols},
                         {"payload_bytes", payload_bytes}};
  std::cout << summary.dump() << "\n";
  return kExitOk;
}

int cmd_retrieve(RunConfig cfg) {
  auto loaded = io::load_cluster(cfg.cluster_dir);
  const pir::SystemParams& params = loaded.cluster.params();
  if (cfg.theta < 0 || cfg.theta >= params.m)
    throw DataError("retrieve: theta " + std::to_string(cfg.theta) + " out of range [0, " +
                    std::to_string(params.m) + ")");
  std::pair<pir::FileMatrix, sim::SessionReport> result = [&] {
    if (!cfg.query.empty())
      return loaded.cluster.retrieve_with_query(cfg.theta, parse_query_arg(cfg.query, params));
    std::mt19937_64 rng(cfg.seed);
    return loaded.cluster.retrieve(cfg.theta, rng);
  }();
  if (!cfg.out.empty()) {
    const auto bytes = loaded.cluster.file_bytes(result.first);
    io::write_file_atomic(cfg.out, bytes);
  }
  const std::string line = result.second.to_json_line() + "\n";
  if (!cfg.report_path.empty())
    io::write_file_atomic(cfg.report_path, std::span(reinterpret_cast<const std::uint8_t*>(line.data()),
                                                     line.size()));
  std::cout << line;
  return kExitOk;
}

int cmd_bench_rate(RunConfig cfg) {
  auto code = make_code(cfg);
  pir::SystemParams params = pir::derive_params(cfg.n, cfg.k, cfg.alpha, cfg.m, code);
  const analysis::Rational capacity = analysis::capacity_mds(cfg.n, cfg.k, cfg.m);

  analysis::Rational rate;
  if (cfg.mode == "exhaustive") {
    const analysis::Rational mean = analysis::exhaustive_mean_download(params, cfg.max_omega);
    rate = analysis::empirical_rate(analysis::Rational(params.file_symbols), mean);
  } else if (cfg.mode == "monte-carlo") {
    sim::Cluster cluster = sim::Cluster::random(params, cfg.seed);
    std::mt19937_64 rng(cfg.seed + 1);
    std::uint64_t total = 0;
    for (long i = 0; i < cfg.sessions; ++i) {
      const int theta = static_cast<int>(uniform_below(rng, static_cast<std::uint64_t>(params.m)));
      total += static_cast<std::uint64_t>(cluster.retrieve(theta, rng).second.total_symbols);
    }
    rate = analysis::empirical_rate(
        analysis::Rational(params.file_symbols) * cfg.sessions, analysis::Rational(total));
  } else {
    throw std::invalid_argument("--mode must be exhaustive or monte-carlo");
  }

  std::ostringstream csv;
  csv << "N,K,M,empirical_rate,capacity,mode\n";
  csv << cfg.n << ',' << cfg.k << ',' << cfg.m << ',' << analysis::rational_str(rate) << ','
      << analysis::rational_str(capacity) << ',' << cfg.mode << '\n';
  write_text(cfg.out, csv.str());
  return kExitOk;
}

int cmd_compare(RunConfig cfg) {
  std::string csv;
  if (cfg.sweep.rfind("fig", 0) == 0) {
    const int figure = std::stoi(cfg.sweep.substr(3));
    csv = analysis::figure_csv(figure);
  } else if (cfg.sweep == "point" || cfg.sweep.empty()) {
    csv = analysis::table_csv(cfg.n, cfg.k, cfg.m, cfg.s_factor);
  } else {
    throw std::invalid_argument("--sweep must be fig1..fig8 or point");
  }
  write_text(cfg.out, csv);
  return kExitOk;
}

int cmd_repair(RunConfig cfg) {
  if (cfg.failed < 0) throw std::invalid_argument("repair: --failed required");
  auto loaded = io::load_cluster(cfg.cluster_dir, cfg.failed);
  std::vector<int> helpers = cfg.helpers.empty() ? std::vector<int>{} : parse_int_list(cfg.helpers);
  const sim::RepairReport report = loaded.cluster.repair_server(cfg.failed, helpers);
  io::save_cluster(cfg.cluster_dir, loaded.cluster, loaded.payload_bytes);
  std::cout << report.to_json().dump() << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"private retrieval over MDS array coded storage"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto add_code_opts = [&](CLI::App* sub) {
    sub->add_option("--n", cfg.n, "total servers");
    sub->add_option("--k", cfg.k, "data columns");
    sub->add_option("--alpha", cfg.alpha, "symbols per block");
    sub->add_option("--m", cfg.m, "file count");
    sub->add_option("--code", cfg.code_family, "code family: stacked-rs | evenodd");
    sub->add_option("--w", cfg.width, "field width for stacked-rs");
    sub->add_option("--p", cfg.prime, "prime for evenodd");
    sub->add_option("--seed", cfg.seed, "RNG seed");
  };

  CLI::App* enc = app.add_subcommand("encode", "encode files into a cluster snapshot");
  add_code_opts(enc);
  enc->add_option("--input", cfg.input, "payload file (omitted: random data from seed)");
  enc->add_option("--out", cfg.cluster_dir, "snapshot directory")->required();

  CLI::App* ret = app.add_subcommand("retrieve", "privately retrieve one file");
  ret->add_option("--cluster", cfg.cluster_dir, "snapshot directory")->required();
  ret->add_option("--theta", cfg.theta, "file index to retrieve")->required();
  ret->add_option("--seed", cfg.seed, "RNG seed");
  ret->add_option("--query", cfg.query, "force a query matrix, rows ';'-separated: \"0,2,4;1,3,0\"");
  ret->add_option("--out", cfg.out, "write the decoded file payload here");
  ret->add_option("--report", cfg.report_path, "also write the session report here");

  CLI::App* bench = app.add_subcommand("bench-rate", "empirical retrieval rate vs capacity");
  add_code_opts(bench);
  bench->add_option("--mode", cfg.mode, "exhaustive | monte-carlo");
  bench->add_option("--sessions", cfg.sessions, "monte-carlo session count");
  bench->add_option("--max-omega", cfg.max_omega, "exhaustive enumeration cap");
  bench->add_option("--out", cfg.out, "CSV output path (default stdout)");

  CLI::App* cmp = app.add_subcommand("compare", "protocol comparison tables and figure data");
  cmp->add_option("--n", cfg.n, "total servers (point mode)");
  cmp->add_option("--k", cfg.k, "data columns (point mode)");
  cmp->add_option("--m", cfg.m, "file count (point mode)");
  cmp->add_option("--s", cfg.s_factor, "grouping factor s (point mode, 0 = none)");
  cmp->add_option("--sweep", cfg.sweep, "point | fig1..fig8");
  cmp->add_option("--out", cfg.out, "CSV output path (default stdout)");

  CLI::App* rep = app.add_subcommand("repair", "rebuild a failed server in a snapshot");
  rep->add_option("--cluster", cfg.cluster_dir, "snapshot directory")->required();
  rep->add_option("--failed", cfg.failed, "server index to rebuild")->required();
  rep->add_option("--helpers", cfg.helpers, "helper servers, comma-separated (default: all others)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (enc->parsed()) return cmd_encode(cfg);
    if (ret->parsed()) return cmd_retrieve(cfg);
    if (bench->parsed()) return cmd_bench_rate(cfg);
    if (cmp->parsed()) return cmd_compare(cfg);
    if (rep->parsed()) return cmd_repair(cfg);
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
