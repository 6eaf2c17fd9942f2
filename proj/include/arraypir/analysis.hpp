#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "arraypir/pir.hpp"

namespace arraypir::analysis {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline BigInt ipow(BigInt base, unsigned exp) {
  BigInt out = 1;
  while (exp) {
    if (exp & 1) out *= base;
    base *= base;
    exp >>= 1;
  }
  return out;
}

inline Rational rpow(const Rational& base, unsigned exp) {
  Rational out = 1;
  Rational b = base;
  unsigned e = exp;
  while (e) {
    if (e & 1) out *= b;
    b *= b;
    e >>= 1;
  }
  return out;
}

// ---- capacities and regenerating-code parameters ---------------------------

inline Rational capacity_replicated(int n, int m) {
  if (n < 1 || m < 1) throw std::invalid_argument("capacity_replicated: need N, M >= 1");
  Rational sum = 0;
  Rational term = 1;
  const Rational ratio(1, n);
  for (int i = 0; i < m; ++i) {
    sum += term;
    term *= ratio;
  }
  return 1 / sum;
}

inline Rational capacity_mds(int n, int k, int m) {
  if (k < 1 || k >= n) throw std::invalid_argument("capacity_mds: need 1 <= K < N");
  if (m < 1) throw std::invalid_argument("capacity_mds: need M >= 1");
  Rational sum = 0;
  Rational term = 1;
  const Rational ratio(k, n);
  for (int i = 0; i < m; ++i) {
    sum += term;
    term *= ratio;
  }
  return 1 / sum;
}

struct TheoryInputs {
  int n = 0;
  int k = 0;
  int m = 1;
  int d = 0;        // repair degree
  int s = 0;        // grouping factor, 0 = none chosen
  Rational total_size = 0;  // symbols stored across the system

  void validate() const {
    if (k < 1 || n <= k) throw std::invalid_argument("TheoryInputs: need 0 < K < N");
    if (d < k || d > n - 1) throw std::invalid_argument("TheoryInputs: need K <= D <= N-1");
    if (total_size <= 0) throw std::invalid_argument("TheoryInputs: total size must be positive");
    if (s != 0 && (s < 2 || n % s != 0 || n / s <= n - k))
      throw std::invalid_argument("TheoryInputs: s must divide N with s >= 2 and N/s > N-K");
  }
};

struct MsrMbrParams {
  Rational alpha_msr;
  Rational gamma_msr;
  Rational alpha_mbr;
  Rational gamma_mbr;
};

// Minimum node capacity / repair bandwidth at the two extreme points of the
// storage-bandwidth tradeoff, for file size total_size and repair degree d.
inline MsrMbrParams msr_mbr_params(const Rational& total_size, int k, int d) {
  if (k < 1) throw std::invalid_argument("msr_mbr_params: need K >= 1");
  if (d < k) throw std::invalid_argument("msr_mbr_params: need D >= K");
  if (total_size <= 0) throw std::invalid_argument("msr_mbr_params: total size must be positive");
  MsrMbrParams out;
  out.alpha_msr = total_size / k;
  out.gamma_msr = total_size * d / (Rational(k) * (d - k + 1));
  out.alpha_mbr = 2 * total_size * d / (Rational(2) * k * d - Rational(k) * k + k);
  out.gamma_mbr = out.alpha_mbr;
  return out;
}

inline MsrMbrParams msr_mbr_params(const TheoryInputs& in) {
  in.validate();
  return msr_mbr_params(in.total_size, in.k, in.d);
}

// Expected total download per retrieval: alpha * S * N * (1 - (K/N)^M).
inline Rational expected_download(int n, int k, int m, int alpha) {
  if (k < 1 || n <= k) throw std::invalid_argument("expected_download: need 0 < K < N");
  if (m < 1 || alpha < 1) throw std::invalid_argument("expected_download: need M, alpha >= 1");
  const int s = k / std::gcd(n, k);
  return Rational(alpha) * s * n * (1 - rpow(Rational(k, n), static_cast<unsigned>(m)));
}

inline Rational empirical_rate(const Rational& file_symbols, const Rational& mean_download) {
  if (mean_download <= 0) throw std::invalid_argument("empirical_rate: download must be positive");
  return file_symbols / mean_download;
}

// Exact mean of the total response length over the whole query space,
// computed by enumeration. The heavy-side oracle for expected_download.
inline Rational exhaustive_mean_download(const pir::SystemParams& p,
                                         std::uint64_t enumeration_cap = 1'000'000) {
  const std::uint64_t size = pir::query_space_size(p);
  if (size > enumeration_cap)
    throw std::length_error("exhaustive_mean_download: query space of size " + std::to_string(size) +
                            " exceeds cap " + std::to_string(enumeration_cap));
  BigInt total = 0;
  pir::for_each_query_matrix(p, [&](const pir::QueryMatrix& q) {
    for (int i = 0; i < p.n; ++i)
      total += pir::response_length(pir::build_server_query(q, 0, i, p), p);
  });
  return Rational(total, BigInt(size));
}

// ---- the eight-protocol comparison ------------------------------------------

struct ProtocolRow {
  int index = 0;            // 1..8, the conventional row order
  std::string name;
  bool applicable = false;
  std::string constraint;   // textual applicability condition
  BigInt sub_packetization; // L
  BigInt min_field_size;    // smallest admissible field order
  Rational gamma_ratio;     // repair bandwidth over the optimal value
  Rational rate;
};

inline const std::array<const char*, 9>& protocol_names() {
  static const std::array<const char*, 9> names = {
      "",
      "new-pm-msr",        // capacity-achieving, PM-MSR coded
      "new-binary-mds",    // capacity-achieving over GF(2), two parities
      "new-eps-msr",       // capacity-achieving, eps-MSR coded
      "new-optimal-alpha", // capacity-achieving, optimal node capacity
      "dorkson-pm-msr",
      "lavauzelle-pm-msr",
      "zhu-zhou",
      "banawan-ulukus",
  };
  return names;
}

// All eight rows of the protocol comparison at one parameter point. Rows whose
// applicability condition fails are emitted with applicable = false; their
// numeric fields are meaningless. Pass s = 0 when no grouping factor applies.
inline std::vector<ProtocolRow> comparison_table(int n, int k, int m, int s) {
  if (k < 1 || n <= k) throw std::invalid_argument("comparison_table: need 0 < K < N");
  if (m < 1) throw std::invalid_argument("comparison_table: need M >= 1");
  const int g = std::gcd(n, k);
  const BigInt base = BigInt(k) * (n - k) / g;  // gcd divides K, so this is exact
  const Rational cap = capacity_mds(n, k, m);
  const Rational gamma_trivial = Rational(BigInt(k) * (n - k), BigInt(n - 1));

  const bool half_rate_ok = n >= 2 * k - 1;
  const bool two_parities = (n - k) == 2;
  const bool s_ok = s >= 2 && s < n && n % s == 0 && n / s > n - k;
  const bool alpha4_ok = n % (n - k) == 0;

  std::vector<ProtocolRow> rows;
  auto push = [&](int index, bool applicable, const char* constraint, BigInt L, BigInt qmin,
                  Rational gamma, Rational rate) {
    ProtocolRow r;
    r.index = index;
    r.name = protocol_names()[static_cast<std::size_t>(index)];
    r.applicable = applicable;
    r.constraint = constraint;
    r.sub_packetization = std::move(L);
    r.min_field_size = std::move(qmin);
    r.gamma_ratio = std::move(gamma);
    r.rate = std::move(rate);
    rows.push_back(std::move(r));
  };

  push(1, half_rate_ok, "N >= 2K-1", BigInt(k - 1) * base, n + 1, 1, cap);
  push(2, two_parities, "N-K = 2", ipow(2, static_cast<unsigned>(k + 1)) * base, 2, 1, cap);
  {
    BigInt l3 = 0;
    Rational g3 = 0;
    if (s_ok) {
      l3 = ipow(n - k, static_cast<unsigned>(n / s - 1)) * base;
      g3 = 1 + Rational(BigInt(s - 1) * (n - k - 1), BigInt(n - 1));
    }
    push(3, s_ok, "s | N, s >= 2, N/s > N-K", std::move(l3), s_ok ? BigInt(s) * (n - k) + 1 : BigInt(0),
         std::move(g3), cap);
  }
  {
    BigInt l4 = alpha4_ok ? ipow(n - k, static_cast<unsigned>(n / (n - k))) * base : BigInt(0);
    push(4, alpha4_ok, "(N-K) | N", std::move(l4), n + 1, 1, cap);
  }
  push(5, half_rate_ok, "N >= 2K-1", BigInt(k - 1) * base, n + 1, 1, 1 - Rational(2 * k - 2, n));
  push(6, half_rate_ok, "N >= 2K-1", BigInt(k - 1) * base, n + 1, 1,
       1 - Rational(4 * k - 2, 3 * n - 2 * k + 4));
  push(7, true, "", base, n + 1, gamma_trivial, cap);
  push(8, true, "", BigInt(k) * ipow(n, static_cast<unsigned>(m)), n + 1, gamma_trivial, cap);
  return rows;
}

// ---- ordering checks ---------------------------------------------------------

struct OrderingCheck {
  std::string name;
  bool applicable = false;
  bool pass = false;
  std::string detail;
};

// Evaluates the claimed inequality chains among the eight protocols at one
// parameter point and reports, per chain, whether every link holds. Chains
// whose structural preconditions fail are reported as inapplicable rather
// than evaluated.
inline std::vector<OrderingCheck> ordering_checks(int n, int k, int m, int s) {
  const std::vector<ProtocolRow> rows = comparison_table(n, k, m, s);
  auto row = [&](int index) -> const ProtocolRow& { return rows[static_cast<std::size_t>(index - 1)]; };
  const Rational cap = capacity_mds(n, k, m);

  std::vector<OrderingCheck> checks;
  auto push = [&](const std::string& name, bool applicable, bool pass, const std::string& detail) {
    checks.push_back({name, applicable, applicable && pass, detail});
  };

  {  // rows with optimal repair all sit exactly at the bound
    bool any = false, pass = true;
    std::string bad;
    for (int i : {1, 2, 4, 5, 6})
      if (row(i).applicable) {
        any = true;
        if (row(i).gamma_ratio != 1) {
          pass = false;
          bad = row(i).name;
        }
      }
    push("gamma-optimal-rows-one", any, pass, pass ? "all equal 1" : bad + " != 1");
  }
  push("gamma-eps-above-one", row(3).applicable, row(3).applicable && row(3).gamma_ratio > 1,
       "1 < gamma(eps-msr)");
  push("gamma-eps-below-trivial", row(3).applicable,
       row(3).applicable && row(3).gamma_ratio < row(7).gamma_ratio, "gamma(eps-msr) < gamma(zhu-zhou)");
  push("gamma-trivial-equal", true, row(7).gamma_ratio == row(8).gamma_ratio,
       "gamma(zhu-zhou) = gamma(banawan-ulukus)");

  {  // capacity-achieving rows agree with the capacity, and beat rows 5 and 6
    bool pass = true;
    std::string bad;
    for (int i : {1, 2, 3, 4, 7, 8})
      if (row(i).applicable && row(i).rate != cap) {
        pass = false;
        bad = row(i).name;
      }
    push("rate-capacity-rows", true, pass, pass ? "all capacity-achieving rows equal capacity" : bad);
  }
  push("rate-improvement-chain", row(5).applicable,
       row(5).applicable && cap > row(6).rate && row(6).rate > row(5).rate,
       "capacity > rate(lavauzelle) > rate(dorkson)");

  {  // field-size ordering
    const bool app = row(2).applicable;
    bool pass = true;
    if (app)
      for (int i : {1, 4, 5, 6, 7, 8})
        if (row(i).applicable && row(2).min_field_size >= row(i).min_field_size) pass = false;
    push("field-binary-smallest", app, pass, "binary row needs the smallest field");
    const bool app23 = row(2).applicable && row(3).applicable;
    push("field-eps-between", app23,
         app23 && row(2).min_field_size < row(3).min_field_size &&
             row(3).min_field_size <= row(1).min_field_size,
         "q(binary) < q(eps-msr) <= q(pm-msr)");
  }

  const auto& L = [&](int i) -> const BigInt& { return row(i).sub_packetization; };
  {  // N-K = 2 sub-packetization chain
    const bool app = (n - k) == 2 && row(2).applicable && row(3).applicable && row(4).applicable &&
                     s >= 2 && s < n / 2;
    bool pass = app && L(7) < L(3) && L(3) <= L(4) && L(4) < L(2) && L(2) < L(8);
    push("subpack-chain-two-parities", app, pass, "L7 < L3 <= L4 < L2 < L8");
  }
  {  // 2 < N-K < K-1 chains
    const bool mid = 2 < (n - k) && (n - k) < k - 1;
    const bool app3 = mid && row(3).applicable;
    const bool app4 = mid && row(4).applicable;
    push("subpack-chain-mid-eps", app3, app3 && L(7) < L(3) && L(3) < L(8), "L7 < L3 < L8");
    push("subpack-chain-mid-alpha", app4, app4 && L(7) < L(4) && L(4) < L(8), "L7 < L4 < L8");
  }
  {  // N-K >= K-1 chain
    const bool app = (n - k) >= k - 1 && row(1).applicable && row(4).applicable;
    bool pass = app && L(7) < L(1) && L(1) == L(5) && L(5) == L(6) && L(6) < L(4) && L(4) < L(8);
    push("subpack-chain-wide", app, pass, "L7 < L1 = L5 = L6 < L4 < L8");
  }
  {  // tie-break conditions between the eps-msr and optimal-alpha rows
    const bool both = row(3).applicable && row(4).applicable;
    const Rational bound1 = Rational(BigInt(n) * (n - k), BigInt(2 * n - k));
    const Rational bound2 = Rational(k, n - k);
    const Rational sr = s;
    const bool cond_le = both && sr >= 2 && sr <= bound1 && sr <= bound2;
    push("subpack-l4-le-l3", cond_le, cond_le && L(4) <= L(3),
         "L4 <= L3 for small grouping factors");
    const bool cond_lt = both && (n - k) >= 2 && BigInt(n - k - 1) * (n - k - 1) < k + 1 &&
                         sr > bound1 && sr < Rational(n, n - k);
    push("subpack-l3-lt-l4", cond_lt, cond_lt && L(3) < L(4),
         "L3 < L4 for large grouping factors");
  }
  return checks;
}

// ---- figure sweeps -----------------------------------------------------------

struct SweepPoint {
  int n = 0, k = 0, m = 0, s = 0;
};

// Parameter grids behind the eight comparison figures: 1-4 sweep the
// sub-packetization, 5-8 the repair-bandwidth ratio, over the same four
// parameter families (two fixed parities; three fixed parities; rate 1/2;
// rate 2/3).
inline std::vector<SweepPoint> figure_grid(int figure) {
  std::vector<SweepPoint> points;
  switch (figure) {
    case 1:
    case 5:
      for (int n = 8; n <= 60; n += 4) points.push_back({n, n - 2, 30, n / 4});
      break;
    case 2:
    case 6:
      for (int n = 12; n <= 60; n += 6) points.push_back({n, n - 3, 30, n / 6});
      break;
    case 3:
    case 7:
      for (int n = 6; n <= 60; n += 2) points.push_back({n, n / 2, 30, 0});
      break;
    case 4:
    case 8:
      for (int n = 6; n <= 60; n += 6) points.push_back({n, 2 * n / 3, 30, 2});
      break;
    default:
      throw std::invalid_argument("figure_grid: figure must be 1..8");
  }
  return points;
}

inline std::string figure_csv(int figure) {
  const bool subpack = figure <= 4;
  std::ostringstream out;
  out << "N";
  for (int i = 1; i <= 8; ++i)
    out << ',' << (subpack ? "L" : "gamma") << i << '_' << protocol_names()[static_cast<std::size_t>(i)];
  out << '\n';
  for (const SweepPoint& pt : figure_grid(figure)) {
    const auto rows = comparison_table(pt.n, pt.k, pt.m, pt.s);
    out << pt.n;
    for (const ProtocolRow& r : rows) {
      out << ',';
      if (!r.applicable) {
        out << "NA";
      } else if (subpack) {
        out << r.sub_packetization;
      } else {
        out << static_cast<double>(boost::multiprecision::numerator(r.gamma_ratio)) /
                   static_cast<double>(boost::multiprecision::denominator(r.gamma_ratio));
      }
    }
    out << '\n';
  }
  return out.str();
}

// One-point comparison table as CSV.
inline std::string table_csv(int n, int k, int m, int s) {
  std::ostringstream out;
  out << "protocol,applicable,constraint,sub_packetization,min_field_size,gamma_ratio,rate\n";
  for (const ProtocolRow& r : comparison_table(n, k, m, s)) {
    out << r.name << ',' << (r.applicable ? "yes" : "no") << ',' << '"' << r.constraint << '"' << ',';
    if (r.applicable)
      out << r.sub_packetization << ',' << r.min_field_size << ',' << r.gamma_ratio << ',' << r.rate;
    else
      out << "NA,NA,NA,NA";
    out << '\n';
  }
  return out.str();
}

inline std::string rational_str(const Rational& r) {
  std::ostringstream out;
  out << r;
  return out.str();
}

}  // namespace arraypir::analysis
