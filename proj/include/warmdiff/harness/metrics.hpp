#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "warmdiff/core.hpp"
#include "warmdiff/stats.hpp"
#include "warmdiff/warmstart.hpp"

namespace warmdiff::harness {

inline void check_lengths(std::span<const TokenId> out, std::span<const TokenId> target) {
  if (out.size() != target.size()) throw Error(ErrorKind::Shape, "output and target lengths differ");
}

inline bool exact_match(std::span<const TokenId> out, std::span<const TokenId> target) {
  check_lengths(out, target);
  return std::equal(out.begin(), out.end(), target.begin());
}

inline double token_accuracy(std::span<const TokenId> out, std::span<const TokenId> target) {
  check_lengths(out, target);
  if (target.empty()) return 1.0;
  std::size_t hits = 0;
  for (std::size_t i = 0; i < out.size(); ++i) hits += out[i] == target[i] ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(target.size());
}

/// The sweep coordinates a run was produced under.
struct GridPoint {
  std::size_t grid_id = 0;
  WarmMethod method = WarmMethod::None;
  double rho = 0.0;
  double alpha = 0.0;
  double epsilon = 0.0;
  double tau = 0.0;
  double b0 = 0.0;
  double lambda = 0.0;
};

/// One CSV row.
struct RunRow {
  GridPoint point;
  std::size_t run = 0;
  std::uint64_t seed = 0;
  std::size_t nfe = 0;
  bool exact_match = false;
  double token_acc = 0.0;
  bool capped = false;
};

struct MetricsRecord {
  GridPoint point;
  double mean_nfe = 0.0;
  double std_nfe = 0.0;
  double exact_match_rate = 0.0;
  double mean_token_acc = 0.0;
  std::size_t capped_runs = 0;
  std::vector<RunRow> rows;
};

/// Aggregates are plain functions of the rows, independent of row order.
inline MetricsRecord aggregate(const GridPoint& point, std::vector<RunRow> rows) {
  MetricsRecord rec;
  rec.point = point;
  std::vector<double> nfe, exact, acc;
  for (const auto& r : rows) {
    nfe.push_back(static_cast<double>(r.nfe));
    exact.push_back(r.exact_match ? 1.0 : 0.0);
    acc.push_back(r.token_acc);
    rec.capped_runs += r.capped ? 1 : 0;
  }
  // sorted summation keeps aggregates bit-identical under any run order
  std::sort(nfe.begin(), nfe.end());
  std::sort(exact.begin(), exact.end());
  std::sort(acc.begin(), acc.end());
  rec.mean_nfe = stats::mean(nfe);
  rec.std_nfe = stats::sample_sd(nfe);
  rec.exact_match_rate = stats::mean(exact);
  rec.mean_token_acc = stats::mean(acc);
  rec.rows = std::move(rows);
  return rec;
}

}  // namespace warmdiff::harness
