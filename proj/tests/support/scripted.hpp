#pragma once

// Test-only denoisers with fully scripted outputs.

#include <cmath>
#include <cstddef>
#include <vector>

#include "warmdiff/core.hpp"
#include "warmdiff/denoiser.hpp"

namespace warmdiff::testkit {

/// Logits are quantized hashes of (seed, whole token state, position, token),
/// so they depend on the revealed context and produce frequent exact ties.
class HashedDenoiser {
 public:
  HashedDenoiser(std::uint64_t seed, int levels = 4) : seed_(seed), levels_(levels) {}

  LogitMatrix denoise(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    std::uint64_t h = seed_;
    for (TokenId t : state.tokens) h = detail::splitmix64(h ^ static_cast<std::uint64_t>(t + 1));
    LogitMatrix logits(state.length(), state.vocab.size());
    for (std::size_t i = 0; i < state.length(); ++i) {
      for (std::size_t v = 0; v < state.vocab.size(); ++v) {
        const auto q = detail::splitmix64(h ^ (i * 131 + v * 7 + 1)) % static_cast<std::uint64_t>(levels_);
        logits(i, v) = 1.5 * static_cast<double>(q);
      }
    }
    return logits;
  }

 private:
  std::uint64_t seed_;
  int levels_;
};

/// Per-iteration probability tables: call with state.iteration = k uses
/// tables[k - 1] (clamped to the last table). Logits are ln(p).
class TableDenoiser {
 public:
  explicit TableDenoiser(std::vector<Matrix> tables) : tables_(std::move(tables)) {}

  LogitMatrix denoise(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    const std::size_t idx = std::min(tables_.size() - 1, state.iteration == 0 ? 0 : state.iteration - 1);
    const Matrix& p = tables_[idx];
    LogitMatrix logits(p.rows(), p.cols());
    for (std::size_t i = 0; i < p.rows(); ++i) {
      for (std::size_t v = 0; v < p.cols(); ++v) logits(i, v) = std::log(p(i, v));
    }
    return logits;
  }

 private:
  std::vector<Matrix> tables_;
};

/// Uniform logits everywhere: every confidence is 1/V.
struct FlatDenoiser {
  LogitMatrix denoise(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    return LogitMatrix(state.length(), state.vocab.size(), 0.0);
  }
};

inline Matrix rows_of(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.begin()->size());
  std::size_t r = 0;
  for (const auto& row : rows) {
    std::size_t c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

}  // namespace warmdiff::testkit
