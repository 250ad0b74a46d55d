#pragma once

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "warmdiff/core.hpp"
#include "warmdiff/denoiser.hpp"
#include "warmdiff/warmstart.hpp"

namespace warmdiff {

struct DecodeConfig {
  double tau = 0.9;
  bool remask_enabled = false;
  double b0 = 0.5;
  double lambda = 0.05;
  std::size_t k_max = 4096;

  void validate() const {
    if (!(tau > 0.0 && tau <= 1.0)) throw Error(ErrorKind::Config, "tau must lie in (0, 1]");
    if (!(b0 > 0.0) || !std::isfinite(b0)) throw Error(ErrorKind::Config, "b0 must be positive");
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw Error(ErrorKind::Config, "lambda must be positive");
    if (k_max == 0) throw Error(ErrorKind::Config, "k_max must be positive");
  }
};

struct UnmaskEvent {
  std::size_t pos;
  TokenId tok;
  double conf;
  bool operator==(const UnmaskEvent&) const = default;
};

struct RemaskEvent {
  std::size_t pos;
  double rate;
  bool operator==(const RemaskEvent&) const = default;
};

struct IterationRecord {
  std::size_t k = 0;
  std::vector<UnmaskEvent> unmasked;
  std::vector<RemaskEvent> remasked;
  std::size_t masked_after = 0;
  bool operator==(const IterationRecord&) const = default;
};

struct DecodeTrace {
  std::vector<IterationRecord> iterations;
  std::size_t nfe = 0;
  bool capped = false;
  std::size_t initial_injected = 0;
  std::size_t initial_masked = 0;
  std::vector<std::string> warnings;
  bool operator==(const DecodeTrace&) const = default;
};

struct DecodeResult {
  std::vector<TokenId> tokens;
  DecodeTrace trace;
};

/// Masked positions score max_v pi_i(v); fixed positions score the
/// probability of the token they currently hold.
inline std::vector<double> confidences(const Matrix& pi, const DiffusionState& state) {
  if (pi.rows() != state.length() || pi.cols() != state.vocab.size()) {
    throw Error(ErrorKind::Shape, "probability matrix must be n x V");
  }
  std::vector<double> conf(state.length());
  for (std::size_t i = 0; i < state.length(); ++i) {
    const auto row = pi.row(i);
    conf[i] = state.is_masked(i) ? *std::max_element(row.begin(), row.end())
                                 : row[static_cast<std::size_t>(state.tokens[i])];
  }
  return conf;
}

/// Argmax token and its probability for every masked position, in position order.
inline std::vector<UnmaskEvent> masked_candidates(const Matrix& pi, const DiffusionState& state) {
  std::vector<UnmaskEvent> out;
  for (std::size_t i = 0; i < state.length(); ++i) {
    if (!state.is_masked(i)) continue;
    const auto row = pi.row(i);
    const auto best = std::max_element(row.begin(), row.end());  // first maximum
    out.push_back({i, static_cast<TokenId>(best - row.begin()), *best});
  }
  return out;
}

/// Every candidate with confidence strictly above tau; if there is none, the
/// single most confident candidate (lowest position on ties).
inline std::vector<UnmaskEvent> select_unmask(std::span<const UnmaskEvent> masked, double tau) {
  if (masked.empty()) throw Error(ErrorKind::Precondition, "select_unmask needs at least one masked position");
  std::vector<UnmaskEvent> chosen;
  for (const auto& c : masked) {
    if (c.conf > tau) chosen.push_back(c);
  }
  if (chosen.empty()) {
    const UnmaskEvent* best = &masked.front();
    for (const auto& c : masked) {
      if (c.conf > best->conf || (c.conf == best->conf && c.pos < best->pos)) best = &c;
    }
    chosen.push_back(*best);
  }
  return chosen;
}

/// clip((1 - c_bar) + b0 - lambda * k, 0, 1) per position.
inline std::vector<double> remask_rates(std::span<const double> c_bar, std::size_t k, double b0, double lambda) {
  const double bias = b0 - lambda * static_cast<double>(k);
  std::vector<double> rates(c_bar.size());
  for (std::size_t i = 0; i < c_bar.size(); ++i) {
    rates[i] = std::min(1.0, std::max(0.0, (1.0 - c_bar[i]) + bias));
  }
  return rates;
}

/// Samples remask decisions for eligible injected positions. A remasked
/// position is masked again and leaves the injected set for good. Returns
/// the positions actually remasked.
inline std::vector<RemaskEvent> apply_remask(DiffusionState& state, std::span<const RemaskEvent> eligible,
                                             const DeterministicRng& rng, std::size_t k) {
  std::vector<RemaskEvent> remasked;
  for (const auto& e : eligible) {
    if (e.pos >= state.length() || !state.injected.contains(e.pos) || state.is_masked(e.pos)) {
      throw Error(ErrorKind::Precondition,
                  "position " + std::to_string(e.pos) + " is not an unrevoked injected token");
    }
    if (rng.draw("remask", e.pos, k) < e.rate) {
      state.tokens[e.pos] = state.vocab.mask_id();
      state.injected.erase(e.pos);
      remasked.push_back(e);
    }
  }
  return remasked;
}

/// Confidence-threshold parallel decoding with optional remasking of injected
/// tokens. The first denoiser call is iteration k = 1. Each iteration calls
/// the denoiser once, unmasks at least one position, and then (if enabled)
/// revisits the injected set using the same iteration's probabilities.
/// Hitting k_max with masked positions left sets trace.capped.
template <Denoiser D>
DecodeResult decode(const D& denoiser, const DenoiseContext& ctx, DiffusionState state,
                    const DecodeConfig& dcfg, const WarmStartConfig& wcfg, const DeterministicRng& rng) {
  dcfg.validate();
  check_shape(state, ctx);
  const std::size_t n = state.length();

  DecodeTrace trace;
  trace.initial_injected = state.injected.size();
  trace.initial_masked = state.masked_count();
  if (dcfg.k_max < n + state.injected.size()) {
    trace.warnings.push_back("k_max " + std::to_string(dcfg.k_max) + " < n + |I| = " +
                             std::to_string(n + state.injected.size()) + "; decode may be capped");
  }

  std::size_t masked = trace.initial_masked;
  std::size_t k = 0;
  while (masked > 0) {
    if (k >= dcfg.k_max) {
      trace.capped = true;
      break;
    }
    ++k;
    if (wcfg.override_persistence == OverridePersistence::FirstIteration && k > 1) {
      state.embedding_override.reset();
    }
    state.iteration = k;

    const LogitMatrix logits = denoiser.denoise(state, ctx);
    ++trace.nfe;
    if (logits.rows() != n || logits.cols() != state.vocab.size()) {
      throw Error(ErrorKind::Shape, "denoiser returned a logit matrix of the wrong shape");
    }
    const Matrix pi = softmax_rows(logits);

    IterationRecord rec;
    rec.k = k;
    rec.unmasked = select_unmask(masked_candidates(pi, state), dcfg.tau);
    for (const auto& u : rec.unmasked) state.tokens[u.pos] = u.tok;

    if (dcfg.remask_enabled && !state.injected.empty()) {
      const auto conf = confidences(pi, state);
      std::vector<double> c_bar;
      std::vector<RemaskEvent> eligible;
      for (std::size_t pos : state.injected) {
        c_bar.push_back(conf[pos]);
        eligible.push_back({pos, 0.0});
      }
      const auto rates = remask_rates(c_bar, k, dcfg.b0, dcfg.lambda);
      for (std::size_t j = 0; j < eligible.size(); ++j) eligible[j].rate = rates[j];
      rec.remasked = apply_remask(state, eligible, rng, k);
    }

    masked = masked - rec.unmasked.size() + rec.remasked.size();
    rec.masked_after = masked;
    trace.iterations.push_back(std::move(rec));
  }
  return {state.tokens, std::move(trace)};
}

}  // namespace warmdiff
