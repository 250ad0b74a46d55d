#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "warmdiff/core.hpp"
#include "warmdiff/proposal.hpp"

namespace warmdiff {

enum class WarmMethod { None, TokenInjection, EmbeddingInterpolation };
enum class OverridePersistence { FirstIteration, WhileMasked };

inline const char* to_string(WarmMethod m) {
  switch (m) {
    case WarmMethod::None: return "none";
    case WarmMethod::TokenInjection: return "token-injection";
    case WarmMethod::EmbeddingInterpolation: return "embedding-interpolation";
  }
  return "none";
}

inline const char* to_string(OverridePersistence p) {
  return p == OverridePersistence::FirstIteration ? "first-iteration" : "while-masked";
}

struct WarmStartConfig {
  WarmMethod method = WarmMethod::None;
  double rho = 0.25;    // injection rate (method 1) / prior-keep probability (method 2)
  double alpha = 0.6;   // interpolation weight, method 2 only
  OverridePersistence override_persistence = OverridePersistence::WhileMasked;

  void validate() const {
    if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::Config, "rho must lie in [0, 1]");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "alpha must lie in [0, 1]");
  }
};

/// Method 1: position i takes the proposal token when its "inject-gate" draw
/// falls below rho, and is recorded as injected; every other position is masked.
inline DiffusionState inject_tokens(const Proposal& proposal, Vocabulary vocab, double rho,
                                    const DeterministicRng& rng) {
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::Config, "rho must lie in [0, 1]");
  auto state = all_mask_init(proposal.tokens.size(), vocab);
  for (std::size_t i = 0; i < proposal.tokens.size(); ++i) {
    if (!vocab.is_real(proposal.tokens[i])) throw Error(ErrorKind::OutOfVocabulary, "proposal contains non-real token");
    if (rng.draw("inject-gate", i, 0) < rho) {
      state.tokens[i] = proposal.tokens[i];
      state.injected.insert(i);
    }
  }
  return state;
}

/// Method 2: per position, (1 - alpha) * e_mask + alpha * Emb(proposal_i),
/// kept when the "embed-drop" draw falls below rho and replaced by e_mask otherwise.
inline Matrix interpolate_embeddings(const Proposal& proposal, const EmbeddingTable& table, double alpha,
                                     double rho, const DeterministicRng& rng) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorKind::Config, "alpha must lie in [0, 1]");
  if (!(rho >= 0.0 && rho <= 1.0)) throw Error(ErrorKind::Config, "rho must lie in [0, 1]");
  const std::size_t n = proposal.tokens.size();
  const std::size_t d = table.dim();
  const auto mask = table.mask_row();
  Matrix out(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto row = out.row(i);
    const bool keep = rng.draw("embed-drop", i, 0) < rho;
    if (!keep || alpha == 0.0) {
      std::copy(mask.begin(), mask.end(), row.begin());
      continue;
    }
    const auto target = embed_lookup(table, proposal.tokens[i]);
    for (std::size_t c = 0; c < d; ++c) row[c] = (1.0 - alpha) * mask[c] + alpha * target[c];
  }
  return out;
}

/// The warm initialization operator: dispatches on cfg.method.
inline DiffusionState warm_init(const Proposal& proposal, const EmbeddingTable& table,
                                const WarmStartConfig& cfg, const DeterministicRng& rng) {
  cfg.validate();
  const Vocabulary vocab = table.vocab();
  switch (cfg.method) {
    case WarmMethod::None:
      return all_mask_init(proposal.tokens.size(), vocab);
    case WarmMethod::TokenInjection:
      return inject_tokens(proposal, vocab, cfg.rho, rng);
    case WarmMethod::EmbeddingInterpolation: {
      auto state = all_mask_init(proposal.tokens.size(), vocab);
      state.embedding_override = interpolate_embeddings(proposal, table, cfg.alpha, cfg.rho, rng);
      return state;
    }
  }
  throw Error(ErrorKind::Config, "unknown warm-start method");
}

}  // namespace warmdiff
