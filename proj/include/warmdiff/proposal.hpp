#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "warmdiff/bigram.hpp"
#include "warmdiff/core.hpp"

namespace warmdiff {

enum class ProposalSource { CorruptedOracle, Markov };

inline const char* to_string(ProposalSource s) {
  return s == ProposalSource::CorruptedOracle ? "corrupted-oracle" : "markov";
}

/// A warm token sequence from an auxiliary generator. Never contains the mask id.
struct Proposal {
  std::vector<TokenId> tokens;
  ProposalSource source = ProposalSource::CorruptedOracle;
  double epsilon = 0.0;
};

/// Keeps each target token unless its "proposal-corrupt" draw falls below
/// epsilon, in which case a uniformly chosen different token replaces it.
/// The replacement is drawn from a separate stream, so the set of corrupted
/// positions grows monotonically with epsilon under a fixed seed.
inline Proposal propose_corrupted(std::span<const TokenId> target, Vocabulary vocab, double epsilon,
                                  const DeterministicRng& rng) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::Config, "epsilon must lie in [0, 1]");
  Proposal p{std::vector<TokenId>(target.begin(), target.end()), ProposalSource::CorruptedOracle, epsilon};
  const std::size_t v = vocab.size();
  for (std::size_t i = 0; i < p.tokens.size(); ++i) {
    if (!vocab.is_real(target[i])) throw Error(ErrorKind::OutOfVocabulary, "target contains non-real token");
    if (rng.draw("proposal-corrupt", i, 0) < epsilon) {
      // uniform over the V - 1 alternatives: skip over the target id
      auto alt = static_cast<TokenId>(rng.index("proposal-corrupt-alt", i, 0, v - 1));
      if (alt >= target[i]) ++alt;
      p.tokens[i] = alt;
    }
  }
  return p;
}

/// Left-to-right sample from the bigram chain: unigram start, then forward
/// transitions.
inline Proposal propose_markov(const BigramModel& model, std::size_t n, const DeterministicRng& rng,
                               std::string_view purpose = "proposal-markov") {
  model.require_fitted();
  if (n == 0) throw Error(ErrorKind::InvalidLength, "proposal length must be >= 1");
  Proposal p{std::vector<TokenId>(n), ProposalSource::Markov, 0.0};
  const auto start = model.unigram_row();
  p.tokens[0] = static_cast<TokenId>(rng.categorical(purpose, 0, 0, start));
  for (std::size_t i = 1; i < n; ++i) {
    const auto row = model.forward_row(p.tokens[i - 1]);
    p.tokens[i] = static_cast<TokenId>(rng.categorical(purpose, i, 0, row));
  }
  return p;
}

}  // namespace warmdiff
