#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "warmdiff/decoder.hpp"
#include "warmdiff/harness/runner.hpp"

namespace warmdiff::harness {

/// Checks the structural guarantees of one decode against its initial state:
/// progress, masked-count bookkeeping, termination bound, remask eligibility,
/// unmask-only behaviour of model-decoded tokens, and rate ranges.
/// Returns human-readable violations (empty when all hold).
inline std::vector<std::string> check_decode(const DiffusionState& init, const DecodeResult& result,
                                             std::size_t k_max) {
  std::vector<std::string> bad;
  const auto& trace = result.trace;
  const std::size_t n = init.length();
  const TokenId mask = init.vocab.mask_id();

  if (trace.nfe != trace.iterations.size()) bad.push_back("nfe differs from iteration count");
  if (trace.nfe > n + init.injected.size()) bad.push_back("iterations exceed n + |I|");
  if (trace.capped && k_max >= n + init.injected.size()) bad.push_back("capped although k_max >= n + |I|");

  std::vector<TokenId> tokens = init.tokens;
  std::set<std::size_t> injected = init.injected;
  std::set<std::size_t> ever_remasked;
  std::map<std::size_t, TokenId> model_decoded;
  std::size_t masked = init.masked_count();

  for (std::size_t idx = 0; idx < trace.iterations.size(); ++idx) {
    const auto& rec = trace.iterations[idx];
    const std::string at = "k=" + std::to_string(rec.k) + ": ";
    if (rec.k != idx + 1) bad.push_back(at + "iteration index out of sequence");
    if (rec.unmasked.empty()) bad.push_back(at + "no position unmasked");
    for (const auto& u : rec.unmasked) {
      if (u.pos >= n || tokens[u.pos] != mask) {
        bad.push_back(at + "unmasked a position that was not masked");
        continue;
      }
      if (!init.vocab.is_real(u.tok)) bad.push_back(at + "unmasked to a non-real token");
      if (!(u.conf >= 0.0 && u.conf <= 1.0)) bad.push_back(at + "confidence outside [0, 1]");
      tokens[u.pos] = u.tok;
      model_decoded[u.pos] = u.tok;
    }
    for (const auto& r : rec.remasked) {
      if (!(r.rate >= 0.0 && r.rate <= 1.0)) bad.push_back(at + "remask rate outside [0, 1]");
      if (!init.injected.contains(r.pos)) bad.push_back(at + "remasked a non-injected position");
      if (!injected.contains(r.pos)) bad.push_back(at + "remasked a position twice or after revocation");
      if (model_decoded.contains(r.pos)) bad.push_back(at + "remasked a model-decoded token");
      if (r.pos < n) tokens[r.pos] = mask;
      injected.erase(r.pos);
      ever_remasked.insert(r.pos);
    }
    masked = masked - rec.unmasked.size() + rec.remasked.size();
    if (rec.masked_after != masked) bad.push_back(at + "masked_after bookkeeping mismatch");
  }

  if (tokens != result.tokens) bad.push_back("replayed trace does not reproduce the final tokens");
  for (const auto& [pos, tok] : model_decoded) {
    if (result.tokens[pos] != tok) bad.push_back("model-decoded token at " + std::to_string(pos) + " changed");
  }
  const bool has_mask = std::find(result.tokens.begin(), result.tokens.end(), mask) != result.tokens.end();
  if (has_mask && !trace.capped) bad.push_back("mask token in final output without cap");
  return bad;
}

/// Runs every run of a config through check_decode plus run-level checks
/// (metric ranges, determinism of a repeated run, and the rho = 0 / method
/// none equivalence on the first run).
inline std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> bad;
  const Experiment exp(cfg);
  const std::size_t k_max = cfg.resolved_k_max();
  for (std::size_t r = 0; r < cfg.num_runs; ++r) {
    const auto out = exp.run(r);
    const std::string at = "run " + std::to_string(r) + ": ";
    for (const auto& v : check_decode(out.init, out.result, k_max)) bad.push_back(at + v);
    if (!(out.row.token_acc >= 0.0 && out.row.token_acc <= 1.0)) bad.push_back(at + "token accuracy outside [0, 1]");
    if (out.row.exact_match && out.row.token_acc != 1.0) bad.push_back(at + "exact match with token accuracy < 1");
    for (TokenId t : out.proposal.tokens) {
      if (!exp.table().vocab().is_real(t)) {
        bad.push_back(at + "proposal contains a non-real token");
        break;
      }
    }
  }

  const auto first = exp.run(0);
  const auto again = exp.run(0);
  if (!(first.result.trace == again.result.trace) || first.result.tokens != again.result.tokens) {
    bad.push_back("run 0 is not reproducible");
  }

  ExperimentConfig zero = cfg;
  zero.warm.method = WarmMethod::TokenInjection;
  zero.warm.rho = 0.0;
  ExperimentConfig none = cfg;
  none.warm.method = WarmMethod::None;
  const auto a = Experiment(zero, exp.bigram()).run(0);
  const auto b = Experiment(none, exp.bigram()).run(0);
  if (!(a.result.trace == b.result.trace) || a.result.tokens != b.result.tokens) {
    bad.push_back("token injection with rho = 0 differs from method none");
  }
  return bad;
}

}  // namespace warmdiff::harness
