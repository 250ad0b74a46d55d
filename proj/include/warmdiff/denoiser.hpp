#pragma once

#include <cmath>
#include <concepts>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "warmdiff/bigram.hpp"
#include "warmdiff/core.hpp"

namespace warmdiff {

/// Conditioning for a denoiser call. The planted target stands in for the
/// answer a real prompt would determine.
struct DenoiseContext {
  std::vector<TokenId> target;

  DenoiseContext(std::vector<TokenId> target_tokens, const Vocabulary& vocab)
      : target(std::move(target_tokens)) {
    for (TokenId t : target) {
      if (!vocab.is_real(t)) throw Error(ErrorKind::OutOfVocabulary, "target must contain real tokens only");
    }
  }
};

/// A reverse model: full n x V logits for every position, masked or fixed.
/// Implementations must be pure functions of (state, ctx).
template <class D>
concept Denoiser = requires(const D& d, const DiffusionState& state, const DenoiseContext& ctx) {
  { d.denoise(state, ctx) } -> std::same_as<LogitMatrix>;
};

inline void check_shape(const DiffusionState& state, const DenoiseContext& ctx) {
  if (state.tokens.size() != ctx.target.size()) {
    throw Error(ErrorKind::Shape, "state length " + std::to_string(state.tokens.size()) +
                                      " != target length " + std::to_string(ctx.target.size()));
  }
  if (state.embedding_override && state.embedding_override->rows() != state.tokens.size()) {
    throw Error(ErrorKind::Shape, "embedding override length does not match state length");
  }
}

/// Cosine similarity; 0 when either vector is all zeros.
inline double cosine(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

enum class OracleMode { Faithful, Credulous };

struct NoisyOracleParams {
  double c0 = 0.4;
  double gamma = 0.6;
  double eta = 0.0;
  double c_max = 0.99;
  OracleMode mode = OracleMode::Faithful;
  std::size_t window = 3;

  void validate() const {
    if (!(c0 >= 0.0 && c0 <= 1.0)) throw Error(ErrorKind::Config, "c0 must lie in [0, 1]");
    if (!(gamma >= 0.0)) throw Error(ErrorKind::Config, "gamma must be >= 0");
    if (!(eta >= 0.0)) throw Error(ErrorKind::Config, "eta must be >= 0");
    if (!(c_max > 0.0 && c_max <= 1.0 && c_max >= c0)) {
      throw Error(ErrorKind::Config, "c_max must lie in [c0, 1] and be positive");
    }
    if (window == 0 || window % 2 == 0) throw Error(ErrorKind::Config, "window must be an odd positive integer");
  }
};

/// Synthetic reverse model whose confidence grows with revealed context.
///
/// Faithful mode counts only correctly revealed tokens as context and always
/// predicts the target. Credulous mode counts any revealed token and predicts
/// the distractor (target + 1) mod V when most revealed neighbours inside the
/// window disagree with the target. Under an embedding override, a masked
/// position's confidence moves by eta times the cosine gain of its override
/// over the mask embedding, measured against the target token's embedding.
class NoisyOracle {
 public:
  static constexpr double kProbFloor = 1e-12;

  explicit NoisyOracle(NoisyOracleParams params, std::optional<EmbeddingTable> table = std::nullopt)
      : params_(params), table_(std::move(table)) {
    params_.validate();
  }

  const NoisyOracleParams& params() const { return params_; }

  /// Per-position probability placed on the intended token.
  std::vector<double> confidences(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    const std::size_t n = state.length();
    std::size_t context = 0;
    for (std::size_t i = 0; i < n; ++i) {
      if (state.is_masked(i)) continue;
      if (params_.mode == OracleMode::Credulous || state.tokens[i] == ctx.target[i]) ++context;
    }
    const double f = static_cast<double>(context) / static_cast<double>(n);
    const double base = std::min(params_.c_max, params_.c0 + params_.gamma * f);

    std::vector<double> conf(n, base);
    if (state.embedding_override) {
      if (!table_) throw Error(ErrorKind::Precondition, "embedding override needs an embedding table");
      const auto mask_row = table_->mask_row();
      for (std::size_t i = 0; i < n; ++i) {
        if (!state.is_masked(i)) continue;
        const auto target_row = embed_lookup(*table_, ctx.target[i]);
        const double gain =
            cosine(state.embedding_override->row(i), target_row) - cosine(mask_row, target_row);
        conf[i] = std::min(params_.c_max, std::max(0.0, base + params_.eta * gain));
      }
    }
    return conf;
  }

  /// Token the model currently believes in at each position.
  std::vector<TokenId> intended(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    const std::size_t n = state.length();
    const auto v = static_cast<TokenId>(state.vocab.size());
    std::vector<TokenId> out(ctx.target);
    if (params_.mode == OracleMode::Faithful) return out;
    const std::size_t half = params_.window / 2;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t revealed = 0, wrong = 0;
      const std::size_t lo = i >= half ? i - half : 0;
      const std::size_t hi = std::min(n - 1, i + half);
      for (std::size_t j = lo; j <= hi; ++j) {
        if (j == i || state.is_masked(j)) continue;
        ++revealed;
        if (state.tokens[j] != ctx.target[j]) ++wrong;
      }
      if (2 * wrong > revealed) out[i] = (ctx.target[i] + 1) % v;
    }
    return out;
  }

  LogitMatrix denoise(const DiffusionState& state, const DenoiseContext& ctx) const {
    const std::size_t vsize = state.vocab.size();
    if (vsize < 2) throw Error(ErrorKind::Config, "noisy oracle needs V >= 2");
    const auto conf = confidences(state, ctx);
    const auto want = intended(state, ctx);
    LogitMatrix logits(state.length(), vsize);
    for (std::size_t i = 0; i < state.length(); ++i) {
      const double rest = std::log(std::max(kProbFloor, (1.0 - conf[i]) / static_cast<double>(vsize - 1)));
      auto row = logits.row(i);
      std::fill(row.begin(), row.end(), rest);
      row[static_cast<std::size_t>(want[i])] = std::log(std::max(kProbFloor, conf[i]));
    }
    return logits;
  }

 private:
  NoisyOracleParams params_;
  std::optional<EmbeddingTable> table_;
};

/// Bidirectional bigram reverse model: each position mixes the forward
/// distribution after its nearest revealed left neighbour with the reverse
/// distribution before its nearest revealed right neighbour. A side with no
/// revealed token contributes the unigram distribution.
class MarkovDenoiser {
 public:
  explicit MarkovDenoiser(BigramModel model) : model_(std::move(model)) {}

  const BigramModel& model() const { return model_; }

  LogitMatrix denoise(const DiffusionState& state, const DenoiseContext& ctx) const {
    check_shape(state, ctx);
    model_.require_fitted();
    if (!(state.vocab == model_.vocab())) throw Error(ErrorKind::Shape, "vocabulary mismatch with bigram model");
    const std::size_t n = state.length();
    const std::size_t v = state.vocab.size();
    const TokenId none = state.vocab.mask_id();

    // nearest revealed token strictly left / right of each position
    std::vector<TokenId> left(n, none), right(n, none);
    for (std::size_t i = 1; i < n; ++i) left[i] = state.is_masked(i - 1) ? left[i - 1] : state.tokens[i - 1];
    for (std::size_t i = n - 1; i-- > 0;) right[i] = state.is_masked(i + 1) ? right[i + 1] : state.tokens[i + 1];

    LogitMatrix logits(n, v);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t b = 0; b < v; ++b) {
        const auto tok = static_cast<TokenId>(b);
        const double lp = left[i] == none ? model_.unigram(tok) : model_.forward(left[i], tok);
        const double rp = right[i] == none ? model_.unigram(tok) : model_.reverse(tok, right[i]);
        logits(i, b) = std::log(0.5 * lp + 0.5 * rp);
      }
    }
    return logits;
  }

 private:
  BigramModel model_;
};

static_assert(Denoiser<NoisyOracle>);
static_assert(Denoiser<MarkovDenoiser>);

}  // namespace warmdiff
