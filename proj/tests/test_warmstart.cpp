#include <gtest/gtest.h>

#include <random>

#include "support/scripted.hpp"
#include "warmdiff/warmstart.hpp"

using namespace warmdiff;

namespace {

Proposal sample_proposal(std::size_t n, std::size_t v, std::uint64_t seed) {
  const DeterministicRng rng(seed);
  Proposal p;
  p.tokens.resize(n);
  for (std::size_t i = 0; i < n; ++i) p.tokens[i] = static_cast<TokenId>(rng.index("p", i, 0, v));
  return p;
}

}  // namespace

TEST(InjectTokens, ZeroRateIsAllMask) {
  const Vocabulary vocab(7);
  const auto p = sample_proposal(40, 7, 1);
  const auto s = inject_tokens(p, vocab, 0.0, DeterministicRng(5));
  EXPECT_EQ(s, all_mask_init(40, vocab));
}

TEST(InjectTokens, FullRateCopiesProposal) {
  const Vocabulary vocab(7);
  const auto p = sample_proposal(40, 7, 1);
  const auto s = inject_tokens(p, vocab, 1.0, DeterministicRng(5));
  EXPECT_EQ(s.tokens, p.tokens);
  EXPECT_EQ(s.injected.size(), 40u);
  EXPECT_EQ(s.masked_count(), 0u);
}

TEST(InjectTokens, QuarterRateConcentrates) {
  // rho = 0.25, n = 1e4: 3 sigma = 3 * sqrt(0.25 * 0.75 / 1e4) ~= 0.013
  const Vocabulary vocab(7);
  const auto p = sample_proposal(10000, 7, 2);
  const auto s = inject_tokens(p, vocab, 0.25, DeterministicRng(31));
  const double frac = static_cast<double>(s.injected.size()) / 10000.0;
  EXPECT_GE(frac, 0.237);
  EXPECT_LE(frac, 0.263);
}

TEST(InjectTokens, InjectedPositionsHoldProposalTokens) {
  const Vocabulary vocab(5);
  const auto p = sample_proposal(300, 5, 3);
  const auto s = inject_tokens(p, vocab, 0.4, DeterministicRng(9));
  for (std::size_t i = 0; i < 300; ++i) {
    if (s.injected.contains(i)) {
      EXPECT_EQ(s.tokens[i], p.tokens[i]);
    } else {
      EXPECT_TRUE(s.is_masked(i));
    }
  }
}

TEST(InterpolateEmbeddings, AlphaZeroIsMaskEverywhere) {
  const Vocabulary vocab(6);
  const auto table = EmbeddingTable::random(vocab, 5, DeterministicRng(1));
  const auto p = sample_proposal(50, 6, 4);
  for (double rho : {0.0, 0.3, 1.0}) {
    const auto e = interpolate_embeddings(p, table, 0.0, rho, DeterministicRng(2));
    for (std::size_t i = 0; i < 50; ++i) {
      for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(e(i, c), table.mask_row()[c]);
    }
  }
}

TEST(InterpolateEmbeddings, AlphaOneFullKeepIsProposalEmbedding) {
  const Vocabulary vocab(6);
  const auto table = EmbeddingTable::random(vocab, 5, DeterministicRng(1));
  const auto p = sample_proposal(50, 6, 4);
  const auto e = interpolate_embeddings(p, table, 1.0, 1.0, DeterministicRng(2));
  for (std::size_t i = 0; i < 50; ++i) {
    const auto want = embed_lookup(table, p.tokens[i]);
    for (std::size_t c = 0; c < 5; ++c) EXPECT_EQ(e(i, c), want[c]);
  }
}

TEST(InterpolateEmbeddings, HandArithmetic) {
  // e_mask = (0, 0), Emb(1) = (1, 2), alpha = 0.6 -> (0.6, 1.2)
  const Vocabulary vocab(2);
  const EmbeddingTable table(vocab, testkit::rows_of({{3, 3}, {1, 2}, {0, 0}}));
  const Proposal p{{1}, ProposalSource::CorruptedOracle, 0.0};
  const auto e = interpolate_embeddings(p, table, 0.6, 1.0, DeterministicRng(0));
  EXPECT_NEAR(e(0, 0), 0.6, 1e-15);
  EXPECT_NEAR(e(0, 1), 1.2, 1e-15);
}

TEST(InterpolateEmbeddings, DropoutKeepsAboutRho) {
  const Vocabulary vocab(6);
  const auto table = EmbeddingTable::random(vocab, 3, DeterministicRng(1));
  const auto p = sample_proposal(10000, 6, 6);
  const auto e = interpolate_embeddings(p, table, 0.6, 0.25, DeterministicRng(13));
  std::size_t kept = 0;
  for (std::size_t i = 0; i < 10000; ++i) {
    bool is_mask = true;
    for (std::size_t c = 0; c < 3; ++c) is_mask = is_mask && e(i, c) == table.mask_row()[c];
    kept += is_mask ? 0 : 1;
  }
  EXPECT_NEAR(static_cast<double>(kept) / 10000.0, 0.25, 0.013);
}

TEST(InterpolateEmbeddingsProperty, EntriesOnSegment) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t v = 2 + gen() % 6, d = 1 + gen() % 6, n = 1 + gen() % 20;
    const Vocabulary vocab(v);
    const auto table = EmbeddingTable::random(vocab, d, DeterministicRng(gen()));
    const auto p = sample_proposal(n, v, gen());
    const double alpha = std::uniform_real_distribution<double>(0, 1)(gen);
    const double rho = std::uniform_real_distribution<double>(0, 1)(gen);
    const auto e = interpolate_embeddings(p, table, alpha, rho, DeterministicRng(gen()));
    for (std::size_t i = 0; i < n; ++i) {
      const auto a = table.mask_row();
      const auto b = embed_lookup(table, p.tokens[i]);
      for (std::size_t c = 0; c < d; ++c) {
        EXPECT_GE(e(i, c), std::min(a[c], b[c]) - 1e-12);
        EXPECT_LE(e(i, c), std::max(a[c], b[c]) + 1e-12);
      }
    }
  }
}

TEST(WarmInit, DispatchesOnMethod) {
  const Vocabulary vocab(5);
  const auto table = EmbeddingTable::random(vocab, 4, DeterministicRng(1));
  const auto p = sample_proposal(12, 5, 8);
  const DeterministicRng rng(3);

  WarmStartConfig cfg;
  cfg.method = WarmMethod::None;
  EXPECT_EQ(warm_init(p, table, cfg, rng), all_mask_init(12, vocab));

  cfg.method = WarmMethod::TokenInjection;
  cfg.rho = 1.0;
  const auto full = warm_init(p, table, cfg, rng);
  EXPECT_EQ(full.tokens, p.tokens);
  EXPECT_EQ(full.injected.size(), 12u);
  EXPECT_EQ(full.iteration, 0u);

  cfg.method = WarmMethod::EmbeddingInterpolation;
  cfg.alpha = 0.6;
  cfg.rho = 0.25;
  const auto emb = warm_init(p, table, cfg, rng);
  EXPECT_EQ(emb.masked_count(), 12u);
  EXPECT_TRUE(emb.injected.empty());
  ASSERT_TRUE(emb.embedding_override.has_value());
  EXPECT_EQ(emb.embedding_override->rows(), 12u);
  EXPECT_EQ(emb.embedding_override->cols(), 4u);
}

TEST(WarmInit, RejectsOutOfRangeRates) {
  const Vocabulary vocab(5);
  const auto table = EmbeddingTable::random(vocab, 4, DeterministicRng(1));
  const auto p = sample_proposal(3, 5, 8);
  WarmStartConfig cfg;
  cfg.method = WarmMethod::TokenInjection;
  cfg.rho = 1.2;
  EXPECT_THROW(warm_init(p, table, cfg, DeterministicRng(0)), Error);
  cfg.rho = 0.5;
  cfg.alpha = -0.1;
  EXPECT_THROW(warm_init(p, table, cfg, DeterministicRng(0)), Error);
}
