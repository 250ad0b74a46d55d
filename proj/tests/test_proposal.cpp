#include <gtest/gtest.h>

#include "warmdiff/proposal.hpp"

using namespace warmdiff;

namespace {

std::vector<TokenId> uniform_target(std::size_t n, std::size_t v, std::uint64_t seed) {
  const DeterministicRng rng(seed);
  std::vector<TokenId> t(n);
  for (std::size_t i = 0; i < n; ++i) t[i] = static_cast<TokenId>(rng.index("target", i, 0, v));
  return t;
}

}  // namespace

TEST(ProposeCorrupted, ZeroEpsilonIsIdentity) {
  const auto target = uniform_target(500, 9, 1);
  const auto p = propose_corrupted(target, Vocabulary(9), 0.0, DeterministicRng(4));
  EXPECT_EQ(p.tokens, target);
  EXPECT_EQ(p.source, ProposalSource::CorruptedOracle);
}

TEST(ProposeCorrupted, FullCorruptionBinaryFlips) {
  const auto target = uniform_target(200, 2, 2);
  const auto p = propose_corrupted(target, Vocabulary(2), 1.0, DeterministicRng(4));
  for (std::size_t i = 0; i < target.size(); ++i) EXPECT_EQ(p.tokens[i], 1 - target[i]);
}

TEST(ProposeCorrupted, HalfCorruptionConcentrates) {
  const auto target = uniform_target(10000, 16, 3);
  const auto p = propose_corrupted(target, Vocabulary(16), 0.5, DeterministicRng(77));
  std::size_t diff = 0;
  for (std::size_t i = 0; i < target.size(); ++i) diff += p.tokens[i] != target[i];
  const double rate = static_cast<double>(diff) / 10000.0;
  EXPECT_GE(rate, 0.47);
  EXPECT_LE(rate, 0.53);
}

TEST(ProposeCorrupted, SubstitutesAreUniformOverAlternatives) {
  const std::vector<TokenId> target(30000, 2);
  const auto p = propose_corrupted(target, Vocabulary(4), 1.0, DeterministicRng(8));
  std::vector<int> hist(4, 0);
  for (TokenId t : p.tokens) ++hist[static_cast<std::size_t>(t)];
  EXPECT_EQ(hist[2], 0);
  for (int k : {0, 1, 3}) EXPECT_NEAR(hist[static_cast<std::size_t>(k)] / 30000.0, 1.0 / 3.0, 0.015);
}

TEST(ProposeCorrupted, MonotoneCouplingInEpsilon) {
  const auto target = uniform_target(5000, 10, 5);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const DeterministicRng rng(seed);
    const auto low = propose_corrupted(target, Vocabulary(10), 0.25, rng);
    const auto high = propose_corrupted(target, Vocabulary(10), 0.5, rng);
    for (std::size_t i = 0; i < target.size(); ++i) {
      if (low.tokens[i] != target[i]) {
        EXPECT_NE(high.tokens[i], target[i]);
        EXPECT_EQ(high.tokens[i], low.tokens[i]);
      }
    }
  }
}

TEST(ProposeCorrupted, RangeChecks) {
  const std::vector<TokenId> target{0, 1};
  EXPECT_THROW(propose_corrupted(target, Vocabulary(2), 1.5, DeterministicRng(0)), Error);
  EXPECT_THROW(propose_corrupted(target, Vocabulary(2), -0.1, DeterministicRng(0)), Error);
  const std::vector<TokenId> masked{0, 2};
  EXPECT_THROW(propose_corrupted(masked, Vocabulary(2), 0.5, DeterministicRng(0)), Error);
}

TEST(ProposeMarkov, OneHotChainReproduced) {
  // a -> (a + 1) mod 4 with overwhelming counts; start symbol 2.
  const Vocabulary vocab(4);
  Matrix counts(4, 4);
  for (std::size_t a = 0; a < 4; ++a) counts(a, (a + 1) % 4) = 1e15;
  const BigramModel model(vocab, counts, {0, 0, 1e15, 0});
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto p = propose_markov(model, 9, DeterministicRng(seed));
    EXPECT_EQ(p.tokens, (std::vector<TokenId>{2, 3, 0, 1, 2, 3, 0, 1, 2}));
    EXPECT_EQ(p.source, ProposalSource::Markov);
  }
}

TEST(ProposeMarkov, SingleTokenFromUnigram) {
  const Vocabulary vocab(3);
  const auto model = BigramModel::fit({{0, 0, 0, 1}}, vocab);
  std::vector<int> hist(3, 0);
  for (std::uint64_t seed = 0; seed < 6000; ++seed) {
    const auto p = propose_markov(model, 1, DeterministicRng(seed));
    ASSERT_EQ(p.tokens.size(), 1u);
    ++hist[static_cast<std::size_t>(p.tokens[0])];
  }
  // smoothed unigram: (4, 2, 1) / 7
  EXPECT_NEAR(hist[0] / 6000.0, 4.0 / 7.0, 0.03);
  EXPECT_NEAR(hist[2] / 6000.0, 1.0 / 7.0, 0.03);
}

TEST(ProposeMarkov, DeterministicAndMaskFree) {
  const Vocabulary vocab(5);
  const auto model = BigramModel::fit({{0, 1, 2, 3, 4, 0, 2, 4}}, vocab);
  const auto a = propose_markov(model, 50, DeterministicRng(12));
  const auto b = propose_markov(model, 50, DeterministicRng(12));
  EXPECT_EQ(a.tokens, b.tokens);
  for (TokenId t : a.tokens) EXPECT_TRUE(vocab.is_real(t));
}

TEST(ProposeMarkov, RequiresFittedModel) {
  const Vocabulary vocab(3);
  try {
    propose_markov(BigramModel::fit({}, vocab), 4, DeterministicRng(0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::ModelNotFitted);
  }
}
