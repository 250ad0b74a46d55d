#pragma once

#include <cstddef>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "warmdiff/core.hpp"

namespace warmdiff {

using Corpus = std::vector<std::vector<TokenId>>;

/// Parses the corpus text format: one sequence per line, whitespace-separated
/// token ids in [0, V). Blank lines and everything after '#' are ignored.
inline Corpus parse_corpus(std::istream& in, Vocabulary vocab) {
  Corpus corpus;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    std::vector<TokenId> seq;
    std::string field;
    while (fields >> field) {
      std::size_t used = 0;
      long long value = 0;
      try {
        value = std::stoll(field, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != field.size()) {
        throw Error(ErrorKind::Config,
                    "corpus line " + std::to_string(line_no) + ": not an integer: '" + field + "'");
      }
      if (value < 0 || static_cast<unsigned long long>(value) >= vocab.size()) {
        throw Error(ErrorKind::OutOfVocabulary,
                    "corpus line " + std::to_string(line_no) + ": token " + field + " outside [0, V)");
      }
      seq.push_back(static_cast<TokenId>(value));
    }
    if (!seq.empty()) corpus.push_back(std::move(seq));
  }
  return corpus;
}

inline Corpus load_corpus(const std::string& path, Vocabulary vocab) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open corpus file '" + path + "'");
  return parse_corpus(in, vocab);
}

/// Add-one smoothed bigram model with forward, reverse and unigram views.
class BigramModel {
 public:
  BigramModel(Vocabulary vocab, Matrix bigram_counts, std::vector<double> unigram_counts)
      : vocab_(vocab), counts_(std::move(bigram_counts)), unigram_(std::move(unigram_counts)) {
    const std::size_t v = vocab_.size();
    if (counts_.rows() != v || counts_.cols() != v || unigram_.size() != v) {
      throw Error(ErrorKind::Shape, "bigram table must be V x V with V unigram counts");
    }
    row_totals_.assign(v, 0.0);
    col_totals_.assign(v, 0.0);
    for (std::size_t a = 0; a < v; ++a) {
      for (std::size_t b = 0; b < v; ++b) {
        const double c = counts_(a, b);
        if (!(c >= 0.0) || !std::isfinite(c)) {
          throw Error(ErrorKind::NumericInput, "bigram counts must be finite and non-negative");
        }
        row_totals_[a] += c;
        col_totals_[b] += c;
        total_ += c;
      }
    }
    for (double u : unigram_) {
      if (!(u >= 0.0) || !std::isfinite(u)) {
        throw Error(ErrorKind::NumericInput, "unigram counts must be finite and non-negative");
      }
      unigram_total_ += u;
    }
  }

  static BigramModel fit(const Corpus& corpus, Vocabulary vocab) {
    const std::size_t v = vocab.size();
    Matrix counts(v, v);
    std::vector<double> unigram(v, 0.0);
    for (const auto& seq : corpus) {
      for (std::size_t i = 0; i < seq.size(); ++i) {
        if (!vocab.is_real(seq[i])) throw Error(ErrorKind::OutOfVocabulary, "corpus token outside [0, V)");
        unigram[static_cast<std::size_t>(seq[i])] += 1.0;
        if (i > 0) counts(static_cast<std::size_t>(seq[i - 1]), static_cast<std::size_t>(seq[i])) += 1.0;
      }
    }
    return BigramModel(vocab, std::move(counts), std::move(unigram));
  }

  const Vocabulary& vocab() const { return vocab_; }
  bool fitted() const { return total_ > 0.0; }
  void require_fitted() const {
    if (!fitted()) throw Error(ErrorKind::ModelNotFitted, "bigram table is empty");
  }

  /// P(next = b | prev = a)
  double forward(TokenId a, TokenId b) const {
    const auto ia = static_cast<std::size_t>(a);
    return (counts_(ia, static_cast<std::size_t>(b)) + 1.0) / (row_totals_[ia] + static_cast<double>(vocab_.size()));
  }

  /// P(prev = a | next = b)
  double reverse(TokenId a, TokenId b) const {
    const auto ib = static_cast<std::size_t>(b);
    return (counts_(static_cast<std::size_t>(a), ib) + 1.0) / (col_totals_[ib] + static_cast<double>(vocab_.size()));
  }

  double unigram(TokenId v) const {
    return (unigram_[static_cast<std::size_t>(v)] + 1.0) / (unigram_total_ + static_cast<double>(vocab_.size()));
  }

  std::vector<double> forward_row(TokenId prev) const {
    std::vector<double> p(vocab_.size());
    for (std::size_t b = 0; b < p.size(); ++b) p[b] = forward(prev, static_cast<TokenId>(b));
    return p;
  }

  std::vector<double> unigram_row() const {
    std::vector<double> p(vocab_.size());
    for (std::size_t b = 0; b < p.size(); ++b) p[b] = unigram(static_cast<TokenId>(b));
    return p;
  }

  const Matrix& counts() const { return counts_; }

 private:
  Vocabulary vocab_;
  Matrix counts_;
  std::vector<double> unigram_;
  std::vector<double> row_totals_;
  std::vector<double> col_totals_;
  double total_ = 0.0;
  double unigram_total_ = 0.0;
};

}  // namespace warmdiff
