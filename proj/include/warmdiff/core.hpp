#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "warmdiff/error.hpp"
#include "warmdiff/rng.hpp"

namespace warmdiff {

using TokenId = std::int32_t;

/// Real tokens occupy [0, size); the mask sentinel is `size` itself, so it
/// can never be produced by an argmax over a length-`size` logit row.
class Vocabulary {
 public:
  explicit Vocabulary(std::size_t size) : size_(size) {
    if (size < 2) throw Error(ErrorKind::Config, "vocabulary size must be >= 2");
  }

  std::size_t size() const { return size_; }
  TokenId mask_id() const { return static_cast<TokenId>(size_); }
  bool is_real(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < size_; }

  bool operator==(const Vocabulary&) const = default;

 private:
  std::size_t size_;
};

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  const std::vector<double>& data() const { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

using LogitMatrix = Matrix;

/// (V + 1) x d embedding rows; row V is the mask embedding.
class EmbeddingTable {
 public:
  EmbeddingTable(Vocabulary vocab, Matrix rows) : vocab_(vocab), rows_(std::move(rows)) {
    if (rows_.rows() != vocab_.size() + 1) {
      throw Error(ErrorKind::Shape, "embedding table needs V + 1 rows, got " +
                                        std::to_string(rows_.rows()));
    }
    if (rows_.cols() == 0) throw Error(ErrorKind::Shape, "embedding dimension must be positive");
    for (double v : rows_.data()) {
      if (!std::isfinite(v)) throw Error(ErrorKind::NumericInput, "non-finite embedding entry");
    }
  }

  /// Entries uniform in [-1, 1), addressed by (row, column) under purpose "embedding".
  static EmbeddingTable random(Vocabulary vocab, std::size_t dim, const DeterministicRng& rng) {
    if (dim == 0) throw Error(ErrorKind::Shape, "embedding dimension must be positive");
    Matrix rows(vocab.size() + 1, dim);
    for (std::size_t r = 0; r < rows.rows(); ++r) {
      for (std::size_t c = 0; c < dim; ++c) rows(r, c) = 2.0 * rng.draw("embedding", r, c) - 1.0;
    }
    return EmbeddingTable(vocab, std::move(rows));
  }

  const Vocabulary& vocab() const { return vocab_; }
  std::size_t dim() const { return rows_.cols(); }
  std::span<const double> mask_row() const { return rows_.row(vocab_.size()); }
  const Matrix& rows() const { return rows_; }

 private:
  Vocabulary vocab_;
  Matrix rows_;
};

/// Returns the stored row for `id`; the mask sentinel maps to the mask embedding.
inline std::span<const double> embed_lookup(const EmbeddingTable& table, TokenId id) {
  if (id < 0 || static_cast<std::size_t>(id) > table.vocab().size()) {
    throw Error(ErrorKind::OutOfVocabulary, "token id " + std::to_string(id) + " outside [0, V]");
  }
  return table.rows().row(static_cast<std::size_t>(id));
}

/// The partially masked sequence being denoised.
///
/// `injected` holds positions whose token came from the warm proposal and has
/// not been remasked; a position leaves it permanently once remasked.
/// `embedding_override`, when present, has one row per position.
struct DiffusionState {
  Vocabulary vocab;
  std::vector<TokenId> tokens;
  std::set<std::size_t> injected;
  std::optional<Matrix> embedding_override;
  std::size_t iteration = 0;

  std::size_t length() const { return tokens.size(); }
  bool is_masked(std::size_t i) const { return tokens[i] == vocab.mask_id(); }
  std::size_t masked_count() const {
    return static_cast<std::size_t>(
        std::count(tokens.begin(), tokens.end(), vocab.mask_id()));
  }

  bool operator==(const DiffusionState&) const = default;
};

inline DiffusionState all_mask_init(std::size_t n, Vocabulary vocab) {
  if (n == 0) throw Error(ErrorKind::InvalidLength, "sequence length must be >= 1");
  return DiffusionState{vocab, std::vector<TokenId>(n, vocab.mask_id()), {}, std::nullopt, 0};
}

/// Max-subtracted softmax.
inline std::vector<double> softmax(std::span<const double> logits) {
  if (logits.empty()) throw Error(ErrorKind::Shape, "softmax of empty vector");
  double top = logits[0];
  for (double l : logits) {
    if (!std::isfinite(l)) throw Error(ErrorKind::NumericInput, "non-finite logit");
    top = std::max(top, l);
  }
  std::vector<double> out(logits.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    total += out[i];
  }
  for (double& p : out) p /= total;
  return out;
}

/// Row-wise softmax of a logit matrix.
inline Matrix softmax_rows(const LogitMatrix& logits) {
  Matrix probs(logits.rows(), logits.cols());
  for (std::size_t r = 0; r < logits.rows(); ++r) {
    auto p = softmax(logits.row(r));
    std::copy(p.begin(), p.end(), probs.row(r).begin());
  }
  return probs;
}

}  // namespace warmdiff
