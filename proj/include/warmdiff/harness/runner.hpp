#pragma once

#include <charconv>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "warmdiff/bigram.hpp"
#include "warmdiff/decoder.hpp"
#include "warmdiff/denoiser.hpp"
#include "warmdiff/harness/config.hpp"
#include "warmdiff/harness/metrics.hpp"
#include "warmdiff/proposal.hpp"
#include "warmdiff/warmstart.hpp"

namespace warmdiff::harness {

using AnyDenoiser = std::variant<NoisyOracle, MarkovDenoiser>;

struct RunOutcome {
  RunRow row;
  std::vector<TokenId> target;
  Proposal proposal;
  DiffusionState init;
  DecodeResult result;
};

inline std::uint64_t run_seed(std::uint64_t base_seed, std::size_t run_index) {
  return base_seed ^ static_cast<std::uint64_t>(run_index);
}

inline GridPoint point_of(const ExperimentConfig& cfg, std::size_t grid_id = 0) {
  return {grid_id, cfg.warm.method, cfg.warm.rho, cfg.warm.alpha, cfg.epsilon,
          cfg.decode.tau, cfg.decode.b0, cfg.decode.lambda};
}

/// Everything shared by the runs of one config: vocabulary, embedding table
/// (seeded by the base seed, so it is fixed across runs), the optional bigram
/// model, and the denoiser.
class Experiment {
 public:
  explicit Experiment(ExperimentConfig cfg, std::optional<BigramModel> bigram = std::nullopt)
      : cfg_(std::move(cfg)),
        vocab_(cfg_.vocab_size),
        table_(EmbeddingTable::random(vocab_, cfg_.embed_dim, DeterministicRng(cfg_.seed))),
        bigram_(std::move(bigram)),
        denoiser_(NoisyOracle(cfg_.oracle)) {
    cfg_.validate();
    if (cfg_.needs_corpus() && !bigram_) bigram_ = BigramModel::fit(load_corpus(cfg_.corpus, vocab_), vocab_);
    if (bigram_) {
      if (!(bigram_->vocab() == vocab_)) throw Error(ErrorKind::Config, "bigram model vocabulary differs from config");
      if (cfg_.needs_corpus() && !bigram_->fitted()) throw Error(ErrorKind::Config, "corpus is empty");
    }
    if (cfg_.denoiser == DenoiserKind::Markov) {
      denoiser_ = MarkovDenoiser(*bigram_);
    } else {
      denoiser_ = NoisyOracle(cfg_.oracle, table_);
    }
    dcfg_ = cfg_.decode;
    dcfg_.k_max = cfg_.resolved_k_max();
  }

  const ExperimentConfig& config() const { return cfg_; }
  const EmbeddingTable& table() const { return table_; }
  const std::optional<BigramModel>& bigram() const { return bigram_; }
  const AnyDenoiser& denoiser() const { return denoiser_; }

  std::vector<TokenId> make_target(const DeterministicRng& rng) const {
    if (cfg_.target == TargetRule::Corpus) return propose_markov(*bigram_, cfg_.n, rng, "target-markov").tokens;
    std::vector<TokenId> target(cfg_.n);
    for (std::size_t i = 0; i < cfg_.n; ++i) target[i] = static_cast<TokenId>(rng.index("target", i, 0, vocab_.size()));
    return target;
  }

  Proposal make_proposal(std::span<const TokenId> target, const DeterministicRng& rng) const {
    if (cfg_.proposer == ProposalSource::Markov) return propose_markov(*bigram_, cfg_.n, rng);
    return propose_corrupted(target, vocab_, cfg_.epsilon, rng);
  }

  /// Target, proposal, warm start and decode for one run. Deterministic in
  /// (config, run_index).
  RunOutcome run(std::size_t run_index, std::size_t grid_id = 0) const {
    const std::uint64_t seed = run_seed(cfg_.seed, run_index);
    const DeterministicRng rng(seed);
    auto target = make_target(rng);
    auto proposal = make_proposal(target, rng);
    auto init = warm_init(proposal, table_, cfg_.warm, rng);
    const DenoiseContext ctx(target, vocab_);
    auto result = std::visit([&](const auto& d) { return decode(d, ctx, init, dcfg_, cfg_.warm, rng); }, denoiser_);

    RunRow row;
    row.point = point_of(cfg_, grid_id);
    row.run = run_index;
    row.seed = seed;
    row.nfe = result.trace.nfe;
    row.exact_match = exact_match(result.tokens, target);
    row.token_acc = token_accuracy(result.tokens, target);
    row.capped = result.trace.capped;
    return RunOutcome{row, std::move(target), std::move(proposal), std::move(init), std::move(result)};
  }

  MetricsRecord run_all(std::size_t grid_id = 0) const {
    std::vector<RunRow> rows;
    rows.reserve(cfg_.num_runs);
    for (std::size_t r = 0; r < cfg_.num_runs; ++r) rows.push_back(run(r, grid_id).row);
    return aggregate(point_of(cfg_, grid_id), std::move(rows));
  }

 private:
  ExperimentConfig cfg_;
  Vocabulary vocab_;
  EmbeddingTable table_;
  std::optional<BigramModel> bigram_;
  AnyDenoiser denoiser_;
  DecodeConfig dcfg_;
};

inline RunOutcome run_one(const ExperimentConfig& cfg, std::size_t run_index) {
  return Experiment(cfg).run(run_index);
}

/// Cartesian product of the grid axes over the base config, in the fixed
/// axis order method, rho, alpha, epsilon, tau, b0, lambda (last varies fastest).
inline std::vector<ExperimentConfig> expand_grid(const ExperimentConfig& base, const Grid& grid) {
  std::vector<ExperimentConfig> points{base};
  auto axis = [&points](const auto& values, auto apply) {
    if (values.empty()) return;
    std::vector<ExperimentConfig> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        ExperimentConfig c = p;
        apply(c, v);
        next.push_back(std::move(c));
      }
    }
    points = std::move(next);
  };
  axis(grid.method, [](ExperimentConfig& c, WarmMethod m) { c.warm.method = m; });
  axis(grid.rho, [](ExperimentConfig& c, double v) { c.warm.rho = v; });
  axis(grid.alpha, [](ExperimentConfig& c, double v) { c.warm.alpha = v; });
  axis(grid.epsilon, [](ExperimentConfig& c, double v) { c.epsilon = v; });
  axis(grid.tau, [](ExperimentConfig& c, double v) { c.decode.tau = v; });
  axis(grid.b0, [](ExperimentConfig& c, double v) { c.decode.b0 = v; });
  axis(grid.lambda, [](ExperimentConfig& c, double v) { c.decode.lambda = v; });
  for (const auto& p : points) p.validate();
  return points;
}

/// One MetricsRecord per grid point, in grid order.
inline std::vector<MetricsRecord> sweep(const ExperimentConfig& base, const Grid& grid) {
  const auto points = expand_grid(base, grid);
  std::optional<BigramModel> bigram;
  if (base.needs_corpus()) {
    const Vocabulary vocab(base.vocab_size);
    bigram = BigramModel::fit(load_corpus(base.corpus, vocab), vocab);
  }
  std::vector<MetricsRecord> records;
  for (std::size_t g = 0; g < points.size(); ++g) records.push_back(Experiment(points[g], bigram).run_all(g));
  return records;
}

// ---------------------------------------------------------------------------
// Output formats

/// Shortest round-trip decimal form.
inline std::string format_number(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline constexpr const char* kCsvHeader =
    "grid_id,method,rho,alpha,epsilon,tau,b0,lambda,run,seed,nfe,exact_match,token_acc,capped";

inline void write_csv_row(std::ostream& out, const RunRow& r) {
  const auto& p = r.point;
  out << p.grid_id << ',' << to_string(p.method) << ',' << format_number(p.rho) << ',' << format_number(p.alpha)
      << ',' << format_number(p.epsilon) << ',' << format_number(p.tau) << ',' << format_number(p.b0) << ','
      << format_number(p.lambda) << ',' << r.run << ',' << r.seed << ',' << r.nfe << ','
      << (r.exact_match ? 1 : 0) << ',' << format_number(r.token_acc) << ',' << (r.capped ? 1 : 0) << '\n';
}

inline void write_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kCsvHeader << '\n';
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) write_csv_row(out, row);
  }
}

inline constexpr const char* kSummaryHeader =
    "grid_id,method,rho,alpha,epsilon,tau,b0,lambda,runs,mean_nfe,std_nfe,exact_match_rate,mean_token_acc,capped_runs";

inline void write_summary_csv(std::ostream& out, const std::vector<MetricsRecord>& records) {
  out << kSummaryHeader << '\n';
  for (const auto& rec : records) {
    const auto& p = rec.point;
    out << p.grid_id << ',' << to_string(p.method) << ',' << format_number(p.rho) << ','
        << format_number(p.alpha) << ',' << format_number(p.epsilon) << ',' << format_number(p.tau) << ','
        << format_number(p.b0) << ',' << format_number(p.lambda) << ',' << rec.rows.size() << ','
        << format_number(rec.mean_nfe) << ',' << format_number(rec.std_nfe) << ','
        << format_number(rec.exact_match_rate) << ',' << format_number(rec.mean_token_acc) << ','
        << rec.capped_runs << '\n';
  }
}

/// Flat dotted-key view of a fully resolved config.
inline nlohmann::ordered_json config_json(const ExperimentConfig& c) {
  nlohmann::ordered_json j;
  j["n"] = c.n;
  j["vocab_size"] = c.vocab_size;
  j["embed_dim"] = c.embed_dim;
  j["num_runs"] = c.num_runs;
  j["seed"] = c.seed;
  j["target"] = to_string(c.target);
  j["corpus"] = c.corpus;
  j["denoiser.kind"] = to_string(c.denoiser);
  j["denoiser.mode"] = to_string(c.oracle.mode);
  j["denoiser.c0"] = c.oracle.c0;
  j["denoiser.gamma"] = c.oracle.gamma;
  j["denoiser.eta"] = c.oracle.eta;
  j["denoiser.c_max"] = c.oracle.c_max;
  j["denoiser.window"] = c.oracle.window;
  j["proposer.kind"] = to_string(c.proposer);
  j["proposer.epsilon"] = c.epsilon;
  j["warmstart.method"] = to_string(c.warm.method);
  j["warmstart.rho"] = c.warm.rho;
  j["warmstart.alpha"] = c.warm.alpha;
  j["warmstart.override_persistence"] = to_string(c.warm.override_persistence);
  j["decode.tau"] = c.decode.tau;
  j["decode.remask"] = c.decode.remask_enabled;
  j["decode.b0"] = c.decode.b0;
  j["decode.lambda"] = c.decode.lambda;
  j["decode.k_max"] = c.resolved_k_max();
  return j;
}

inline nlohmann::ordered_json iteration_json(const IterationRecord& rec) {
  nlohmann::ordered_json j;
  j["k"] = rec.k;
  j["unmasked"] = nlohmann::ordered_json::array();
  for (const auto& u : rec.unmasked) {
    nlohmann::ordered_json e;
    e["pos"] = u.pos;
    e["tok"] = u.tok;
    e["conf"] = u.conf;
    j["unmasked"].push_back(std::move(e));
  }
  j["remasked"] = nlohmann::ordered_json::array();
  for (const auto& r : rec.remasked) {
    nlohmann::ordered_json e;
    e["pos"] = r.pos;
    e["rate"] = r.rate;
    j["remasked"].push_back(std::move(e));
  }
  j["masked_after"] = rec.masked_after;
  return j;
}

/// JSON lines: a header object with the resolved config and run identity,
/// then one object per decode iteration.
inline void write_trace(std::ostream& out, const ExperimentConfig& cfg, const RunOutcome& run) {
  nlohmann::ordered_json header;
  header["config"] = config_json(cfg);
  header["run"] = run.row.run;
  header["seed"] = run.row.seed;
  out << header.dump() << '\n';
  for (const auto& rec : run.result.trace.iterations) out << iteration_json(rec).dump() << '\n';
}

}  // namespace warmdiff::harness
