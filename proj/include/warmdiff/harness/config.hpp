#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "warmdiff/decoder.hpp"
#include "warmdiff/denoiser.hpp"
#include "warmdiff/warmstart.hpp"

namespace warmdiff::harness {

enum class DenoiserKind { NoisyOracle, Markov };
enum class TargetRule { Uniform, Corpus };

inline const char* to_string(DenoiserKind k) { return k == DenoiserKind::NoisyOracle ? "noisy-oracle" : "markov"; }
inline const char* to_string(TargetRule t) { return t == TargetRule::Uniform ? "uniform" : "corpus"; }
inline const char* to_string(OracleMode m) { return m == OracleMode::Faithful ? "faithful" : "credulous"; }

struct ExperimentConfig {
  std::size_t n = 32;
  std::size_t vocab_size = 64;
  std::size_t embed_dim = 16;
  std::size_t num_runs = 200;
  std::uint64_t seed = 0;
  TargetRule target = TargetRule::Uniform;
  std::string corpus;  // resolved path; required by any markov component or corpus targets

  DenoiserKind denoiser = DenoiserKind::NoisyOracle;
  NoisyOracleParams oracle;

  ProposalSource proposer = ProposalSource::CorruptedOracle;
  double epsilon = 0.0;

  WarmStartConfig warm;
  DecodeConfig decode;
  bool k_max_set = false;  // unset: k_max resolves to 2n

  bool needs_corpus() const {
    return denoiser == DenoiserKind::Markov || proposer == ProposalSource::Markov || target == TargetRule::Corpus;
  }

  std::size_t resolved_k_max() const { return k_max_set ? decode.k_max : 2 * n; }

  void validate() const {
    if (n == 0) throw Error(ErrorKind::Config, "n must be >= 1");
    if (vocab_size < 2) throw Error(ErrorKind::Config, "vocab_size must be >= 2");
    if (embed_dim == 0) throw Error(ErrorKind::Config, "embed_dim must be >= 1");
    if (num_runs == 0) throw Error(ErrorKind::Config, "num_runs must be >= 1");
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw Error(ErrorKind::Config, "proposer.epsilon must lie in [0, 1]");
    if (needs_corpus() && corpus.empty()) throw Error(ErrorKind::Config, "a corpus path is required by this config");
    oracle.validate();
    warm.validate();
    DecodeConfig d = decode;
    d.k_max = resolved_k_max();
    d.validate();
  }
};

/// Sweep axes. An empty axis means "use the base config value".
struct Grid {
  std::vector<WarmMethod> method;
  std::vector<double> rho;
  std::vector<double> alpha;
  std::vector<double> epsilon;
  std::vector<double> tau;
  std::vector<double> b0;
  std::vector<double> lambda;
};

struct ConfigFile {
  ExperimentConfig config;
  Grid grid;
};

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

/// Drops a trailing '#' comment that is not inside a quoted string.
inline std::string strip_comment(const std::string& s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

struct Raw {
  std::string text;
  std::size_t line;
};

inline Error bad(const Raw& raw, const std::string& key, const std::string& msg) {
  return Error(ErrorKind::Config, "line " + std::to_string(raw.line) + ": " + key + ": " + msg);
}

inline double as_double(const Raw& raw, const std::string& key) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(raw.text, &used);
  } catch (const std::exception&) {
    throw bad(raw, key, "expected a number, got '" + raw.text + "'");
  }
  if (used != raw.text.size() || !std::isfinite(v)) throw bad(raw, key, "expected a number, got '" + raw.text + "'");
  return v;
}

inline std::uint64_t as_uint(const Raw& raw, const std::string& key) {
  if (raw.text.empty() || raw.text.find_first_not_of("0123456789") != std::string::npos) {
    throw bad(raw, key, "expected a non-negative integer, got '" + raw.text + "'");
  }
  try {
    return std::stoull(raw.text);
  } catch (const std::exception&) {
    throw bad(raw, key, "integer out of range");
  }
}

inline bool as_bool(const Raw& raw, const std::string& key) {
  if (raw.text == "true") return true;
  if (raw.text == "false") return false;
  throw bad(raw, key, "expected true or false, got '" + raw.text + "'");
}

/// Quoted or bare string.
inline std::string as_string(const Raw& raw, const std::string& key) {
  const auto& t = raw.text;
  if (t.size() >= 2 && t.front() == '"' && t.back() == '"') return t.substr(1, t.size() - 2);
  if (t.empty() || t.find_first_of("\" ,[]") != std::string::npos) throw bad(raw, key, "expected a string");
  return t;
}

inline std::vector<Raw> as_list(const Raw& raw, const std::string& key) {
  const auto& t = raw.text;
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') throw bad(raw, key, "expected a [list]");
  std::vector<Raw> items;
  std::string inner = t.substr(1, t.size() - 2);
  std::stringstream ss(inner);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw bad(raw, key, "empty list element");
    items.push_back({item, raw.line});
  }
  if (items.empty()) throw bad(raw, key, "empty list");
  return items;
}

inline WarmMethod parse_method(const Raw& raw, const std::string& key) {
  const auto s = as_string(raw, key);
  if (s == "none") return WarmMethod::None;
  if (s == "token-injection") return WarmMethod::TokenInjection;
  if (s == "embedding-interpolation") return WarmMethod::EmbeddingInterpolation;
  throw bad(raw, key, "unknown method '" + s + "'");
}

template <class T, class F>
std::vector<T> list_of(const Raw& raw, const std::string& key, F&& convert) {
  std::vector<T> out;
  for (const auto& item : as_list(raw, key)) out.push_back(convert(item, key));
  return out;
}

}  // namespace detail

/// Parses the flat dotted key = value format. `base_dir` resolves a
/// relative corpus path.
inline ConfigFile parse_config(std::istream& in, const std::filesystem::path& base_dir = {}) {
  using namespace detail;
  ConfigFile file;
  auto& c = file.config;
  auto& g = file.grid;

  using Setter = std::function<void(const Raw&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"n", [&](const Raw& r, const std::string& k) { c.n = as_uint(r, k); }},
      {"vocab_size", [&](const Raw& r, const std::string& k) { c.vocab_size = as_uint(r, k); }},
      {"embed_dim", [&](const Raw& r, const std::string& k) { c.embed_dim = as_uint(r, k); }},
      {"num_runs", [&](const Raw& r, const std::string& k) { c.num_runs = as_uint(r, k); }},
      {"seed", [&](const Raw& r, const std::string& k) { c.seed = as_uint(r, k); }},
      {"target", [&](const Raw& r, const std::string& k) {
         const auto s = as_string(r, k);
         if (s == "uniform") c.target = TargetRule::Uniform;
         else if (s == "corpus") c.target = TargetRule::Corpus;
         else throw bad(r, k, "expected uniform or corpus");
       }},
      {"corpus", [&](const Raw& r, const std::string& k) {
         std::filesystem::path p = as_string(r, k);
         c.corpus = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
       }},
      {"denoiser.kind", [&](const Raw& r, const std::string& k) {
         const auto s = as_string(r, k);
         if (s == "noisy-oracle") c.denoiser = DenoiserKind::NoisyOracle;
         else if (s == "markov") c.denoiser = DenoiserKind::Markov;
         else throw bad(r, k, "expected noisy-oracle or markov");
       }},
      {"denoiser.mode", [&](const Raw& r, const std::string& k) {
         const auto s = as_string(r, k);
         if (s == "faithful") c.oracle.mode = OracleMode::Faithful;
         else if (s == "credulous") c.oracle.mode = OracleMode::Credulous;
         else throw bad(r, k, "expected faithful or credulous");
       }},
      {"denoiser.c0", [&](const Raw& r, const std::string& k) { c.oracle.c0 = as_double(r, k); }},
      {"denoiser.gamma", [&](const Raw& r, const std::string& k) { c.oracle.gamma = as_double(r, k); }},
      {"denoiser.eta", [&](const Raw& r, const std::string& k) { c.oracle.eta = as_double(r, k); }},
      {"denoiser.c_max", [&](const Raw& r, const std::string& k) { c.oracle.c_max = as_double(r, k); }},
      {"denoiser.window", [&](const Raw& r, const std::string& k) { c.oracle.window = as_uint(r, k); }},
      {"proposer.kind", [&](const Raw& r, const std::string& k) {
         const auto s = as_string(r, k);
         if (s == "corrupted-oracle") c.proposer = ProposalSource::CorruptedOracle;
         else if (s == "markov") c.proposer = ProposalSource::Markov;
         else throw bad(r, k, "expected corrupted-oracle or markov");
       }},
      {"proposer.epsilon", [&](const Raw& r, const std::string& k) { c.epsilon = as_double(r, k); }},
      {"warmstart.method", [&](const Raw& r, const std::string& k) { c.warm.method = parse_method(r, k); }},
      {"warmstart.rho", [&](const Raw& r, const std::string& k) { c.warm.rho = as_double(r, k); }},
      {"warmstart.alpha", [&](const Raw& r, const std::string& k) { c.warm.alpha = as_double(r, k); }},
      {"warmstart.override_persistence", [&](const Raw& r, const std::string& k) {
         const auto s = as_string(r, k);
         if (s == "first-iteration") c.warm.override_persistence = OverridePersistence::FirstIteration;
         else if (s == "while-masked") c.warm.override_persistence = OverridePersistence::WhileMasked;
         else throw bad(r, k, "expected first-iteration or while-masked");
       }},
      {"decode.tau", [&](const Raw& r, const std::string& k) { c.decode.tau = as_double(r, k); }},
      {"decode.remask", [&](const Raw& r, const std::string& k) { c.decode.remask_enabled = as_bool(r, k); }},
      {"decode.b0", [&](const Raw& r, const std::string& k) { c.decode.b0 = as_double(r, k); }},
      {"decode.lambda", [&](const Raw& r, const std::string& k) { c.decode.lambda = as_double(r, k); }},
      {"decode.k_max", [&](const Raw& r, const std::string& k) {
         c.decode.k_max = as_uint(r, k);
         c.k_max_set = true;
       }},
      {"grid.warmstart.method", [&](const Raw& r, const std::string& k) { g.method = list_of<WarmMethod>(r, k, parse_method); }},
      {"grid.warmstart.rho", [&](const Raw& r, const std::string& k) { g.rho = list_of<double>(r, k, as_double); }},
      {"grid.warmstart.alpha", [&](const Raw& r, const std::string& k) { g.alpha = list_of<double>(r, k, as_double); }},
      {"grid.proposer.epsilon", [&](const Raw& r, const std::string& k) { g.epsilon = list_of<double>(r, k, as_double); }},
      {"grid.decode.tau", [&](const Raw& r, const std::string& k) { g.tau = list_of<double>(r, k, as_double); }},
      {"grid.decode.b0", [&](const Raw& r, const std::string& k) { g.b0 = list_of<double>(r, k, as_double); }},
      {"grid.decode.lambda", [&](const Raw& r, const std::string& k) { g.lambda = list_of<double>(r, k, as_double); }},
  };

  std::set<std::string> seen;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const Raw value{trim(line.substr(eq + 1)), line_no};
    const auto it = setters.find(key);
    if (it == setters.end()) throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw Error(ErrorKind::Config, "line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    if (value.text.empty()) throw bad(value, key, "missing value");
    it->second(value, key);
  }
  c.validate();
  return file;
}

inline ConfigFile parse_config_string(const std::string& text, const std::filesystem::path& base_dir = {}) {
  std::istringstream in(text);
  return parse_config(in, base_dir);
}

inline ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Config, "cannot open config file '" + path.string() + "'");
  return parse_config(in, path.parent_path());
}

}  // namespace warmdiff::harness
