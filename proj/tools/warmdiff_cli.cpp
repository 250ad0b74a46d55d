// Command-line front end for the warm-start decoding experiments.
//
//   warmdiff run      --config <file> [--csv <path>] [--trace <path>] [--trace-run <i>]
//   warmdiff sweep    --grid <file> [--out <path>] [--summary <path>]
//   warmdiff validate --config <file>
//
// Exit codes: 0 success, 1 config error, 2 runtime invariant violation.

#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "warmdiff/harness/config.hpp"
#include "warmdiff/harness/invariants.hpp"
#include "warmdiff/harness/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitInvariant = 2;

using namespace warmdiff;
using namespace warmdiff::harness;

bool is_config_error(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::Config:
    case ErrorKind::OutOfVocabulary:
    case ErrorKind::ModelNotFitted:
    case ErrorKind::InvalidLength:
      return true;
    default:
      return false;
  }
}

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Config, "cannot open '" + path + "' for writing");
  return out;
}

void print_record(std::ostream& out, const MetricsRecord& rec) {
  out << "runs             " << rec.rows.size() << '\n'
      << "mean_nfe         " << format_number(rec.mean_nfe) << '\n'
      << "std_nfe          " << format_number(rec.std_nfe) << '\n'
      << "exact_match_rate " << format_number(rec.exact_match_rate) << '\n'
      << "mean_token_acc   " << format_number(rec.mean_token_acc) << '\n'
      << "capped_runs      " << rec.capped_runs << '\n';
}

int cmd_run(const std::string& config_path, const std::string& csv_path, const std::string& trace_path,
            std::size_t trace_run) {
  const auto file = load_config(config_path);
  const Experiment exp(file.config);
  if (!trace_path.empty() && trace_run >= file.config.num_runs) {
    throw Error(ErrorKind::Config, "--trace-run must be below num_runs");
  }

  std::vector<RunRow> rows;
  for (std::size_t r = 0; r < file.config.num_runs; ++r) {
    const auto out = exp.run(r);
    for (const auto& w : out.result.trace.warnings) std::cerr << "warning: run " << r << ": " << w << '\n';
    if (!trace_path.empty() && r == trace_run) {
      auto trace = open_output(trace_path);
      write_trace(trace, file.config, out);
    }
    rows.push_back(out.row);
  }
  const auto rec = aggregate(point_of(file.config), std::move(rows));
  if (!csv_path.empty()) {
    auto csv = open_output(csv_path);
    write_csv(csv, {rec});
  }
  print_record(std::cout, rec);
  return kExitOk;
}

int cmd_sweep(const std::string& grid_path, const std::string& out_path, const std::string& summary_path) {
  const auto file = load_config(grid_path);
  const auto records = sweep(file.config, file.grid);
  if (out_path.empty()) {
    write_csv(std::cout, records);
  } else {
    auto out = open_output(out_path);
    write_csv(out, records);
  }
  if (!summary_path.empty()) {
    auto out = open_output(summary_path);
    write_summary_csv(out, records);
  }
  return kExitOk;
}

int cmd_validate(const std::string& config_path) {
  const auto file = load_config(config_path);
  const auto violations = validate_config(file.config);
  for (const auto& v : violations) std::cerr << "violation: " << v << '\n';
  if (!violations.empty()) return kExitInvariant;
  std::cout << "ok: " << file.config.num_runs << " runs, all invariants hold\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Warm-started masked diffusion decoding experiments"};
  app.require_subcommand(1);

  std::string config_path, csv_path, trace_path, grid_path, out_path, summary_path;
  std::size_t trace_run = 0;

  auto* run = app.add_subcommand("run", "Run one config and report aggregate metrics");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--csv", csv_path, "Write per-run rows as CSV");
  run->add_option("--trace", trace_path, "Write the JSON-lines decode trace of one run");
  run->add_option("--trace-run", trace_run, "Run index to trace (default 0)");

  auto* sweep_cmd = app.add_subcommand("sweep", "Run every grid point of a config and emit CSV");
  sweep_cmd->add_option("--grid", grid_path, "Config file with grid.* axes")->required();
  sweep_cmd->add_option("--out", out_path, "Per-run CSV path (default stdout)");
  sweep_cmd->add_option("--summary", summary_path, "Per-grid-point aggregate CSV path");

  auto* validate = app.add_subcommand("validate", "Check decode invariants over every run of a config");
  validate->add_option("--config", config_path, "Config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (run->parsed()) return cmd_run(config_path, csv_path, trace_path, trace_run);
    if (sweep_cmd->parsed()) return cmd_sweep(grid_path, out_path, summary_path);
    return cmd_validate(config_path);
  } catch (const warmdiff::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return is_config_error(e) ? kExitConfig : kExitInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvariant;
  }
}
