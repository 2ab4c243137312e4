#include "sabfl/harness/cli.hpp"

#include <iomanip>
#include <iostream>
#include <optional>

#include "CLI11.hpp"
#include "sabfl/analysis/check_config.hpp"
#include "sabfl/chain/chain_io.hpp"
#include "sabfl/harness/batch.hpp"
#include "sabfl/harness/report.hpp"
#include "sabfl/protocol/protocol.hpp"
#include "sabfl/util/error.hpp"

namespace sabfl {
namespace {

struct Options {
  std::string config, matrix, chain, results;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::size_t threads = 0;
};

int do_run(const Options& o, std::ostream& out) {
  RunConfig cfg = load_run_config(o.config);
  if (o.seed) cfg.seed = *o.seed;
  if (o.threads) cfg.threads = o.threads;
  std::optional<std::filesystem::path> dir;
  if (!o.out.empty()) dir = o.out;
  const RunReport rep = run_experiment(cfg, dir);
  out << "rounds " << rep.rounds.size() << '\n'
      << "final_accuracy " << std::setprecision(6) << std::fixed << rep.final_accuracy << '\n'
      << "chain_tip " << to_hex(rep.chain_tip) << '\n';
  if (rep.fault) {
    out << "fault " << *rep.fault << '\n';
    return kExitFailed;
  }
  return kExitOk;
}

int do_batch(const Options& o, std::ostream& out) {
  const ExperimentMatrix m = load_matrix(o.matrix);
  BatchOptions opts;
  opts.jobs = std::max<std::size_t>(1, o.jobs);
  opts.seed = o.seed;
  const std::filesystem::path dir = o.out.empty() ? std::filesystem::path("results") : std::filesystem::path(o.out);
  const auto runs = run_batch(m, dir, opts);
  int code = kExitOk;
  for (const auto& r : runs) {
    out << r.label << " rep" << r.repeat << " seed " << r.seed << " accuracy " << std::setprecision(6) << std::fixed
        << r.final_accuracy << " tip " << r.chain_tip;
    if (r.fault) {
      out << " fault " << *r.fault;
      code = kExitFailed;
    }
    out << '\n';
  }
  out << "report written to " << dir.string() << '\n';
  return code;
}

int do_validate(const Options& o, std::ostream& out) {
  const std::filesystem::path p = o.chain;
  const ChainFiles files = std::filesystem::is_directory(p) ? ChainFiles::in_dir(p) : ChainFiles::beside(p);
  for (const auto& f : {files.jsonl, files.weights}) {
    if (!std::filesystem::exists(f)) throw ConfigError("missing chain file " + f.string());
  }
  const ValidationResult res = validate_chain_files(files);
  if (res.ok()) {
    out << "chain valid\n";
    return kExitOk;
  }
  out << "chain invalid: " << to_string(res.code) << " at round " << res.round << ": " << res.detail << '\n';
  return kExitFailed;
}

int do_report(const Options& o, std::ostream& out) {
  std::optional<std::filesystem::path> dest;
  if (!o.out.empty()) dest = o.out;
  const ReportFiles f = emit_report(o.results, dest);
  out << "wrote " << f.comparison.string() << ", " << f.robustness.string() << ", " << f.rankings.string() << ", "
      << f.trends.string() << '\n';
  return kExitOk;
}

int do_convergence(const Options& o, std::ostream& out) {
  ConvergenceCheckConfig c = load_convergence_config(o.config);
  if (o.seed) c.seed = *o.seed;
  if (o.threads) c.threads = o.threads;
  const ConvergenceCheck res =
      run_convergence_check(c.spec(), c.theory, c.seeds(), c.checkpoints, c.decay_threshold, c.threads);
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    write_trace_csv(std::filesystem::path(o.out) / "trace.csv", res.mean);
  }
  out << std::setprecision(6) << std::scientific;
  for (auto cp : res.checkpoints) {
    out << "R=" << cp << " cum_lhs " << res.mean.cum_lhs[cp - 1] << " rhs " << res.mean.rhs[cp - 1] << ' '
        << (res.mean.cum_lhs[cp - 1] <= res.mean.rhs[cp - 1] ? "PASS" : "FAIL") << '\n';
  }
  out << "bound " << (res.bound_holds ? "PASS" : "FAIL") << '\n';
  if (res.checkpoints.size() >= 2) {
    out << "decay ratio " << res.decay_ratio << " threshold " << c.decay_threshold << ' '
        << (res.decay_holds ? "PASS" : "FAIL") << '\n';
  }
  const bool ok = res.bound_holds && (res.checkpoints.size() < 2 || res.decay_holds);
  return ok ? kExitOk : kExitFailed;
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"SABFL simulator: softmax-aggregated blockchain federated learning", "sabfl"};
  app.require_subcommand(1, 1);
  Options o;
  std::uint64_t seed = 0;

  auto* run = app.add_subcommand("run", "Run one experiment from a config file");
  run->add_option("config", o.config, "Run config file")->required();
  run->add_option("--out", o.out, "Output directory for chain, rounds.csv and summary.json");
  run->add_option("--seed", seed, "Override the config seed");
  run->add_option("--threads", o.threads, "Worker threads inside a round");

  auto* batch = app.add_subcommand("batch", "Run an experiment matrix and write report tables");
  batch->add_option("matrix", o.matrix, "Experiment matrix file")->required();
  batch->add_option("--out", o.out, "Results directory (default: results)");
  batch->add_option("--seed", seed, "Override every cell's base seed");
  batch->add_option("--jobs", o.jobs, "Parallel runs");

  auto* validate = app.add_subcommand("validate", "Validate a persisted chain");
  validate->add_option("chain", o.chain, "chain.jsonl or its directory")->required();

  auto* report = app.add_subcommand("report", "Summarise a results directory");
  report->add_option("results", o.results, "Results directory")->required();
  report->add_option("--out", o.out, "Where to write the tables (default: the results directory)");

  auto* conv = app.add_subcommand("convergence-check", "Numerical check of the convergence bound");
  conv->add_option("config", o.config, "Convergence-check config file")->required();
  conv->add_option("--out", o.out, "Directory for trace.csv");
  conv->add_option("--seed", seed, "Override the base seed");
  conv->add_option("--threads", o.threads, "Parallel seeds");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n' << "run with --help for usage\n";
    return kExitUsage;
  }
  for (auto* sub : {run, batch, conv}) {
    if (sub->parsed() && sub->count("--seed")) o.seed = seed;
  }

  try {
    if (run->parsed()) return do_run(o, out);
    if (batch->parsed()) return do_batch(o, out);
    if (validate->parsed()) return do_validate(o, out);
    if (report->parsed()) return do_report(o, out);
    return do_convergence(o, out);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IngestionError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailed;
  }
}

int cli_dispatch(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return cli_dispatch(args, std::cout, std::cerr);
}

}  // namespace sabfl
