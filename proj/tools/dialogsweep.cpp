#include <cstdlib>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "dialogsweep/clock.hpp"
#include "dialogsweep/corpus.hpp"
#include "dialogsweep/errors.hpp"
#include "dialogsweep/promptkit.hpp"
#include "dialogsweep/report.hpp"
#include "dialogsweep/sweep.hpp"
#include "dialogsweep/telemetry.hpp"
#include "dialogsweep/transport.hpp"
#include "dialogsweep_oracles/oracles.hpp"

namespace ds = dialogsweep;
namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kUsage = 1, kData = 2, kTransport = 3 };

int exit_code_for(const ds::Error& e) {
  switch (e.kind()) {
    case ds::ErrorKind::Transport:
    case ds::ErrorKind::ModelRefusal:
    case ds::ErrorKind::MeterUnavailable:
    case ds::ErrorKind::MeterBusy:
      return kTransport;
    case ds::ErrorKind::Config:
    case ds::ErrorKind::InvalidBatchSize:
      return kUsage;
    default:
      return kData;
  }
}

struct SweepArgs {
  fs::path config;
  std::string mock;
  std::string endpoint;
  fs::path output;
  bool no_report = false;
};

struct ParetoArgs {
  fs::path runs;
  fs::path objectives;
  fs::path out;
  double max_time = ds::kDefaultMaxTimeS;
  double reduce_threshold = ds::kDefaultReduceThreshold;
};

void print_front(const ds::ParetoReport& rep) {
  auto members = [](const ds::FrontAnalysis& fa) {
    std::string s;
    for (std::size_t i = 0; i < fa.front.members.size(); ++i) {
      const auto idx = fa.front.member_indices[i];
      s += (s.empty() ? "" : " ") + fa.front.members[i].config.label();
      if (fa.status[idx].rounding_tie) s += "*";
    }
    return s;
  };
  if (rep.reduction_note) fmt::print("reduction: {}\n", *rep.reduction_note);
  fmt::print("front ({}): {}\n", rep.unfiltered.front.members.size(), members(rep.unfiltered));
  fmt::print("excluded by time bound: {}\n", rep.feasibility.excluded.size());
  if (rep.feasibility.warning) fmt::print("warning: {}\n", *rep.feasibility.warning);
  if (!rep.feasibility.kept.empty()) {
    fmt::print("feasible front ({}): {}\n", rep.feasible.front.members.size(), members(rep.feasible));
  }
  fmt::print("(* = rounding tie)\n");
}

int run_sweep_verb(const SweepArgs& args) {
  ds::SweepConfig config = ds::load_sweep_config(args.config);
  config.model = ds::apply_endpoint_env(config.model);
  if (!args.endpoint.empty()) config.model.endpoint_url = args.endpoint;
  if (!args.output.empty()) config.output_dir = args.output;
  if (!args.mock.empty()) config.transport = args.mock;
  config.validate();

  const ds::Corpus corpus = ds::load_sweep_corpus(config);
  const ds::PromptRenderer renderer(config.prompt_assets ? ds::load_prompt_assets(*config.prompt_assets)
                                                         : ds::default_prompt_assets());

  std::unique_ptr<ds::Clock> clock;
  std::unique_ptr<ds::ModelTransport> transport;
  ds::ManualClock* manual = nullptr;
  if (args.mock.empty()) {
    clock = std::make_unique<ds::SteadyClock>();
    transport = std::make_unique<ds::HttpChatTransport>();
  } else {
    auto mc = std::make_unique<ds::ManualClock>();
    manual = mc.get();
    clock = std::move(mc);
    auto mock = std::make_unique<ds::MockTransport>(ds::make_mock(args.mock, corpus));
    mock->with_clock(manual, ds::MockTransport::Latency{});
    transport = std::move(mock);
  }

  std::unique_ptr<ds::EnergyMeter> meter;
  if (config.meter.mode == ds::MeterConfig::Mode::Hardware && !manual) {
    meter = std::make_unique<ds::HardwareEnergyMeter>();
  } else {
    meter = std::make_unique<ds::SimulatedEnergyMeter>(*clock, config.meter.cpu_w,
                                                       config.meter.gpu_w, config.meter.dram_w);
  }

  fmt::print(stderr, "corpus: {} coded utterances in {} sessions\n", corpus.utterance_count(),
             corpus.session_count());
  fmt::print(stderr, "endpoint: {}\n", args.mock.empty() ? config.model.endpoint_url : "mock:" + args.mock);

  ds::SweepContext ctx{*transport, *clock, *meter, renderer, {}, std::nullopt, {}};
  ctx.on_record = [](const ds::RunRecord& r) {
    fmt::print(stderr, "{:<8} f1={:.4f} time/session={:.2f}s energy/session={:.2f}J fallbacks={}\n",
               ds::ConfigId{r.design, r.batch_size}.label(), r.metrics.f1_macro,
               r.per_session_time_s, r.per_session_energy_j, r.fallback_count);
  };
  const ds::SweepResult result = ds::run_sweep(config, corpus, ctx);
  fmt::print(stderr, "{} configurations recorded in {}\n", result.records.size(),
             config.output_dir.string());

  if (!args.no_report) {
    ds::emit_tables(result, config.output_dir);
    ds::ParetoOptions opt;
    opt.max_time_s = config.feasibility_max_time_s;
    opt.reduce_threshold = config.reduce_threshold;
    print_front(ds::emit_pareto_report(ds::table_from_records(result.records), opt, config.output_dir));
  }
  return kOk;
}

int run_report_verb(const fs::path& runs, const fs::path& out) {
  const ds::SweepResult result = ds::load_sweep_result(runs);
  const fs::path dir = out.empty() ? runs : out;
  for (const auto& p : ds::emit_tables(result, dir)) fmt::print("{}\n", p.string());
  ds::emit_pareto_report(ds::table_from_records(result.records), {}, dir);
  fmt::print("{}\n{}\n", (dir / "pareto.csv").string(), (dir / "pareto.md").string());
  return kOk;
}

int run_pareto_verb(const ParetoArgs& args) {
  ds::ResultTable table;
  fs::path dir = args.out;
  if (!args.runs.empty()) {
    table = ds::table_from_records(ds::load_sweep_result(args.runs).records);
    if (dir.empty()) dir = args.runs;
  } else {
    table = ds::load_objective_csv(args.objectives);
    if (dir.empty()) dir = ".";
  }
  ds::ParetoOptions opt;
  opt.max_time_s = args.max_time;
  opt.reduce_threshold = args.reduce_threshold;
  print_front(ds::emit_pareto_report(table, opt, dir));
  return kOk;
}

int run_stats_verb(const fs::path& path) {
  const ds::Corpus corpus = ds::load_corpus(path);
  if (corpus.empty()) throw ds::Error(ds::ErrorKind::EmptyCorpus, "corpus is empty");
  auto show = [](std::string_view name, const ds::CorpusStats& s) {
    fmt::print("{}: {} utterances, {} sessions, mean {:.2f} per session (sd {:.2f})\n", name,
               s.utterance_count, s.session_count, s.mean_per_session, s.sd_per_session);
  };
  show("all", ds::corpus_stats(corpus));
  const ds::Corpus coded = ds::filter_coded(corpus);
  if (coded.empty()) {
    fmt::print("coded: none\n");
    return kOk;
  }
  show("coded", ds::corpus_stats(coded));
  std::array<std::size_t, ds::kCodeCount> per_code{};
  for (const auto& u : coded.flatten()) {
    for (ds::Code c : ds::kAllCodes) per_code[static_cast<std::size_t>(c)] += u.gold->has(c) ? 1 : 0;
  }
  for (ds::Code c : ds::kAllCodes) {
    fmt::print("  {:<20} {}\n", ds::code_name(c), per_code[static_cast<std::size_t>(c)]);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Batch-size and prompt-design sweeps for LLM dialogue coding"};
  app.set_version_flag("--version", std::string(ds::kHarnessVersion));
  app.require_subcommand(1);

  SweepArgs sweep;
  auto* sweep_cmd = app.add_subcommand("sweep", "run every design x batch-size configuration");
  sweep_cmd->add_option("--config", sweep.config, "INI sweep configuration")->required()->check(CLI::ExistingFile);
  sweep_cmd->add_option("--mock", sweep.mock, "echo-gold | script:<path> | garbage:<rate>");
  sweep_cmd->add_option("--endpoint", sweep.endpoint, "model server URL (overrides $DIALOGSWEEP_ENDPOINT)");
  sweep_cmd->add_option("--output", sweep.output, "output directory (overrides the config)");
  sweep_cmd->add_flag("--no-report", sweep.no_report, "skip tables and the Pareto report");

  fs::path report_runs, report_out;
  auto* report_cmd = app.add_subcommand("report", "write tables and plot data from a sweep directory");
  report_cmd->add_option("--runs", report_runs, "sweep output directory")->required()->check(CLI::ExistingDirectory);
  report_cmd->add_option("--out", report_out, "destination (defaults to --runs)");

  ParetoArgs pareto;
  auto* pareto_cmd = app.add_subcommand("pareto", "Pareto front with objective reduction and a time bound");
  auto* runs_opt = pareto_cmd->add_option("--runs", pareto.runs, "sweep output directory")->check(CLI::ExistingDirectory);
  auto* obj_opt = pareto_cmd->add_option("--objectives", pareto.objectives,
                                         "CSV: design,batch_size,f1,time_s[,energy_j]")->check(CLI::ExistingFile);
  runs_opt->excludes(obj_opt);
  pareto_cmd->add_option("--max-time", pareto.max_time, "per-session time bound in seconds")
      ->check(CLI::PositiveNumber);
  pareto_cmd->add_option("--reduce-threshold", pareto.reduce_threshold,
                         "drop energy when |spearman(time, energy)| reaches this")
      ->check(CLI::Range(0.0, 1.0));
  pareto_cmd->add_option("--out", pareto.out, "destination for pareto.csv and pareto.md");

  auto* validate_cmd = app.add_subcommand("validate", "check metrics and dominance against oracles");

  fs::path stats_corpus;
  auto* stats_cmd = app.add_subcommand("stats", "corpus summary");
  stats_cmd->add_option("--corpus", stats_corpus, "JSONL corpus")->required()->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*sweep_cmd) return run_sweep_verb(sweep);
    if (*report_cmd) return run_report_verb(report_runs, report_out);
    if (*pareto_cmd) {
      if (pareto.runs.empty() && pareto.objectives.empty()) {
        fmt::print(stderr, "pareto: one of --runs or --objectives is required\n");
        return kUsage;
      }
      return run_pareto_verb(pareto);
    }
    if (*validate_cmd) return ds::oracle::selfcheck(std::cout) ? kOk : kData;
    if (*stats_cmd) return run_stats_verb(stats_corpus);
  } catch (const ds::Error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return exit_code_for(e);
  } catch (const std::filesystem::filesystem_error& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kData;
  }
  return kUsage;
}
