#include "dialogsweep/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <set>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/metrics.hpp"
#include "dialogsweep/tradeoff.hpp"
#include "hash.hpp"

namespace dialogsweep {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr const char* kManifestFile = "manifest.json";
constexpr const char* kRunsFile = "runs.jsonl";
constexpr const char* kFallbackFile = "fallbacks.jsonl";

std::string utc_now() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <class T>
T parse_value(const std::string& section, const std::string& key, const std::string& raw) {
  std::istringstream in(trim(raw));
  T value{};
  if (!(in >> value) || !(in >> std::ws).eof()) {
    throw Error(ErrorKind::Config, "[" + section + "] " + key + ": cannot parse '" + raw + "'");
  }
  return value;
}

json energy_json(const EnergySample& e) {
  return {{"cpu_j", e.cpu_j}, {"gpu_j", e.gpu_j}, {"dram_j", e.dram_j}, {"total_j", e.total_j}};
}

json manifest_json(const Manifest& m) {
  json timings = json::array();
  for (const auto& t : m.timings) {
    timings.push_back({{"config", t.config},
                       {"started_at", t.started_at},
                       {"finished_at", t.finished_at},
                       {"wall_s", t.wall_s}});
  }
  return {{"config_hash", m.config_hash},     {"harness_version", m.harness_version},
          {"meter_mode", m.meter_mode},       {"created_at", m.created_at},
          {"timings", std::move(timings)}};
}

Manifest manifest_from_json(const json& j) {
  Manifest m;
  m.config_hash = j.at("config_hash").get<std::string>();
  m.harness_version = j.value("harness_version", "");
  m.meter_mode = j.value("meter_mode", "");
  m.created_at = j.value("created_at", "");
  for (const auto& t : j.value("timings", json::array())) {
    m.timings.push_back({t.at("config").get<std::string>(), t.value("started_at", ""),
                         t.value("finished_at", ""), t.value("wall_s", 0.0)});
  }
  return m;
}

void write_atomically(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw Error(ErrorKind::Io, "write failure on '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

Manifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object() || !j.contains("config_hash")) {
    throw Error(ErrorKind::Schema, "malformed manifest '" + path.string() + "'");
  }
  return manifest_from_json(j);
}

std::vector<RunRecord> read_records(const fs::path& path) {
  std::vector<RunRecord> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    try {
      out.push_back(record_from_json(line));
    } catch (const Error&) {
      // A torn final line from an interrupted write is dropped; anything
      // else is a real schema problem.
      if (in.peek() != std::char_traits<char>::eof()) throw;
    }
  }
  return out;
}

ConfigId id_of(const RunRecord& r) { return {r.design, r.batch_size}; }

}  // namespace

void SweepConfig::validate() const {
  if (designs.empty()) throw Error(ErrorKind::Config, "no prompt designs selected");
  if (batch_sizes.empty()) throw Error(ErrorKind::Config, "no batch sizes selected");
  for (int b : batch_sizes) {
    if (b < 1) throw Error(ErrorKind::InvalidBatchSize, "batch size " + std::to_string(b));
  }
  if (std::set<PromptDesign>(designs.begin(), designs.end()).size() != designs.size()) {
    throw Error(ErrorKind::Config, "duplicate prompt design");
  }
  if (std::set<int>(batch_sizes.begin(), batch_sizes.end()).size() != batch_sizes.size()) {
    throw Error(ErrorKind::Config, "duplicate batch size");
  }
  if (session_count < 1) throw Error(ErrorKind::ZeroSessions, "session_count must be >= 1");
  if (!(feasibility_max_time_s > 0.0)) throw Error(ErrorKind::Config, "max time must be > 0");
  if (!(reduce_threshold > 0.0 && reduce_threshold <= 1.0)) {
    throw Error(ErrorKind::Config, "reduce threshold must be in (0, 1]");
  }
  model.validate();
  if (meter.cpu_w < 0 || meter.gpu_w < 0 || meter.dram_w < 0) {
    throw Error(ErrorKind::Config, "meter wattages must be >= 0");
  }
}

std::string SweepConfig::hash() const {
  auto designs_sorted = designs;
  std::sort(designs_sorted.begin(), designs_sorted.end());
  auto batches_sorted = batch_sizes;
  std::sort(batches_sorted.begin(), batches_sorted.end());
  json labels = json::array();
  for (const auto& d : designs_sorted) labels.push_back(std::string(variant_label(d.variant())));
  json canonical = {
      {"corpus", corpus_path.generic_string()},
      {"designs", labels},
      {"batch_sizes", batches_sorted},
      {"model", model.model_name},
      {"temperature", model.temperature},
      {"seed", model.seed},
      {"session_count", session_count},
      {"meter", meter.mode == MeterConfig::Mode::Hardware
                    ? std::string("hardware")
                    : fmt::format("simulated:{}:{}:{}", meter.cpu_w, meter.gpu_w, meter.dram_w)},
      {"prompt_assets", prompt_assets ? prompt_assets->generic_string() : std::string()},
      {"transport", transport},
  };
  return detail::fnv1a_hex(canonical.dump());
}

SweepConfig load_sweep_config(const fs::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&](const std::string& p) {
    fs::path q(trim(p));
    return q.is_absolute() ? q : base / q;
  };

  SweepConfig cfg;
  for (const auto& [section, body] : tree) {
    if (!body.data().empty()) {
      throw Error(ErrorKind::Config, "key '" + section + "' outside of a section");
    }
    for (const auto& [key, node] : body) {
      const std::string v = node.data();
      auto bad = [&] { throw Error(ErrorKind::Config, "unknown key [" + section + "] " + key); };
      if (section == "sweep") {
        if (key == "corpus") cfg.corpus_path = resolve(v);
        else if (key == "output_dir") cfg.output_dir = resolve(v);
        else if (key == "designs") {
          cfg.designs.clear();
          for (const auto& d : split_list(v)) {
            auto variant = parse_variant(d);
            if (!variant) throw Error(ErrorKind::Config, "unknown design '" + d + "'");
            cfg.designs.emplace_back(*variant);
          }
        } else if (key == "batch_sizes") {
          cfg.batch_sizes.clear();
          for (const auto& b : split_list(v)) cfg.batch_sizes.push_back(parse_value<int>(section, key, b));
        } else if (key == "session_count") cfg.session_count = parse_value<int>(section, key, v);
        else if (key == "feasibility_max_time_s") cfg.feasibility_max_time_s = parse_value<double>(section, key, v);
        else if (key == "reduce_threshold") cfg.reduce_threshold = parse_value<double>(section, key, v);
        else bad();
      } else if (section == "model") {
        if (key == "endpoint_url") cfg.model.endpoint_url = trim(v);
        else if (key == "model_name") cfg.model.model_name = trim(v);
        else if (key == "temperature") cfg.model.temperature = parse_value<double>(section, key, v);
        else if (key == "seed") cfg.model.seed = parse_value<std::int64_t>(section, key, v);
        else if (key == "request_timeout_s") cfg.model.request_timeout_s = parse_value<double>(section, key, v);
        else if (key == "max_retries") cfg.model.max_retries = parse_value<int>(section, key, v);
        else if (key == "retry_backoff_s") cfg.model.retry_backoff_s = parse_value<double>(section, key, v);
        else bad();
      } else if (section == "meter") {
        if (key == "mode") {
          const auto mode = trim(v);
          if (mode == "simulated") cfg.meter.mode = MeterConfig::Mode::Simulated;
          else if (mode == "hardware") cfg.meter.mode = MeterConfig::Mode::Hardware;
          else throw Error(ErrorKind::Config, "meter mode must be simulated or hardware");
        } else if (key == "cpu_watts") cfg.meter.cpu_w = parse_value<double>(section, key, v);
        else if (key == "gpu_watts") cfg.meter.gpu_w = parse_value<double>(section, key, v);
        else if (key == "dram_watts") cfg.meter.dram_w = parse_value<double>(section, key, v);
        else bad();
      } else if (section == "prompt") {
        if (key == "assets") cfg.prompt_assets = resolve(v);
        else bad();
      } else {
        throw Error(ErrorKind::Config, "unknown section [" + section + "]");
      }
    }
  }
  return cfg;
}

std::string record_to_json(const RunRecord& r) {
  json per_label = json::object();
  for (Code c : kAllCodes) {
    const auto& s = r.metrics.per_label[static_cast<std::size_t>(c)];
    const auto& n = r.metrics.counts[c];
    per_label[std::string(code_name(c))] = {{"precision", s.precision}, {"recall", s.recall},
                                            {"f1", s.f1},               {"tp", n.tp},
                                            {"fp", n.fp},               {"fn", n.fn},
                                            {"tn", n.tn}};
  }
  json j = {
      {"design", std::string(variant_label(r.design.variant()))},
      {"batch_size", r.batch_size},
      {"total_time_s", r.total_time_s},
      {"per_session_time_s", r.per_session_time_s},
      {"energy", energy_json(r.energy)},
      {"per_session_energy_j", r.per_session_energy_j},
      {"metrics",
       {{"f1_macro", r.metrics.f1_macro},
        {"precision_macro", r.metrics.precision_macro},
        {"recall_macro", r.metrics.recall_macro},
        {"subset_accuracy", r.metrics.subset_accuracy},
        {"utterances", r.metrics.counts.utterances},
        {"per_label", per_label}}},
      {"fallback_count", r.fallback_count},
      {"request_count", r.request_count},
      {"retry_count", r.retry_count},
      {"utterance_count", r.utterance_count},
      {"session_count", r.session_count},
      {"meter_mode", r.meter_mode},
      {"standard_batch_size", r.standard_batch_size},
  };
  return j.dump();
}

RunRecord record_from_json(const std::string& line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Schema, "malformed run record");
  try {
    RunRecord r;
    auto variant = parse_variant(j.at("design").get<std::string>());
    if (!variant) throw Error(ErrorKind::Schema, "unknown design in run record");
    r.design = PromptDesign(*variant);
    r.batch_size = j.at("batch_size").get<int>();
    r.total_time_s = j.at("total_time_s").get<double>();
    r.per_session_time_s = j.at("per_session_time_s").get<double>();
    const auto& e = j.at("energy");
    r.energy = {e.at("cpu_j").get<double>(), e.at("gpu_j").get<double>(),
                e.at("dram_j").get<double>(), e.at("total_j").get<double>()};
    r.per_session_energy_j = j.at("per_session_energy_j").get<double>();
    const auto& m = j.at("metrics");
    r.metrics.f1_macro = m.at("f1_macro").get<double>();
    r.metrics.precision_macro = m.at("precision_macro").get<double>();
    r.metrics.recall_macro = m.at("recall_macro").get<double>();
    r.metrics.subset_accuracy = m.at("subset_accuracy").get<double>();
    r.metrics.counts.utterances = m.at("utterances").get<std::size_t>();
    for (Code c : kAllCodes) {
      const auto& pl = m.at("per_label").at(std::string(code_name(c)));
      const auto i = static_cast<std::size_t>(c);
      r.metrics.per_label[i] = {pl.at("precision").get<double>(), pl.at("recall").get<double>(),
                                pl.at("f1").get<double>()};
      r.metrics.counts.per_code[i] = {pl.at("tp").get<std::size_t>(), pl.at("fp").get<std::size_t>(),
                                      pl.at("fn").get<std::size_t>(), pl.at("tn").get<std::size_t>()};
    }
    r.fallback_count = j.at("fallback_count").get<std::size_t>();
    r.request_count = j.at("request_count").get<std::size_t>();
    r.retry_count = j.at("retry_count").get<std::size_t>();
    r.utterance_count = j.at("utterance_count").get<std::size_t>();
    r.session_count = j.at("session_count").get<int>();
    r.meter_mode = j.at("meter_mode").get<std::string>();
    r.standard_batch_size = j.at("standard_batch_size").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("run record: ") + e.what());
  }
}

Corpus load_sweep_corpus(const SweepConfig& config) {
  Corpus coded = filter_coded(load_corpus(config.corpus_path));
  if (coded.empty()) throw Error(ErrorKind::EmptyCorpus, "no coded utterances in corpus");
  return coded;
}

SweepResult run_sweep(const SweepConfig& config, const Corpus& corpus, SweepContext& ctx) {
  config.validate();
  if (corpus.utterance_count() == 0) throw Error(ErrorKind::EmptyCorpus, "corpus is empty");
  auto stamp = ctx.timestamp ? ctx.timestamp : std::function<std::string()>(utc_now);

  const fs::path dir = config.output_dir;
  fs::create_directories(dir);
  const fs::path manifest_path = dir / kManifestFile;
  const fs::path runs_path = dir / kRunsFile;

  SweepResult result;
  const std::string hash = config.hash();
  if (fs::exists(manifest_path)) {
    result.manifest = read_manifest(manifest_path);
    if (result.manifest.config_hash != hash) {
      throw Error(ErrorKind::ResumeConflict, "'" + dir.string() + "' holds a sweep with config hash " +
                                                 result.manifest.config_hash + ", this config is " +
                                                 hash);
    }
  } else {
    result.manifest.config_hash = hash;
    result.manifest.meter_mode = ctx.meter.mode();
    result.manifest.created_at = stamp();
    write_atomically(manifest_path, manifest_json(result.manifest).dump(2) + "\n");
  }

  auto designs = config.designs;
  std::sort(designs.begin(), designs.end());
  auto batch_sizes = config.batch_sizes;
  std::sort(batch_sizes.begin(), batch_sizes.end());

  std::vector<RunRecord> done = read_records(runs_path);
  // Rewrite runs.jsonl without any torn trailing line before appending.
  {
    std::string clean;
    for (const auto& r : done) clean += record_to_json(r) + "\n";
    write_atomically(runs_path, clean);
  }
  std::set<ConfigId> completed;
  for (const auto& r : done) completed.insert(id_of(r));

  std::size_t executed = 0;

  for (const auto& design : designs) {
    for (int batch_size : batch_sizes) {
      const ConfigId id{design, batch_size};
      if (completed.contains(id)) continue;
      if (ctx.max_new_configs && executed >= *ctx.max_new_configs) goto finish;

      const BatchPlan plan = plan_batches(corpus, batch_size, design);
      ConfigTiming timing;
      timing.config = id.label();
      timing.started_at = stamp();
      auto measured = measure(ctx.clock, ctx.meter, [&] {
        return classify(plan, config.model, ctx.renderer, ctx.transport);
      });
      timing.finished_at = stamp();
      timing.wall_s = measured.seconds;
      const ClassificationOutcome& outcome = measured.result;

      std::vector<CodeVector> gold;
      gold.reserve(plan.utterance_count());
      for (const auto& batch : plan.batches) {
        for (const auto& u : batch.utterances) gold.push_back(u.gold.value_or(CodeVector{}));
      }
      RunRecord record = make_run_record(design, batch_size, measured.seconds, measured.energy,
                                         multilabel_metrics(gold, outcome.predictions.per_utterance),
                                         config.session_count);
      record.fallback_count = outcome.predictions.fallback_count;
      record.request_count = outcome.request_count;
      record.retry_count = outcome.retry_count;
      record.utterance_count = plan.utterance_count();
      record.meter_mode = ctx.meter.mode();

      if (!outcome.fallbacks.empty()) {
        std::ofstream log(dir / kFallbackFile, std::ios::app);
        for (const auto& f : outcome.fallbacks) {
          log << json{{"config", id.label()},   {"batch_index", f.batch_index},
                      {"session_id", f.session_id}, {"size", f.size},
                      {"error", f.error},        {"raw_completion", f.raw_completion}}
                     .dump()
              << "\n";
        }
      }
      {
        std::ofstream out(runs_path, std::ios::app);
        out << record_to_json(record) << "\n";
        out.flush();
        if (!out) throw Error(ErrorKind::Io, "cannot append to '" + runs_path.string() + "'");
      }
      result.manifest.timings.push_back(timing);
      write_atomically(manifest_path, manifest_json(result.manifest).dump(2) + "\n");

      if (ctx.on_record) ctx.on_record(record);
      done.push_back(std::move(record));
      completed.insert(id);
      ++executed;
    }
  }
finish:
  std::sort(done.begin(), done.end(),
            [](const RunRecord& a, const RunRecord& b) { return id_of(a) < id_of(b); });
  result.records = std::move(done);
  return result;
}

SweepResult load_sweep_result(const fs::path& dir) {
  SweepResult result;
  result.manifest = read_manifest(dir / kManifestFile);
  if (!fs::exists(dir / kRunsFile)) {
    throw Error(ErrorKind::Io, "no " + std::string(kRunsFile) + " in '" + dir.string() + "'");
  }
  result.records = read_records(dir / kRunsFile);
  std::sort(result.records.begin(), result.records.end(),
            [](const RunRecord& a, const RunRecord& b) { return id_of(a) < id_of(b); });
  return result;
}

}  // namespace dialogsweep
