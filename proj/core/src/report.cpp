#include "dialogsweep/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/metrics.hpp"

namespace dialogsweep {
namespace {

namespace fs = std::filesystem;

std::string label_column(Code c) { return "f1_" + std::string(code_name(c)); }

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::trunc | std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

void close_out(std::ofstream& out, const fs::path& path) {
  out.close();
  if (!out) throw Error(ErrorKind::Io, "write failure on '" + path.string() + "'");
}

std::string full(double v) { return fmt::format("{}", v); }
std::string two(double v) { return fmt::format("{:.2f}", v); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_number(const std::string& cell, std::size_t line, const std::string& column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used == cell.size()) return v;
  } catch (const std::exception&) {
  }
  throw SchemaError("column " + column + " is not a number", line, cell);
}

std::vector<PromptDesign> designs_of(const ResultTable& t) {
  std::set<PromptDesign> s;
  for (const auto& r : t.rows) s.insert(r.config.design);
  return {s.begin(), s.end()};
}

std::vector<int> batches_of(const ResultTable& t) {
  std::set<int> s;
  for (const auto& r : t.rows) s.insert(r.config.batch_size);
  return {s.begin(), s.end()};
}

const ResultRow* find_row(const ResultTable& t, const ConfigId& id) {
  for (const auto& r : t.rows) {
    if (r.config == id) return &r;
  }
  return nullptr;
}

// Rows are batch sizes, columns are prompt designs.
void write_matrix(const ResultTable& t, std::string_view column, const fs::path& path) {
  const auto designs = designs_of(t);
  auto out = open_out(path);
  out << "batch_size";
  for (const auto& d : designs) out << ',' << variant_label(d.variant());
  out << '\n';
  for (int b : batches_of(t)) {
    out << b;
    for (const auto& d : designs) {
      out << ',';
      const ResultRow* row = find_row(t, {d, b});
      if (auto v = row ? row->get(column) : std::nullopt) out << two(*v);
    }
    out << '\n';
  }
  close_out(out, path);
}

void write_per_label(const ResultTable& t, const fs::path& path) {
  const auto designs = designs_of(t);
  auto out = open_out(path);
  out << "code,batch_size";
  for (const auto& d : designs) out << ',' << variant_label(d.variant());
  out << '\n';
  for (Code c : kAllCodes) {
    for (int b : batches_of(t)) {
      out << code_name(c) << ',' << b;
      for (const auto& d : designs) {
        out << ',';
        const ResultRow* row = find_row(t, {d, b});
        if (auto v = row ? row->get(label_column(c)) : std::nullopt) out << two(*v);
      }
      out << '\n';
    }
  }
  close_out(out, path);
}

void write_runs_csv(std::span<const RunRecord> records, const fs::path& path) {
  auto out = open_out(path);
  out << "design,batch_size,standard_batch_size,total_time_s,per_session_time_s,cpu_j,gpu_j,dram_j,"
         "total_j,per_session_energy_j,f1_macro,precision_macro,recall_macro,subset_accuracy";
  for (Code c : kAllCodes) out << ',' << label_column(c);
  out << ",fallback_count,request_count,retry_count,utterance_count,session_count,meter_mode\n";
  for (const auto& r : records) {
    out << variant_label(r.design.variant()) << ',' << r.batch_size << ','
        << (r.standard_batch_size ? "true" : "false") << ',' << full(r.total_time_s) << ','
        << full(r.per_session_time_s) << ',' << full(r.energy.cpu_j) << ','
        << full(r.energy.gpu_j) << ',' << full(r.energy.dram_j) << ','
        << full(r.energy.total_j) << ',' << full(r.per_session_energy_j) << ','
        << full(r.metrics.f1_macro) << ',' << full(r.metrics.precision_macro) << ','
        << full(r.metrics.recall_macro) << ',' << full(r.metrics.subset_accuracy);
    for (Code c : kAllCodes) out << ',' << full(r.metrics.per_label_f1(c));
    out << ',' << r.fallback_count << ',' << r.request_count << ',' << r.retry_count << ','
        << r.utterance_count << ',' << r.session_count << ",\"" << r.meter_mode << "\"\n";
  }
  close_out(out, path);
}

void write_correlations(const ResultTable& t, const fs::path& path) {
  auto out = open_out(path);
  out << "x,y,rho,n,status\n";
  for (const auto& c : standard_correlations(t)) {
    out << c.x << ',' << c.y << ',' << (c.rho ? full(*c.rho) : std::string()) << ',' << c.n << ','
        << c.status << '\n';
  }
  close_out(out, path);
}

std::string join_labels(std::span<const ObjectivePoint> points, std::span<const std::size_t> idx) {
  std::string s;
  for (std::size_t i : idx) s += (s.empty() ? "" : ";") + points[i].config.label();
  return s;
}

std::string opt_full(std::optional<double> v) { return v ? full(*v) : std::string(); }
std::string opt_two(std::optional<double> v) { return v ? two(*v) : std::string("-"); }

struct StageView {
  bool feasible = false;
  std::optional<std::size_t> feasible_index;
};

std::vector<StageView> stage_views(const ParetoReport& rep) {
  std::vector<StageView> views(rep.points.size());
  std::size_t k = 0;
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    if (k < rep.feasibility.kept.size() && rep.feasibility.kept[k].config == rep.points[i].config) {
      views[i] = {true, k++};
    }
  }
  return views;
}

void write_pareto_csv(const ParetoReport& rep, const fs::path& path) {
  const auto views = stage_views(rep);
  auto out = open_out(path);
  out << "design,batch_size,f1,time_s,energy_j,front,feasible,feasible_front,rounding_tie,"
         "dominated_by\n";
  for (std::size_t i = 0; i < rep.points.size(); ++i) {
    const auto& p = rep.points[i];
    const auto& all = rep.unfiltered.status[i];
    bool feasible_front = false;
    const PointStatus* st = &all;
    const std::span<const ObjectivePoint> pool =
        views[i].feasible ? std::span<const ObjectivePoint>(rep.feasibility.kept)
                          : std::span<const ObjectivePoint>(rep.points);
    if (views[i].feasible) {
      st = &rep.feasible.status[*views[i].feasible_index];
      feasible_front = st->on_front;
    }
    out << variant_label(p.config.design.variant()) << ',' << p.config.batch_size << ','
        << full(p.f1()) << ',' << full(p.time_s()) << ',' << opt_full(p.energy_j()) << ','
        << (all.on_front ? 1 : 0) << ',' << (views[i].feasible ? 1 : 0) << ','
        << (feasible_front ? 1 : 0) << ',' << (st->rounding_tie ? 1 : 0) << ','
        << join_labels(pool, st->dominated_by) << '\n';
  }
  close_out(out, path);
}

void md_front(std::ostream& out, std::span<const ObjectivePoint> pool, const FrontAnalysis& fa,
              const ResultTable& table) {
  out << "| config | f1 | time_s | energy_j | rounding tie |\n";
  out << "|---|---|---|---|---|\n";
  for (std::size_t m : fa.front.member_indices) {
    const auto& p = pool[m];
    const auto& st = fa.status[m];
    out << "| " << p.config.label() << " | " << two(p.f1()) << " | " << two(p.time_s()) << " | "
        << opt_two(p.energy_j()) << " | "
        << (st.rounding_tie ? "yes (" + join_labels(pool, st.tie_partners) + ")" : "") << " |\n";
  }
  out << '\n';

  bool any_dominated = false;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    const auto& st = fa.status[i];
    if (st.on_front) continue;
    if (!any_dominated) {
      out << "Dominated:\n\n";
      any_dominated = true;
    }
    out << "- " << pool[i].config.label() << " by " << join_labels(pool, st.dominated_by);
    if (st.rounding_tie) out << " (rounding tie)";
    out << '\n';
  }
  if (any_dominated) out << '\n';

  bool labels = true;
  for (Code c : kAllCodes) labels = labels && table.has_column(label_column(c));
  if (!labels || fa.front.members.empty()) return;
  out << "Per-label F1 of front members:\n\n| config |";
  for (Code c : kAllCodes) out << ' ' << code_name(c) << " |";
  out << "\n|---|";
  for (std::size_t i = 0; i < kCodeCount; ++i) out << "---|";
  out << '\n';
  for (const auto& p : fa.front.members) {
    const ResultRow* row = find_row(table, p.config);
    out << "| " << p.config.label() << " |";
    for (Code c : kAllCodes) out << ' ' << opt_two(row->get(label_column(c))) << " |";
    out << '\n';
  }
  out << '\n';
}

void write_pareto_md(const ParetoReport& rep, const ParetoOptions& opt, const ResultTable& table,
                     const fs::path& path) {
  auto out = open_out(path);
  out << "# Pareto analysis\n\n";
  out << "Objectives: maximise f1, minimise time_s";
  if (!rep.points.empty() && rep.points.front().energy_j()) out << ", minimise energy_j";
  out << ".\n\n";
  if (rep.reduction_note) {
    out << "Reduction: " << *rep.reduction_note << ".\n\n";
  } else if (rep.time_energy_rho) {
    out << fmt::format("Energy kept: spearman(time_s, energy_j) = {:.5f} < {}.\n\n",
                       *rep.time_energy_rho, opt.reduce_threshold);
  }
  out << fmt::format("Rounding ties use a tolerance of {} per objective.\n\n", opt.tie_tolerance);

  out << "## Front over all configurations\n\n";
  md_front(out, rep.points, rep.unfiltered, table);

  out << fmt::format("## Feasibility (time_s <= {:.2f})\n\n", opt.max_time_s);
  if (rep.feasibility.excluded.empty()) {
    out << "No configuration excluded.\n\n";
  } else {
    for (const auto& e : rep.feasibility.excluded) {
      out << "- " << e.point.config.label() << ": " << e.reason << '\n';
    }
    out << '\n';
  }
  if (rep.feasibility.warning) out << "Warning: " << *rep.feasibility.warning << ".\n\n";

  out << "## Front over feasible configurations\n\n";
  if (rep.feasibility.kept.empty()) {
    out << "Empty.\n";
  } else {
    md_front(out, rep.feasibility.kept, rep.feasible, table);
  }
  close_out(out, path);
}

}  // namespace

std::optional<double> ResultRow::get(std::string_view column) const {
  auto it = values.find(column);
  if (it == values.end()) return std::nullopt;
  return it->second;
}

bool ResultTable::has_column(std::string_view column) const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [&](const ResultRow& r) {
    return r.get(column).has_value();
  });
}

ResultTable table_from_records(std::span<const RunRecord> records) {
  ResultTable t;
  for (const auto& r : records) {
    ResultRow row;
    row.config = {r.design, r.batch_size};
    row.values = {
        {"f1", r.metrics.f1_macro},
        {"precision", r.metrics.precision_macro},
        {"recall", r.metrics.recall_macro},
        {"subset_accuracy", r.metrics.subset_accuracy},
        {"time_s", r.per_session_time_s},
        {"energy_j", r.per_session_energy_j},
        {"gpu_energy_j", per_session(r.energy.gpu_j, r.session_count)},
        {"fallback_count", static_cast<double>(r.fallback_count)},
    };
    for (Code c : kAllCodes) row.values[label_column(c)] = r.metrics.per_label_f1(c);
    t.rows.push_back(std::move(row));
  }
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.config < b.config; });
  return t;
}

ResultTable parse_objective_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (header.empty() && std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) header = split_csv(line);
  }
  if (header.empty()) throw Error(ErrorKind::EmptyInput, "objective CSV is empty");
  for (const char* required : {"design", "batch_size", "f1", "time_s"}) {
    if (std::find(header.begin(), header.end(), required) == header.end()) {
      throw Error(ErrorKind::MissingColumn, std::string("objective CSV lacks column ") + required);
    }
  }

  ResultTable t;
  std::set<ConfigId> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_csv(line);
    if (cells.size() != header.size()) {
      throw SchemaError(fmt::format("expected {} cells, found {}", header.size(), cells.size()),
                        line_no);
    }
    ResultRow row;
    bool have_design = false;
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == "design") {
        auto v = parse_variant(cells[i]);
        if (!v) throw SchemaError("unknown design", line_no, cells[i]);
        row.config.design = PromptDesign(*v);
        have_design = true;
      } else if (header[i] == "batch_size") {
        const double b = parse_number(cells[i], line_no, header[i]);
        if (b < 1 || b != static_cast<int>(b)) throw SchemaError("bad batch size", line_no, cells[i]);
        row.config.batch_size = static_cast<int>(b);
      } else if (!cells[i].empty()) {
        row.values[header[i]] = parse_number(cells[i], line_no, header[i]);
      }
    }
    if (!have_design) throw SchemaError("missing design", line_no);
    if (!seen.insert(row.config).second) {
      throw SchemaError("duplicate configuration " + row.config.label(), line_no);
    }
    t.rows.push_back(std::move(row));
  }
  if (t.rows.empty()) throw Error(ErrorKind::EmptyInput, "objective CSV has no rows");
  std::stable_sort(t.rows.begin(), t.rows.end(),
                   [](const ResultRow& a, const ResultRow& b) { return a.config < b.config; });
  return t;
}

ResultTable load_objective_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return parse_objective_csv(in);
}

std::vector<ObjectivePoint> objective_points(const ResultTable& table) {
  for (const char* c : {"f1", "time_s"}) {
    if (!table.has_column(c)) throw Error(ErrorKind::MissingColumn, std::string("missing ") + c);
  }
  const bool energy = table.has_column("energy_j");
  std::vector<ObjectivePoint> points;
  for (const auto& r : table.rows) {
    points.push_back(ObjectivePoint::make(r.config, *r.get("f1"), *r.get("time_s"),
                                          energy ? r.get("energy_j") : std::nullopt));
  }
  return points;
}

std::vector<Correlation> standard_correlations(const ResultTable& table) {
  const std::pair<const char*, const char*> pairs[] = {
      {"batch_size", "time_s"}, {"batch_size", "f1"}, {"time_s", "energy_j"}};
  std::vector<Correlation> out;
  for (const auto& [xn, yn] : pairs) {
    Correlation c{xn, yn, std::nullopt, table.rows.size(), "ok"};
    std::vector<double> x, y;
    bool missing = false;
    for (const auto& r : table.rows) {
      auto xv = std::string_view(xn) == "batch_size" ? std::optional<double>(r.config.batch_size)
                                                     : r.get(xn);
      auto yv = r.get(yn);
      if (!xv || !yv) {
        missing = true;
        break;
      }
      x.push_back(*xv);
      y.push_back(*yv);
    }
    if (missing) {
      c.status = "missing_column";
    } else {
      try {
        c.rho = spearman(x, y);
      } catch (const Error& e) {
        if (e.kind() == ErrorKind::ConstantInput) c.status = "constant_input";
        else if (e.kind() == ErrorKind::EmptyInput) c.status = "too_few_points";
        else throw;
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void emit_plot_series(const ResultTable& table, std::string_view column, const fs::path& file) {
  if (!table.has_column(column)) {
    throw Error(ErrorKind::MissingColumn, "no recorded column '" + std::string(column) + "'");
  }
  auto out = open_out(file);
  out << "design,batch_size," << column << '\n';
  for (const auto& r : table.rows) {
    out << variant_label(r.config.design.variant()) << ',' << r.config.batch_size << ','
        << full(*r.get(column)) << '\n';
  }
  close_out(out, file);
}

std::vector<fs::path> emit_tables(const SweepResult& result, const fs::path& dir) {
  if (result.records.empty()) throw Error(ErrorKind::EmptyInput, "no run records");
  const ResultTable table = table_from_records(result.records);
  std::vector<fs::path> written;
  auto add = [&](const fs::path& p) {
    written.push_back(p);
    return p;
  };
  write_runs_csv(result.records, add(dir / "runs.csv"));
  write_matrix(table, "time_s", add(dir / "time_by_config.csv"));
  write_matrix(table, "f1", add(dir / "f1_by_config.csv"));
  write_matrix(table, "energy_j", add(dir / "energy_by_config.csv"));
  write_matrix(table, "gpu_energy_j", add(dir / "gpu_energy_by_config.csv"));
  write_per_label(table, add(dir / "per_label_f1.csv"));
  write_correlations(table, add(dir / "correlations.csv"));
  emit_plot_series(table, "time_s", add(dir / "plotdata" / "time_vs_batch.csv"));
  emit_plot_series(table, "f1", add(dir / "plotdata" / "f1_vs_batch.csv"));
  emit_plot_series(table, "energy_j", add(dir / "plotdata" / "energy_vs_batch.csv"));
  return written;
}

ParetoReport build_pareto_report(const ResultTable& table, const ParetoOptions& options) {
  if (table.rows.empty()) throw Error(ErrorKind::EmptyInput, "no configurations");
  ParetoReport rep;
  rep.points = objective_points(table);
  if (rep.points.front().energy_j() && rep.points.size() >= 2) {
    try {
      auto reduced =
          reduce_objectives(rep.points, Objective::Time, Objective::Energy, options.reduce_threshold);
      rep.points = std::move(reduced.points);
      rep.time_energy_rho = reduced.rho;
      rep.reduction_note = std::move(reduced.note);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::ConstantInput) throw;
    }
  }
  rep.unfiltered = analyze_front(rep.points, options.tie_tolerance);
  if (rep.reduction_note) rep.unfiltered.front.reduction_note = rep.reduction_note;
  rep.feasibility = feasibility_filter(rep.points, options.max_time_s);
  if (!rep.feasibility.kept.empty()) {
    rep.feasible = analyze_front(rep.feasibility.kept, options.tie_tolerance);
    if (rep.reduction_note) rep.feasible.front.reduction_note = rep.reduction_note;
  }
  return rep;
}

ParetoReport emit_pareto_report(const ResultTable& table, const ParetoOptions& options,
                                const fs::path& dir) {
  ParetoReport rep = build_pareto_report(table, options);
  write_pareto_csv(rep, dir / "pareto.csv");
  write_pareto_md(rep, options, table, dir / "pareto.md");
  return rep;
}

}  // namespace dialogsweep
