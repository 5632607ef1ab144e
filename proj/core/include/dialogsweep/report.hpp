#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialogsweep/sweep.hpp"
#include "dialogsweep/tradeoff.hpp"

namespace dialogsweep {

/// One configuration's named numeric columns. Time and energy columns are
/// per session.
struct ResultRow {
  ConfigId config;
  std::map<std::string, double, std::less<>> values;

  std::optional<double> get(std::string_view column) const;
};

/// Rows in (design, batch_size) order.
struct ResultTable {
  std::vector<ResultRow> rows;

  /// True when every row carries the column.
  bool has_column(std::string_view column) const;
};

/// Columns: f1, precision, recall, subset_accuracy, time_s, energy_j,
/// gpu_energy_j, fallback_count and f1_<code> for each code.
ResultTable table_from_records(std::span<const RunRecord> records);

/// CSV with header design,batch_size,f1,time_s[,energy_j][,f1_<code>...].
/// Extra numeric columns are kept by name.
ResultTable parse_objective_csv(std::istream& in);
ResultTable load_objective_csv(const std::filesystem::path& path);

/// Energy is included only when every row has it.
std::vector<ObjectivePoint> objective_points(const ResultTable& table);

struct Correlation {
  std::string x;
  std::string y;
  std::optional<double> rho;
  std::size_t n = 0;
  std::string status;  // "ok", "constant_input", "too_few_points", "missing_column"
};

/// batch_size~time_s, batch_size~f1, time_s~energy_j.
std::vector<Correlation> standard_correlations(const ResultTable& table);

/// Writes runs.csv, time_by_config.csv, f1_by_config.csv, energy_by_config.csv,
/// gpu_energy_by_config.csv, per_label_f1.csv, correlations.csv and
/// plotdata/{time,f1,energy}_vs_batch.csv. Returns the written paths.
std::vector<std::filesystem::path> emit_tables(const SweepResult& result,
                                               const std::filesystem::path& output_dir);

/// design,batch_size,<column> at full precision. Throws MissingColumn when
/// any row lacks the column.
void emit_plot_series(const ResultTable& table, std::string_view column,
                      const std::filesystem::path& file);

struct ParetoOptions {
  double max_time_s = kDefaultMaxTimeS;
  double reduce_threshold = kDefaultReduceThreshold;
  double tie_tolerance = kRoundingTolerance;
};

struct ParetoReport {
  std::vector<ObjectivePoint> points;  // after objective reduction
  std::optional<double> time_energy_rho;
  std::optional<std::string> reduction_note;
  FrontAnalysis unfiltered;
  FeasibilityResult feasibility;
  FrontAnalysis feasible;  // indices refer to feasibility.kept
};

ParetoReport build_pareto_report(const ResultTable& table, const ParetoOptions& options = {});

/// Writes pareto.csv and pareto.md.
ParetoReport emit_pareto_report(const ResultTable& table, const ParetoOptions& options,
                                const std::filesystem::path& output_dir);

}  // namespace dialogsweep
