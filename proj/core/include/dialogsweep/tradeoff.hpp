#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialogsweep/promptkit.hpp"

namespace dialogsweep {

struct ConfigId {
  PromptDesign design;
  int batch_size = 1;

  /// "P4/b1"
  std::string label() const;

  friend bool operator==(const ConfigId&, const ConfigId&) = default;
  friend auto operator<=>(const ConfigId&, const ConfigId&) = default;
};

enum class Objective : std::size_t { F1 = 0, Time = 1, Energy = 2 };
inline constexpr std::size_t kObjectiveCount = 3;

enum class Direction { Maximize, Minimize };

Direction direction(Objective objective);
std::string_view objective_name(Objective objective);

/// A configuration's objective values. Any objective may be absent (e.g.
/// energy after reduction), but points compared together must carry the same
/// set.
struct ObjectivePoint {
  ConfigId config;
  std::array<std::optional<double>, kObjectiveCount> values{};

  static ObjectivePoint make(ConfigId id, double f1, double time_s,
                             std::optional<double> energy_j = std::nullopt);

  std::optional<double> get(Objective o) const { return values[static_cast<std::size_t>(o)]; }
  void set(Objective o, std::optional<double> v) { values[static_cast<std::size_t>(o)] = v; }
  double f1() const { return get(Objective::F1).value(); }
  double time_s() const { return get(Objective::Time).value(); }
  std::optional<double> energy_j() const { return get(Objective::Energy); }
};

/// True iff `a` is no worse than `b` on every objective and strictly better on
/// one. Throws ObjectiveMismatch when the objective sets differ.
bool dominates(const ObjectivePoint& a, const ObjectivePoint& b);

struct ParetoFront {
  std::vector<ObjectivePoint> members;
  std::vector<std::size_t> member_indices;  // positions in the input, ascending
  std::optional<std::string> reduction_note;
};

/// Exactly the non-dominated subset, in input order. Equal points are all kept.
ParetoFront pareto_front(std::span<const ObjectivePoint> points);

struct ReducedObjectives {
  std::vector<ObjectivePoint> points;
  std::optional<double> rho;
  std::optional<std::string> note;  // set when `drop` was removed
};

/// Drops `drop` when |spearman(keep, drop)| >= threshold.
ReducedObjectives reduce_objectives(std::span<const ObjectivePoint> points, Objective keep,
                                    Objective drop, double correlation_threshold);

struct Exclusion {
  ObjectivePoint point;
  std::string reason;
};

struct FeasibilityResult {
  std::vector<ObjectivePoint> kept;
  std::vector<Exclusion> excluded;
  std::optional<std::string> warning;  // set when nothing survives
};

FeasibilityResult feasibility_filter(std::span<const ObjectivePoint> points, double max_time_s);

inline constexpr double kDefaultReduceThreshold = 0.99;
inline constexpr double kDefaultMaxTimeS = 600.0;
// Half a unit in the last place of two-decimal tables.
inline constexpr double kRoundingTolerance = 0.005;

struct PointStatus {
  bool on_front = false;
  std::vector<std::size_t> dominated_by;  // front members (input indices) dominating this point
  // Dominated point: no dominator beats it by more than `tolerance` on every
  // objective, so the verdict could flip under unrounded values.
  // Front member: it dominates at least one such point.
  bool rounding_tie = false;
  std::vector<std::size_t> tie_partners;
};

struct FrontAnalysis {
  ParetoFront front;
  std::vector<PointStatus> status;  // aligned with the input points
};

FrontAnalysis analyze_front(std::span<const ObjectivePoint> points,
                            double tolerance = kRoundingTolerance);

}  // namespace dialogsweep
