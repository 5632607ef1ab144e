#include "dialogsweep/tradeoff.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/metrics.hpp"

namespace dialogsweep {
namespace {

constexpr std::array<Objective, kObjectiveCount> kObjectives = {Objective::F1, Objective::Time,
                                                                Objective::Energy};

void check_same_objectives(const ObjectivePoint& a, const ObjectivePoint& b) {
  for (Objective o : kObjectives) {
    if (a.get(o).has_value() != b.get(o).has_value()) {
      throw Error(ErrorKind::ObjectiveMismatch, a.config.label() + " and " + b.config.label() +
                                                    " disagree on objective " +
                                                    std::string(objective_name(o)));
    }
  }
}

// Larger is better after orienting each objective.
double oriented(const ObjectivePoint& p, Objective o) {
  const double v = *p.get(o);
  return direction(o) == Direction::Maximize ? v : -v;
}

void check_points(std::span<const ObjectivePoint> points) {
  for (const auto& p : points) {
    bool any = false;
    for (Objective o : kObjectives) {
      if (auto v = p.get(o)) {
        any = true;
        if (!std::isfinite(*v)) {
          throw Error(ErrorKind::ObjectiveMismatch,
                      p.config.label() + " has a non-finite " + std::string(objective_name(o)));
        }
      }
    }
    if (!any) throw Error(ErrorKind::ObjectiveMismatch, p.config.label() + " has no objectives");
    check_same_objectives(points.front(), p);
  }
}

bool clearly_dominates(const ObjectivePoint& a, const ObjectivePoint& b, double tolerance) {
  if (!dominates(a, b)) return false;
  for (Objective o : kObjectives) {
    if (a.get(o) && std::abs(*a.get(o) - *b.get(o)) <= tolerance) return false;
  }
  return true;
}

}  // namespace

std::string ConfigId::label() const {
  return std::string(variant_label(design.variant())) + "/b" + std::to_string(batch_size);
}

Direction direction(Objective objective) {
  return objective == Objective::F1 ? Direction::Maximize : Direction::Minimize;
}

std::string_view objective_name(Objective objective) {
  switch (objective) {
    case Objective::F1: return "f1";
    case Objective::Time: return "time_s";
    case Objective::Energy: return "energy_j";
  }
  return "?";
}

ObjectivePoint ObjectivePoint::make(ConfigId id, double f1, double time_s,
                                    std::optional<double> energy_j) {
  ObjectivePoint p;
  p.config = id;
  p.set(Objective::F1, f1);
  p.set(Objective::Time, time_s);
  p.set(Objective::Energy, energy_j);
  return p;
}

bool dominates(const ObjectivePoint& a, const ObjectivePoint& b) {
  check_same_objectives(a, b);
  bool strictly_better = false;
  bool any = false;
  for (Objective o : kObjectives) {
    if (!a.get(o)) continue;
    any = true;
    const double x = oriented(a, o), y = oriented(b, o);
    if (x < y) return false;
    if (x > y) strictly_better = true;
  }
  if (!any) throw Error(ErrorKind::ObjectiveMismatch, "points carry no objectives");
  return strictly_better;
}

ParetoFront pareto_front(std::span<const ObjectivePoint> points) {
  if (points.empty()) throw Error(ErrorKind::EmptyInput, "no points");
  check_points(points);

  // Visit points in lexicographically decreasing oriented order; a point can
  // only be dominated by something visited earlier, so each candidate is
  // checked against the archive of accepted members alone.
  std::vector<std::size_t> order(points.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    for (Objective o : kObjectives) {
      if (!points[a].get(o)) continue;
      const double x = oriented(points[a], o), y = oriented(points[b], o);
      if (x != y) return x > y;
    }
    return false;
  });

  std::vector<std::size_t> archive;
  for (std::size_t i : order) {
    const bool dominated = std::any_of(archive.begin(), archive.end(), [&](std::size_t j) {
      return dominates(points[j], points[i]);
    });
    if (!dominated) archive.push_back(i);
  }
  std::sort(archive.begin(), archive.end());

  ParetoFront front;
  front.member_indices = archive;
  for (std::size_t i : archive) front.members.push_back(points[i]);
  return front;
}

ReducedObjectives reduce_objectives(std::span<const ObjectivePoint> points, Objective keep,
                                    Objective drop, double correlation_threshold) {
  std::vector<double> x, y;
  for (const auto& p : points) {
    if (!p.get(keep) || !p.get(drop)) {
      throw Error(ErrorKind::ObjectiveMismatch, p.config.label() + " lacks " +
                                                    std::string(objective_name(keep)) + " or " +
                                                    std::string(objective_name(drop)));
    }
    x.push_back(*p.get(keep));
    y.push_back(*p.get(drop));
  }
  ReducedObjectives out;
  out.points.assign(points.begin(), points.end());
  out.rho = spearman(x, y);
  if (std::abs(*out.rho) >= correlation_threshold) {
    for (auto& p : out.points) p.set(drop, std::nullopt);
    out.note = fmt::format("dropped {}: spearman({}, {}) = {:.5f}, |rho| >= {}",
                           objective_name(drop), objective_name(keep), objective_name(drop),
                           *out.rho, correlation_threshold);
  }
  return out;
}

FeasibilityResult feasibility_filter(std::span<const ObjectivePoint> points, double max_time_s) {
  if (!(max_time_s > 0.0)) throw Error(ErrorKind::Config, "max time must be > 0");
  FeasibilityResult out;
  for (const auto& p : points) {
    auto t = p.get(Objective::Time);
    if (!t) throw Error(ErrorKind::ObjectiveMismatch, p.config.label() + " has no time");
    if (*t <= max_time_s) {
      out.kept.push_back(p);
    } else {
      out.excluded.push_back(
          {p, fmt::format("time {:.2f} s exceeds bound {:.2f} s", *t, max_time_s)});
    }
  }
  if (out.kept.empty() && !points.empty()) {
    out.warning = fmt::format("all {} configurations exceed {:.2f} s", points.size(), max_time_s);
  }
  return out;
}

FrontAnalysis analyze_front(std::span<const ObjectivePoint> points, double tolerance) {
  FrontAnalysis out;
  out.front = pareto_front(points);
  out.status.resize(points.size());
  for (std::size_t m : out.front.member_indices) out.status[m].on_front = true;

  for (std::size_t i = 0; i < points.size(); ++i) {
    auto& st = out.status[i];
    if (st.on_front) continue;
    for (std::size_t m : out.front.member_indices) {
      if (dominates(points[m], points[i])) st.dominated_by.push_back(m);
    }
    bool clearly = false;
    for (std::size_t j = 0; j < points.size() && !clearly; ++j) {
      clearly = j != i && clearly_dominates(points[j], points[i], tolerance);
    }
    st.rounding_tie = !clearly;
  }

  for (std::size_t m : out.front.member_indices) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (out.status[i].on_front || !out.status[i].rounding_tie) continue;
      if (dominates(points[m], points[i])) {
        out.status[m].rounding_tie = true;
        out.status[m].tie_partners.push_back(i);
        out.status[i].tie_partners.push_back(m);
      }
    }
  }
  return out;
}

}  // namespace dialogsweep
