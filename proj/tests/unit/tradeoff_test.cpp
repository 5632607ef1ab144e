#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/tradeoff.hpp"
#include "dialogsweep_oracles/oracles.hpp"
#include "support.hpp"

namespace ds = dialogsweep;
using testsupport::config;

namespace {

ds::ObjectivePoint pt(int i, double f1, double time, std::optional<double> energy = std::nullopt) {
  return ds::ObjectivePoint::make(config(0, i), f1, time, energy);
}

std::vector<std::string> labels(const ds::ParetoFront& f) {
  std::vector<std::string> out;
  for (const auto& m : f.members) out.push_back(m.config.label());
  return out;
}

struct RandomSet {
  std::vector<ds::ObjectivePoint> points;
  std::vector<std::vector<double>> raw;
  std::vector<bool> maximize;
};

RandomSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> len(1, 64), dims(2, 3), grid(0, 12);
  RandomSet s;
  const int n = len(rng), m = dims(rng);
  s.maximize = {true, false, false};
  s.maximize.resize(m);
  for (int i = 0; i < n; ++i) {
    std::vector<double> v = {grid(rng) / 12.0, grid(rng) * 10.0, grid(rng) * 3.0};
    v.resize(m);
    s.raw.push_back(v);
    s.points.push_back(pt(i + 1, v[0], v[1], m == 3 ? std::optional<double>(v[2]) : std::nullopt));
  }
  return s;
}

}  // namespace

TEST(Dominates, Examples) {
  EXPECT_TRUE(ds::dominates(pt(1, 0.6, 100), pt(2, 0.5, 120)));
  EXPECT_FALSE(ds::dominates(pt(1, 0.6, 100), pt(2, 0.7, 90)));
  EXPECT_FALSE(ds::dominates(pt(1, 0.6, 100), pt(2, 0.6, 100)));
  EXPECT_FALSE(ds::dominates(pt(2, 0.6, 100), pt(1, 0.6, 100)));
  EXPECT_TRUE(ds::dominates(pt(1, 0.6, 100), pt(2, 0.6, 101)));
}

TEST(Dominates, MismatchedObjectives) {
  try {
    ds::dominates(pt(1, 0.6, 100, 5.0), pt(2, 0.5, 120));
    FAIL();
  } catch (const ds::Error& e) {
    EXPECT_EQ(e.kind(), ds::ErrorKind::ObjectiveMismatch);
  }
}

TEST(Dominates, OrderProperties) {
  std::mt19937_64 rng(31);
  for (int round = 0; round < 100; ++round) {
    const auto s = random_set(rng);
    const auto& p = s.points;
    for (std::size_t i = 0; i < p.size(); ++i) {
      EXPECT_FALSE(ds::dominates(p[i], p[i]));
      for (std::size_t j = 0; j < p.size(); ++j) {
        if (ds::dominates(p[i], p[j])) {
          EXPECT_FALSE(ds::dominates(p[j], p[i]));
          for (std::size_t k = 0; k < p.size(); k += 3) {
            if (ds::dominates(p[j], p[k])) EXPECT_TRUE(ds::dominates(p[i], p[k]));
          }
        }
      }
    }
  }
}

TEST(ParetoFront, SmallExample) {
  const std::vector<ds::ObjectivePoint> pts = {pt(1, 0.9, 100), pt(2, 0.8, 50), pt(3, 0.7, 200)};
  EXPECT_EQ(labels(ds::pareto_front(pts)), (std::vector<std::string>{"P1/b1", "P1/b2"}));
  EXPECT_EQ(ds::pareto_front(std::vector{pt(5, 0.1, 1)}).members.size(), 1u);
}

TEST(ParetoFront, DuplicatesAreAllKept) {
  const std::vector<ds::ObjectivePoint> pts = {pt(1, 0.5, 10), pt(2, 0.5, 10), pt(3, 0.4, 20)};
  EXPECT_EQ(ds::pareto_front(pts).member_indices, (std::vector<std::size_t>{0, 1}));
}

TEST(ParetoFront, EmptyInput) {
  EXPECT_THROW(ds::pareto_front({}), ds::Error);
}

TEST(ParetoFront, MatchesAllPairsOracle) {
  std::mt19937_64 rng(37);
  for (int round = 0; round < 300; ++round) {
    const auto s = random_set(rng);
    const auto front = ds::pareto_front(s.points);
    EXPECT_EQ(front.member_indices, dialogsweep::oracle::pareto_all_pairs(s.raw, s.maximize));
    for (const auto& a : front.members) {
      for (const auto& b : front.members) EXPECT_FALSE(ds::dominates(a, b));
    }
    for (std::size_t i = 0; i < s.points.size(); ++i) {
      const bool member = std::binary_search(front.member_indices.begin(), front.member_indices.end(), i);
      const bool dominated = std::any_of(front.members.begin(), front.members.end(),
                                         [&](const auto& m) { return ds::dominates(m, s.points[i]); });
      EXPECT_NE(member, dominated);
    }
  }
}

TEST(ParetoFront, ScaleInvariance) {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> scale(0.01, 100.0);
  for (int round = 0; round < 100; ++round) {
    auto s = random_set(rng);
    const auto before = ds::pareto_front(s.points).member_indices;
    const double k = scale(rng);
    for (auto& p : s.points) p.set(ds::Objective::Time, *p.get(ds::Objective::Time) * k);
    EXPECT_EQ(ds::pareto_front(s.points).member_indices, before);
  }
}

TEST(ReduceObjectives, DropsCorrelatedEnergy) {
  const auto r = ds::reduce_objectives(testsupport::reference_points(true), ds::Objective::Time,
                                       ds::Objective::Energy, 0.99);
  ASSERT_TRUE(r.note);
  EXPECT_GE(*r.rho, 0.99);
  EXPECT_NE(r.note->find("0.9995"), std::string::npos);
  for (const auto& p : r.points) EXPECT_FALSE(p.energy_j());
}

TEST(ReduceObjectives, KeepsUncorrelated) {
  std::vector<ds::ObjectivePoint> pts;
  const double energy[] = {3, 1, 4, 1, 5, 9, 2, 6};
  const double time[] = {1, 2, 3, 4, 5, 6, 7, 8};
  for (int i = 0; i < 8; ++i) pts.push_back(pt(i + 1, 0.5, time[i], energy[i]));
  const auto r = ds::reduce_objectives(pts, ds::Objective::Time, ds::Objective::Energy, 0.99);
  EXPECT_FALSE(r.note);
  EXPECT_TRUE(r.points[0].energy_j());
}

TEST(ReduceObjectives, IdenticalColumnsDropped) {
  std::vector<ds::ObjectivePoint> pts;
  for (int i = 0; i < 5; ++i) pts.push_back(pt(i + 1, 0.5, i * 2.0, i * 2.0));
  const auto r = ds::reduce_objectives(pts, ds::Objective::Time, ds::Objective::Energy, 0.99);
  EXPECT_DOUBLE_EQ(*r.rho, 1.0);
  EXPECT_TRUE(r.note);
}

TEST(FeasibilityFilter, ReferenceTimesDropBatchOne) {
  const auto r = ds::feasibility_filter(testsupport::reference_points(false), 600);
  EXPECT_EQ(r.excluded.size(), 4u);
  for (const auto& e : r.excluded) EXPECT_EQ(e.point.config.batch_size, 1);
  for (const auto& k : r.kept) EXPECT_NE(k.config.batch_size, 1);
  EXPECT_FALSE(r.warning);
}

TEST(FeasibilityFilter, Bounds) {
  const auto pts = testsupport::reference_points(false);
  EXPECT_EQ(ds::feasibility_filter(pts, 1e300).kept.size(), pts.size());
  const auto none = ds::feasibility_filter(pts, 1.0);
  EXPECT_TRUE(none.kept.empty());
  EXPECT_TRUE(none.warning);
  EXPECT_THROW(ds::feasibility_filter(pts, 0.0), ds::Error);
}

TEST(FeasibilityFilter, FeasibleFrontIsNondominatedWithinFeasibleSet) {
  std::mt19937_64 rng(43);
  for (int round = 0; round < 100; ++round) {
    const auto s = random_set(rng);
    const auto kept = ds::feasibility_filter(s.points, 60.0).kept;
    if (kept.empty()) continue;
    for (const auto& m : ds::pareto_front(kept).members) {
      for (const auto& q : kept) EXPECT_FALSE(ds::dominates(q, m));
    }
  }
}

TEST(AnalyzeFront, RoundingTies) {
  // b2 is dominated by b1 only through a time difference; F1 is equal, so
  // it is within rounding of b1. b3 is clearly dominated on both axes.
  const std::vector<ds::ObjectivePoint> pts = {pt(1, 0.60, 100), pt(2, 0.60, 120), pt(3, 0.50, 200)};
  const auto a = ds::analyze_front(pts);
  EXPECT_TRUE(a.status[0].on_front);
  EXPECT_TRUE(a.status[0].rounding_tie);
  EXPECT_TRUE(a.status[1].rounding_tie);
  EXPECT_EQ(a.status[1].dominated_by, (std::vector<std::size_t>{0}));
  EXPECT_FALSE(a.status[2].rounding_tie);
}
