#include "dialogsweep_oracles/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <span>
#include <string_view>

#include "dialogsweep/corpus.hpp"
#include "dialogsweep/metrics.hpp"
#include "dialogsweep/tradeoff.hpp"

namespace dialogsweep::oracle {
namespace {

double ratio(double num, double den) { return den == 0 ? 0.0 : num / den; }

}  // namespace

Recount recount(const std::vector<Bits7>& gold, const std::vector<Bits7>& pred) {
  Recount r;
  long exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] == pred[i]) ++exact;
    for (int k = 0; k < 6; ++k) {
      const int g = gold[i][k], p = pred[i][k];
      if (g == 1 && p == 1) r.counts[k].tp += 1;
      if (g == 0 && p == 1) r.counts[k].fp += 1;
      if (g == 1 && p == 0) r.counts[k].fn += 1;
      if (g == 0 && p == 0) r.counts[k].tn += 1;
    }
  }
  for (int k = 0; k < 6; ++k) {
    const auto& c = r.counts[k];
    r.precision[k] = ratio(c.tp, c.tp + c.fp);
    r.recall[k] = ratio(c.tp, c.tp + c.fn);
    r.f1[k] = ratio(2.0 * c.tp, 2.0 * c.tp + c.fp + c.fn);
    r.f1_macro += r.f1[k] / 6.0;
    r.precision_macro += r.precision[k] / 6.0;
    r.recall_macro += r.recall[k] / 6.0;
  }
  r.subset_accuracy = gold.empty() ? 0.0 : static_cast<double>(exact) / gold.size();
  return r;
}

double kappa_from_table(double a, double b, double c, double d) {
  const double n = a + b + c + d;
  const double po = (a + d) / n;
  const double pe = ((a + b) / n) * ((a + c) / n) + ((c + d) / n) * ((b + d) / n);
  return (po - pe) / (1.0 - pe);
}

double kappa(const std::vector<int>& x, const std::vector<int>& y) {
  double t[2][2] = {{0, 0}, {0, 0}};
  for (std::size_t i = 0; i < x.size(); ++i) t[x[i]][y[i]] += 1;
  return kappa_from_table(t[1][1], t[1][0], t[0][1], t[0][0]);
}

std::size_t edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp) {
  std::vector<std::vector<std::size_t>> d(ref.size() + 1, std::vector<std::size_t>(hyp.size() + 1));
  for (std::size_t i = 0; i <= ref.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= hyp.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= ref.size(); ++i) {
    for (std::size_t j = 1; j <= hyp.size(); ++j) {
      const std::size_t sub = d[i - 1][j - 1] + (ref[i - 1] == hyp[j - 1] ? 0 : 1);
      d[i][j] = std::min({sub, d[i - 1][j] + 1, d[i][j - 1] + 1});
    }
  }
  return d[ref.size()][hyp.size()];
}

double spearman(const std::vector<double>& x, const std::vector<double>& y) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      double less = 0, equal = 0;
      for (double w : v) {
        if (w < v[i]) less += 1;
        if (w == v[i]) equal += 1;
      }
      r[i] = less + (equal + 1.0) / 2.0;
    }
    return r;
  };
  const auto rx = ranks(x), ry = ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += rx[i] / n;
    my += ry[i] / n;
  }
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

std::vector<std::size_t> pareto_all_pairs(const std::vector<std::vector<double>>& pts,
                                          const std::vector<bool>& maximize) {
  auto better_eq = [&](double a, double b, std::size_t j) { return maximize[j] ? a >= b : a <= b; };
  std::vector<std::size_t> front;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    bool dominated = false;
    for (std::size_t k = 0; k < pts.size() && !dominated; ++k) {
      if (k == i) continue;
      bool all = true, strict = false;
      for (std::size_t j = 0; j < maximize.size(); ++j) {
        if (!better_eq(pts[k][j], pts[i][j], j)) all = false;
        if (pts[k][j] != pts[i][j]) strict = true;
      }
      dominated = all && strict;
    }
    if (!dominated) front.push_back(i);
  }
  return front;
}

bool selfcheck(std::ostream& log, std::uint64_t seed, int rounds) {
  std::mt19937_64 rng(seed);
  bool ok_all = true;
  auto report = [&](std::string_view name, bool ok, int n) {
    log << (ok ? "ok   " : "FAIL ") << name << " (" << n << " cases)\n";
    ok_all = ok_all && ok;
  };

  {
    bool ok = true;
    std::uniform_int_distribution<int> len(1, 50), bit(0, 1);
    for (int r = 0; r < rounds && ok; ++r) {
      const int n = len(rng);
      std::vector<CodeVector> g, p;
      std::vector<Bits7> gb, pb;
      for (int i = 0; i < n; ++i) {
        std::array<int, 6> a{}, b{};
        for (auto& x : a) x = bit(rng);
        for (auto& x : b) x = bit(rng);
        g.push_back(CodeVector::from_code_bits(a));
        p.push_back(CodeVector::from_code_bits(b));
        gb.push_back(g.back().bits());
        pb.push_back(p.back().bits());
      }
      const auto lib = multilabel_metrics(g, p);
      const auto ref = recount(gb, pb);
      ok = std::abs(lib.f1_macro - ref.f1_macro) <= 1e-12 &&
           std::abs(lib.subset_accuracy - ref.subset_accuracy) <= 1e-12;
      for (int k = 0; k < 6 && ok; ++k) {
        const auto& c = lib.counts.per_code[k];
        ok = static_cast<long>(c.tp) == ref.counts[k].tp && static_cast<long>(c.fp) == ref.counts[k].fp &&
             static_cast<long>(c.fn) == ref.counts[k].fn && static_cast<long>(c.tn) == ref.counts[k].tn;
      }
    }
    report("multilabel metrics vs recount", ok, rounds);
  }

  {
    bool ok = std::abs(cohens_kappa(std::vector<int>{1, 1, 0, 0}, std::vector<int>{1, 0, 1, 0}) -
                       kappa({1, 1, 0, 0}, {1, 0, 1, 0})) <= 1e-12;
    std::uniform_int_distribution<int> len(4, 60), bit(0, 1);
    int done = 0;
    while (done < rounds && ok) {
      std::vector<int> a(len(rng)), b(a.size());
      for (auto& x : a) x = bit(rng);
      for (auto& x : b) x = bit(rng);
      double k_ref = kappa(a, b);
      if (!std::isfinite(k_ref)) continue;
      ok = std::abs(cohens_kappa(a, b) - k_ref) <= 1e-12;
      ++done;
    }
    report("cohens kappa vs contingency table", ok, done);
  }

  {
    const std::vector<std::string> vocab = {"call", "for", "help", "now", "oxygen", "mask", "the"};
    std::uniform_int_distribution<int> len(0, 20), word(0, static_cast<int>(vocab.size()) - 1);
    bool ok = true;
    for (int r = 0; r < rounds && ok; ++r) {
      std::vector<std::string> ref(len(rng) + 1), hyp(len(rng));
      for (auto& w : ref) w = vocab[word(rng)];
      for (auto& w : hyp) w = vocab[word(rng)];
      const auto lib = wer(ref, hyp);
      const auto d = edit_distance(ref, hyp);
      ok = lib.substitutions + lib.deletions + lib.insertions == d &&
           std::abs(lib.wer - static_cast<double>(d) / ref.size()) <= 1e-12;
    }
    report("word error rate vs edit distance", ok, rounds);
  }

  {
    std::uniform_int_distribution<int> len(2, 40), small(0, 9);
    bool ok = true;
    int done = 0;
    while (done < rounds && ok) {
      std::vector<double> x(len(rng)), y(x.size());
      for (auto& v : x) v = small(rng);
      for (auto& v : y) v = small(rng);
      const double ref = spearman(x, y);
      if (!std::isfinite(ref)) continue;
      ok = std::abs(dialogsweep::spearman(x, y) - ref) <= 1e-12;
      ++done;
    }
    report("spearman vs naive ranks", ok, done);
  }

  {
    std::uniform_int_distribution<int> len(1, 64), dims(2, 3), grid(0, 15);
    bool ok = true;
    for (int r = 0; r < rounds && ok; ++r) {
      const int n = len(rng), m = dims(rng);
      std::vector<ObjectivePoint> pts;
      std::vector<std::vector<double>> raw;
      for (int i = 0; i < n; ++i) {
        std::vector<double> v = {grid(rng) / 15.0, static_cast<double>(grid(rng)),
                                 static_cast<double>(grid(rng))};
        v.resize(m);
        raw.push_back(v);
        pts.push_back(ObjectivePoint::make({PromptDesign(PromptVariant::FewShot), i + 1}, v[0], v[1],
                                           m == 3 ? std::optional<double>(v[2]) : std::nullopt));
      }
      std::vector<bool> maximize = {true, false, false};
      maximize.resize(m);
      ok = pareto_front(pts).member_indices == pareto_all_pairs(raw, maximize);
    }
    report("pareto front vs all-pairs", ok, rounds);
  }
  return ok_all;
}

}  // namespace dialogsweep::oracle
