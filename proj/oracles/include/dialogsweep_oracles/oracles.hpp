#pragma once

// Slow, obviously-correct reference implementations. They share no code with
// the library they check.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace dialogsweep::oracle {

using Bits7 = std::array<int, 7>;

struct Counts {
  long tp = 0, fp = 0, fn = 0, tn = 0;
};

struct Recount {
  std::array<Counts, 6> counts{};
  std::array<double, 6> precision{}, recall{}, f1{};
  double f1_macro = 0, precision_macro = 0, recall_macro = 0, subset_accuracy = 0;
};

/// Counts one utterance and one label at a time.
Recount recount(const std::vector<Bits7>& gold, const std::vector<Bits7>& pred);

/// Cohen's kappa of a 2x2 table: a = both 1, b = rater A 1 / B 0,
/// c = A 0 / B 1, d = both 0.
double kappa_from_table(double a, double b, double c, double d);
double kappa(const std::vector<int>& rater_a, const std::vector<int>& rater_b);

/// Levenshtein distance over words, full matrix.
std::size_t edit_distance(const std::vector<std::string>& ref, const std::vector<std::string>& hyp);

/// Ranks by counting smaller and equal values; Pearson on the ranks.
double spearman(const std::vector<double>& x, const std::vector<double>& y);

/// Rows are points, columns objectives; `maximize[j]` gives each direction.
/// Returns the indices no other point dominates, ascending.
std::vector<std::size_t> pareto_all_pairs(const std::vector<std::vector<double>>& points,
                                          const std::vector<bool>& maximize);

/// Randomised comparison of the library against every oracle above. Writes one
/// line per check and returns true when all pass.
bool selfcheck(std::ostream& log, std::uint64_t seed = 42, int rounds = 200);

}  // namespace dialogsweep::oracle
