#include "dialogsweep/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

double ratio(std::size_t num, std::size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

void check_lengths(std::size_t a, std::size_t b) {
  if (a != b) {
    throw Error(ErrorKind::LengthMismatch,
                "lengths differ: " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

ConfusionCounts confusion_counts(std::span<const CodeVector> gold, std::span<const CodeVector> pred) {
  check_lengths(gold.size(), pred.size());
  ConfusionCounts counts;
  counts.utterances = gold.size();
  for (std::size_t i = 0; i < gold.size(); ++i) {
    for (std::size_t c = 0; c < kCodeCount; ++c) {
      const bool g = gold[i].bit(c) == 1;
      const bool p = pred[i].bit(c) == 1;
      auto& lc = counts.per_code[c];
      if (g && p) ++lc.tp;
      else if (!g && p) ++lc.fp;
      else if (g && !p) ++lc.fn;
      else ++lc.tn;
    }
  }
  return counts;
}

LabelScores label_scores(const LabelCounts& counts) {
  LabelScores s;
  s.precision = ratio(counts.tp, counts.tp + counts.fp);
  s.recall = ratio(counts.tp, counts.tp + counts.fn);
  // Same value as 2PR/(P+R) but exact in integers.
  s.f1 = ratio(2 * counts.tp, 2 * counts.tp + counts.fp + counts.fn);
  return s;
}

MetricsReport multilabel_metrics(std::span<const CodeVector> gold, std::span<const CodeVector> pred) {
  check_lengths(gold.size(), pred.size());
  if (gold.empty()) throw Error(ErrorKind::EmptyInput, "no utterances to score");

  MetricsReport report;
  report.counts = confusion_counts(gold, pred);
  for (std::size_t c = 0; c < kCodeCount; ++c) {
    report.per_label[c] = label_scores(report.counts.per_code[c]);
    report.f1_macro += report.per_label[c].f1;
    report.precision_macro += report.per_label[c].precision;
    report.recall_macro += report.per_label[c].recall;
  }
  report.f1_macro /= static_cast<double>(kCodeCount);
  report.precision_macro /= static_cast<double>(kCodeCount);
  report.recall_macro /= static_cast<double>(kCodeCount);

  std::size_t exact = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) exact += gold[i].bits() == pred[i].bits() ? 1 : 0;
  report.subset_accuracy = ratio(exact, gold.size());
  return report;
}

std::string_view kappa_band(double kappa) {
  if (kappa < 0.0) return "poor";
  if (kappa <= 0.20) return "slight";
  if (kappa <= 0.40) return "fair";
  if (kappa <= 0.60) return "moderate";
  if (kappa <= 0.80) return "substantial";
  return "almost perfect";
}

double cohens_kappa(std::span<const int> rater_a, std::span<const int> rater_b) {
  check_lengths(rater_a.size(), rater_b.size());
  if (rater_a.empty()) throw Error(ErrorKind::EmptyInput, "no ratings");
  // 2x2 table: a = both 1, b = A1/B0, c = A0/B1, d = both 0.
  double a = 0, b = 0, c = 0, d = 0;
  for (std::size_t i = 0; i < rater_a.size(); ++i) {
    const int x = rater_a[i], y = rater_b[i];
    if ((x != 0 && x != 1) || (y != 0 && y != 1)) {
      throw Error(ErrorKind::Schema, "ratings must be 0 or 1");
    }
    if (x && y) ++a;
    else if (x) ++b;
    else if (y) ++c;
    else ++d;
  }
  const double n = a + b + c + d;
  const double po = (a + d) / n;
  const double pe = ((a + b) / n) * ((a + c) / n) + ((c + d) / n) * ((b + d) / n);
  if (pe == 1.0) {
    if (po == 1.0) return 1.0;
    throw Error(ErrorKind::DegenerateTable, "chance agreement is 1 but observed agreement is not");
  }
  return (po - pe) / (1.0 - pe);
}

std::vector<CodeAgreement> agreement_report(std::span<const CodeVector> rater_a,
                                            std::span<const CodeVector> rater_b) {
  check_lengths(rater_a.size(), rater_b.size());
  std::vector<CodeAgreement> out;
  std::vector<int> xa(rater_a.size()), xb(rater_b.size());
  for (Code code : kAllCodes) {
    for (std::size_t i = 0; i < rater_a.size(); ++i) {
      xa[i] = rater_a[i].has(code) ? 1 : 0;
      xb[i] = rater_b[i].has(code) ? 1 : 0;
    }
    CodeAgreement agreement;
    agreement.code = code;
    agreement.kappa = cohens_kappa(xa, xb);
    agreement.band = kappa_band(agreement.kappa);
    agreement.meets_threshold = agreement.kappa >= kKappaThreshold;
    out.push_back(agreement);
  }
  return out;
}

WerReport wer(std::span<const std::string> reference, std::span<const std::string> hypothesis) {
  if (reference.empty()) throw Error(ErrorKind::EmptyReference, "reference has no words");
  const std::size_t n = reference.size(), m = hypothesis.size();

  // cost[i][j]: edit distance between reference[0..i) and hypothesis[0..j).
  std::vector<std::vector<std::size_t>> cost(n + 1, std::vector<std::size_t>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) cost[i][0] = i;
  for (std::size_t j = 0; j <= m; ++j) cost[0][j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    for (std::size_t j = 1; j <= m; ++j) {
      const std::size_t diag = cost[i - 1][j - 1] + (reference[i - 1] == hypothesis[j - 1] ? 0 : 1);
      cost[i][j] = std::min({diag, cost[i - 1][j] + 1, cost[i][j - 1] + 1});
    }
  }

  // Backtrace preferring match/substitution, then deletion, then insertion.
  WerReport report;
  report.reference_words = n;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0) {
      const bool same = reference[i - 1] == hypothesis[j - 1];
      if (cost[i][j] == cost[i - 1][j - 1] + (same ? 0 : 1)) {
        if (!same) ++report.substitutions;
        --i;
        --j;
        continue;
      }
    }
    if (i > 0 && cost[i][j] == cost[i - 1][j] + 1) {
      ++report.deletions;
      --i;
    } else {
      ++report.insertions;
      --j;
    }
  }
  report.wer = static_cast<double>(report.substitutions + report.deletions + report.insertions) /
               static_cast<double>(n);
  return report;
}

std::vector<std::string> split_words(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double mean_rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = mean_rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x.size(), y.size());
  if (x.size() < 2) throw Error(ErrorKind::EmptyInput, "spearman needs at least two pairs");
  for (double v : x) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Schema, "non-finite value in x");
  }
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorKind::Schema, "non-finite value in y");
  }
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) throw Error(ErrorKind::ConstantInput, "constant input to spearman");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

}  // namespace dialogsweep
