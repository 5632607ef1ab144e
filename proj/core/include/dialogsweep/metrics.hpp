#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialogsweep/corpus.hpp"

namespace dialogsweep {

struct LabelCounts {
  std::size_t tp = 0, fp = 0, fn = 0, tn = 0;

  friend bool operator==(const LabelCounts&, const LabelCounts&) = default;
};

/// Per-code confusion counts; every row sums to the utterance count.
struct ConfusionCounts {
  std::array<LabelCounts, kCodeCount> per_code{};
  std::size_t utterances = 0;

  const LabelCounts& operator[](Code c) const { return per_code[static_cast<std::size_t>(c)]; }
  friend bool operator==(const ConfusionCounts&, const ConfusionCounts&) = default;
};

struct LabelScores {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Macro values average the six codes; the none-slot is excluded. Ratios with
/// a zero denominator are 0.
struct MetricsReport {
  double f1_macro = 0.0;
  double precision_macro = 0.0;
  double recall_macro = 0.0;
  double subset_accuracy = 0.0;  // exact match over all seven slots
  std::array<LabelScores, kCodeCount> per_label{};
  ConfusionCounts counts;

  double per_label_f1(Code c) const { return per_label[static_cast<std::size_t>(c)].f1; }
};

ConfusionCounts confusion_counts(std::span<const CodeVector> gold, std::span<const CodeVector> pred);
LabelScores label_scores(const LabelCounts& counts);
MetricsReport multilabel_metrics(std::span<const CodeVector> gold, std::span<const CodeVector> pred);

/// Landis & Koch agreement bands.
std::string_view kappa_band(double kappa);
inline constexpr double kKappaThreshold = 0.61;

double cohens_kappa(std::span<const int> rater_a, std::span<const int> rater_b);

struct CodeAgreement {
  Code code = Code::TaskAllocation;
  double kappa = 0.0;
  std::string_view band;
  bool meets_threshold = false;  // kappa >= 0.61
};

/// Per-code kappa between two coders' label vectors.
std::vector<CodeAgreement> agreement_report(std::span<const CodeVector> rater_a,
                                            std::span<const CodeVector> rater_b);

struct WerReport {
  std::size_t substitutions = 0;
  std::size_t deletions = 0;
  std::size_t insertions = 0;
  std::size_t reference_words = 0;
  double wer = 0.0;
};

WerReport wer(std::span<const std::string> reference, std::span<const std::string> hypothesis);
/// Whitespace tokenisation helper.
std::vector<std::string> split_words(std::string_view text);

/// Average ranks (1-based; ties share their mean rank).
std::vector<double> average_ranks(std::span<const double> values);
double spearman(std::span<const double> x, std::span<const double> y);

}  // namespace dialogsweep
