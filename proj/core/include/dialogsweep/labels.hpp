#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dialogsweep/corpus.hpp"

namespace dialogsweep {

struct ParsedLabels {
  std::vector<CodeVector> per_utterance;
  // Vectors substituted after a parse failure.
  std::size_t fallback_count = 0;
  // Rows whose seventh token disagreed with the six code bits; the slot is
  // always re-derived from the code bits.
  std::size_t none_slot_conflicts = 0;
};

/// One line of seven space-separated 0/1 tokens per vector.
std::string format_rows(std::span<const CodeVector> vectors);

/// Extracts `expected_rows` label rows from a completion. Reasoning text
/// (including <think> sections) and surrounding prose are ignored: the
/// completion is split into blocks of consecutive row-like lines and the
/// last block holding exactly `expected_rows` valid rows wins.
///
/// Rows may carry an enumeration prefix ("3." / "3:" / "3)").
ParsedLabels parse_completion(std::string_view text, std::size_t expected_rows);

/// All code bits zero, none-slot 1.
inline CodeVector fallback_vector() { return CodeVector{}; }

}  // namespace dialogsweep
