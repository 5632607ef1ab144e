#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dialogsweep/corpus.hpp"

namespace dialogsweep {

struct CodebookExample {
  std::string text;
  // True for examples shipped with the harness rather than taken from the
  // original coding scheme.
  bool harness_supplied = false;
};

struct CodebookEntry {
  Code code = Code::TaskAllocation;
  std::string definition;
  std::vector<CodebookExample> examples;  // exactly 3
};

using Codebook = std::vector<CodebookEntry>;

struct DecisionRule {
  std::string condition_text;
  std::vector<Code> implied_codes;  // non-empty
  bool harness_supplied = false;
};

enum class PromptVariant : std::uint8_t {
  FewShot,             // P1
  Rules,               // P2
  RulesContext,        // P3
  RulesMetadata,       // P4
};

inline constexpr std::array<PromptVariant, 4> kAllVariants = {
    PromptVariant::FewShot, PromptVariant::Rules, PromptVariant::RulesContext,
    PromptVariant::RulesMetadata};

/// "P1".."P4".
std::string_view variant_label(PromptVariant variant);
std::optional<PromptVariant> parse_variant(std::string_view label);

class PromptDesign {
 public:
  explicit PromptDesign(PromptVariant variant = PromptVariant::FewShot);

  PromptVariant variant() const noexcept { return variant_; }
  /// Preceding utterances shown per target (3 for P3, else 0).
  int context_window() const noexcept;
  /// Confidence threshold in percent (P3 only).
  std::optional<double> confidence_threshold_pct() const noexcept;
  bool uses_rules() const noexcept { return variant_ != PromptVariant::FewShot; }

  friend bool operator==(const PromptDesign&, const PromptDesign&) = default;
  friend auto operator<=>(const PromptDesign&, const PromptDesign&) = default;

 private:
  PromptVariant variant_;
};

/// (session_id, utterance_id) of an utterance placed in a prompt.
using UtteranceKey = std::pair<std::string, std::int64_t>;

struct RenderedPrompt {
  std::string text;
  std::size_t expected_output_rows = 0;
  PromptDesign design;
  std::vector<UtteranceKey> targets;
};

Codebook default_codebook();
std::vector<DecisionRule> default_rules();

/// Throws CodebookIncomplete unless there is one entry per code with 3 examples each.
void validate_codebook(const Codebook& codebook);

/// Reads codebook/rules overrides from an INI document. Sections named after a
/// code ([task_allocation] definition=, example1..3=) replace that entry;
/// [rule.N] sections (condition=, codes=a,b) replace the whole rule list.
/// Anything not present keeps the embedded default.
struct PromptAssets {
  Codebook codebook;
  std::vector<DecisionRule> rules;
};
PromptAssets default_prompt_assets();
PromptAssets load_prompt_assets(const std::filesystem::path& path);

RenderedPrompt render_prompt(const PromptDesign& design, std::span<const Utterance> batch,
                             std::span<const Utterance> session_history,
                             const Codebook& codebook, std::span<const DecisionRule> rules);

/// Renderer bound to a codebook and rule set; chooses the rule list per design.
class PromptRenderer {
 public:
  explicit PromptRenderer(PromptAssets assets = default_prompt_assets());

  RenderedPrompt render(const PromptDesign& design, std::span<const Utterance> batch,
                        std::span<const Utterance> session_history) const;

  const PromptAssets& assets() const noexcept { return assets_; }

 private:
  PromptAssets assets_;
};

}  // namespace dialogsweep
