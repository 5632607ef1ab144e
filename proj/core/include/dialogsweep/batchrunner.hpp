#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "dialogsweep/corpus.hpp"
#include "dialogsweep/labels.hpp"
#include "dialogsweep/promptkit.hpp"
#include "dialogsweep/transport.hpp"

namespace dialogsweep {

inline constexpr std::array<int, 8> kStandardBatchSizes = {1, 10, 20, 30, 40, 50, 60, 70};

bool is_standard_batch_size(int batch_size);

struct Batch {
  std::string session_id;
  std::vector<Utterance> utterances;
  // Up to three utterances immediately preceding utterances.front() in the
  // same session, oldest first.
  std::vector<Utterance> history;
};

/// Batches never cross sessions; all but the last batch of a session are full.
struct BatchPlan {
  PromptDesign design;
  int batch_size = 1;
  std::vector<Batch> batches;

  std::size_t utterance_count() const;
  bool standard_batch_size() const { return is_standard_batch_size(batch_size); }
};

BatchPlan plan_batches(const Corpus& corpus, int batch_size, const PromptDesign& design);

struct FallbackEvent {
  std::size_t batch_index = 0;
  std::string session_id;
  std::size_t size = 0;
  std::string error;
  std::string raw_completion;
};

struct ClassificationOutcome {
  PromptDesign design;
  int batch_size = 1;
  // Aligned 1:1 with the plan's utterances in plan order.
  std::vector<UtteranceKey> keys;
  ParsedLabels predictions;
  std::size_t request_count = 0;  // one per batch
  std::size_t retry_count = 0;
  std::vector<FallbackEvent> fallbacks;
};

/// Renders, sends and parses every batch strictly in sequence. A batch whose
/// completion fails to parse is re-sent once; if that also fails its
/// utterances get fallback vectors. Two empty completions in a row raise
/// ModelRefusal. Transport errors propagate and abort.
ClassificationOutcome classify(const BatchPlan& plan, const ModelConfig& model,
                               const PromptRenderer& renderer, ModelTransport& transport);

}  // namespace dialogsweep
