#include "dialogsweep/batchrunner.hpp"

#include <algorithm>

#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

constexpr std::size_t kHistoryKept = 3;
constexpr std::size_t kRawKept = 2000;

}  // namespace

bool is_standard_batch_size(int batch_size) {
  return std::find(kStandardBatchSizes.begin(), kStandardBatchSizes.end(), batch_size) !=
         kStandardBatchSizes.end();
}

std::size_t BatchPlan::utterance_count() const {
  std::size_t n = 0;
  for (const auto& b : batches) n += b.utterances.size();
  return n;
}

BatchPlan plan_batches(const Corpus& corpus, int batch_size, const PromptDesign& design) {
  if (batch_size < 1) {
    throw Error(ErrorKind::InvalidBatchSize, "batch size must be >= 1, got " +
                                                 std::to_string(batch_size));
  }
  if (corpus.utterance_count() == 0) throw Error(ErrorKind::EmptyCorpus, "nothing to plan");

  BatchPlan plan;
  plan.design = design;
  plan.batch_size = batch_size;
  const auto k = static_cast<std::size_t>(batch_size);
  for (const auto& session : corpus.sessions()) {
    const auto& utts = session.utterances;
    for (std::size_t start = 0; start < utts.size(); start += k) {
      const std::size_t end = std::min(utts.size(), start + k);
      Batch batch;
      batch.session_id = session.id;
      batch.utterances.assign(utts.begin() + static_cast<std::ptrdiff_t>(start),
                              utts.begin() + static_cast<std::ptrdiff_t>(end));
      const std::size_t hist = std::min(kHistoryKept, start);
      batch.history.assign(utts.begin() + static_cast<std::ptrdiff_t>(start - hist),
                           utts.begin() + static_cast<std::ptrdiff_t>(start));
      plan.batches.push_back(std::move(batch));
    }
  }
  return plan;
}

ClassificationOutcome classify(const BatchPlan& plan, const ModelConfig& model,
                               const PromptRenderer& renderer, ModelTransport& transport) {
  ClassificationOutcome outcome;
  outcome.design = plan.design;
  outcome.batch_size = plan.batch_size;
  outcome.keys.reserve(plan.utterance_count());
  outcome.predictions.per_utterance.reserve(plan.utterance_count());

  for (std::size_t b = 0; b < plan.batches.size(); ++b) {
    const Batch& batch = plan.batches[b];
    const RenderedPrompt prompt = renderer.render(plan.design, batch.utterances, batch.history);
    for (const auto& key : prompt.targets) outcome.keys.push_back(key);

    ++outcome.request_count;
    std::string completion = transport.send(prompt, model);
    std::optional<ParsedLabels> parsed;
    std::string first_error;
    bool first_empty = false;
    try {
      parsed = parse_completion(completion, prompt.expected_output_rows);
    } catch (const CompletionError& e) {
      first_error = e.what();
      first_empty = e.kind() == ErrorKind::EmptyCompletion;
    }

    if (!parsed) {
      ++outcome.retry_count;
      completion = transport.send(prompt, model);
      try {
        parsed = parse_completion(completion, prompt.expected_output_rows);
      } catch (const CompletionError& e) {
        if (first_empty && e.kind() == ErrorKind::EmptyCompletion) {
          throw Error(ErrorKind::ModelRefusal, "empty completion twice for batch " +
                                                   std::to_string(b) + " of session '" +
                                                   batch.session_id + "'");
        }
        FallbackEvent event;
        event.batch_index = b;
        event.session_id = batch.session_id;
        event.size = batch.utterances.size();
        event.error = e.what();
        event.raw_completion = completion.substr(0, kRawKept);
        outcome.fallbacks.push_back(std::move(event));
      }
    }

    auto& preds = outcome.predictions;
    if (parsed) {
      preds.per_utterance.insert(preds.per_utterance.end(), parsed->per_utterance.begin(),
                                 parsed->per_utterance.end());
      preds.none_slot_conflicts += parsed->none_slot_conflicts;
    } else {
      preds.per_utterance.insert(preds.per_utterance.end(), batch.utterances.size(),
                                 fallback_vector());
      preds.fallback_count += batch.utterances.size();
    }
  }
  return outcome;
}

}  // namespace dialogsweep
