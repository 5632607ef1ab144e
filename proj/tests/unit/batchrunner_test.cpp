#include <random>

#include <gtest/gtest.h>

#include "dialogsweep/batchrunner.hpp"
#include "dialogsweep/errors.hpp"
#include "dialogsweep/metrics.hpp"
#include "support.hpp"

namespace ds = dialogsweep;
using testsupport::synthetic_corpus;

namespace {

std::vector<std::size_t> lengths(const ds::BatchPlan& plan) {
  std::vector<std::size_t> out;
  for (const auto& b : plan.batches) out.push_back(b.utterances.size());
  return out;
}

std::vector<ds::CodeVector> gold_in_plan_order(const ds::BatchPlan& plan) {
  std::vector<ds::CodeVector> g;
  for (const auto& b : plan.batches) {
    for (const auto& u : b.utterances) g.push_back(*u.gold);
  }
  return g;
}

// Replies with an empty completion for every request.
class SilentTransport final : public ds::ModelTransport {
 public:
  std::string send(const ds::RenderedPrompt&, const ds::ModelConfig&) override { return "  "; }
};

// Garbage on the first attempt for each batch, gold afterwards.
class FlakyTransport final : public ds::ModelTransport {
 public:
  explicit FlakyTransport(const ds::Corpus& c) : echo_(ds::MockTransport::echo_gold(c)) {}
  std::string send(const ds::RenderedPrompt& p, const ds::ModelConfig& m) override {
    if (seen_.insert(p.targets.front()).second) return "sorry";
    return echo_.send(p, m);
  }

 private:
  ds::MockTransport echo_;
  std::set<ds::UtteranceKey> seen_;
};

}  // namespace

TEST(PlanBatches, SplitsWithinSession) {
  EXPECT_EQ(lengths(ds::plan_batches(synthetic_corpus({45}), 20, ds::PromptDesign())),
            (std::vector<std::size_t>{20, 20, 5}));
  EXPECT_EQ(lengths(ds::plan_batches(synthetic_corpus({25, 30}), 20, ds::PromptDesign())),
            (std::vector<std::size_t>{20, 5, 20, 10}));
}

TEST(PlanBatches, BatchSizeOneGivesOneBatchPerUtterance) {
  const auto c = synthetic_corpus({300, 400, 357});
  EXPECT_EQ(ds::plan_batches(c, 1, ds::PromptDesign()).batches.size(), 1057u);
}

TEST(PlanBatches, RejectsInvalidBatchSize) {
  try {
    ds::plan_batches(synthetic_corpus({3}), 0, ds::PromptDesign());
    FAIL();
  } catch (const ds::Error& e) {
    EXPECT_EQ(e.kind(), ds::ErrorKind::InvalidBatchSize);
  }
}

TEST(PlanBatches, HistoryHoldsUpToThreePrecedingUtterances) {
  const auto plan = ds::plan_batches(synthetic_corpus({10}), 4, ds::PromptDesign());
  ASSERT_EQ(plan.batches.size(), 3u);
  EXPECT_TRUE(plan.batches[0].history.empty());
  ASSERT_EQ(plan.batches[1].history.size(), 3u);
  EXPECT_EQ(plan.batches[1].history.front().utterance_id, 2);
  EXPECT_EQ(plan.batches[1].history.back().utterance_id, 4);
}

TEST(PlanBatches, StandardBatchSizesAreTagged) {
  EXPECT_TRUE(ds::plan_batches(synthetic_corpus({3}), 10, ds::PromptDesign()).standard_batch_size());
  EXPECT_FALSE(ds::plan_batches(synthetic_corpus({3}), 7, ds::PromptDesign()).standard_batch_size());
}

TEST(PlanBatches, PartitionProperty) {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> sessions(1, 4), size(1, 40);
  for (int round = 0; round < 40; ++round) {
    std::vector<int> sizes(sessions(rng));
    for (auto& s : sizes) s = size(rng);
    const auto c = synthetic_corpus(sizes, round);
    const auto flat = c.flatten();
    for (int k = 1; k <= 10; ++k) {
      const auto plan = ds::plan_batches(c, k, ds::PromptDesign());
      std::vector<ds::Utterance> joined;
      for (const auto& b : plan.batches) {
        EXPECT_LE(b.utterances.size(), static_cast<std::size_t>(k));
        for (const auto& u : b.utterances) {
          EXPECT_EQ(u.session_id, b.session_id);
          joined.push_back(u);
        }
      }
      EXPECT_EQ(joined, flat);
      EXPECT_EQ(plan.utterance_count(), flat.size());
    }
  }
}

TEST(Classify, EchoGoldReproducesGold) {
  const auto c = synthetic_corpus({23, 17});
  const ds::PromptRenderer renderer;
  for (auto v : ds::kAllVariants) {
    for (int k : {1, 7, 20}) {
      const auto plan = ds::plan_batches(c, k, ds::PromptDesign(v));
      auto mock = ds::MockTransport::echo_gold(c);
      const auto out = ds::classify(plan, {}, renderer, mock);
      EXPECT_EQ(out.predictions.per_utterance, gold_in_plan_order(plan));
      EXPECT_EQ(out.predictions.fallback_count, 0u);
      EXPECT_EQ(out.request_count, plan.batches.size());
      EXPECT_EQ(out.retry_count, 0u);
      EXPECT_DOUBLE_EQ(ds::multilabel_metrics(gold_in_plan_order(plan), out.predictions.per_utterance).f1_macro, 1.0);
    }
  }
}

TEST(Classify, GarbageBatchFallsBackAfterOneRetry) {
  const auto c = synthetic_corpus({10});
  const auto plan = ds::plan_batches(c, 10, ds::PromptDesign());
  auto mock = ds::MockTransport::garbage(c, 1.0);
  const auto out = ds::classify(plan, {}, ds::PromptRenderer(), mock);
  EXPECT_EQ(out.predictions.fallback_count, 10u);
  EXPECT_EQ(out.retry_count, 1u);
  EXPECT_EQ(out.request_count, 1u);
  ASSERT_EQ(out.fallbacks.size(), 1u);
  EXPECT_EQ(out.fallbacks[0].size, 10u);
  EXPECT_NE(out.fallbacks[0].raw_completion.find("unable"), std::string::npos);
  for (const auto& v : out.predictions.per_utterance) EXPECT_EQ(v, ds::fallback_vector());
}

TEST(Classify, RetrySucceedsWithoutFallback) {
  const auto c = synthetic_corpus({12});
  const auto plan = ds::plan_batches(c, 5, ds::PromptDesign());
  FlakyTransport flaky(c);
  const auto out = ds::classify(plan, {}, ds::PromptRenderer(), flaky);
  EXPECT_EQ(out.retry_count, 3u);
  EXPECT_EQ(out.predictions.fallback_count, 0u);
  EXPECT_EQ(out.predictions.per_utterance, gold_in_plan_order(plan));
  EXPECT_LE(out.retry_count, out.request_count);
}

TEST(Classify, RepeatedEmptyCompletionIsRefusal) {
  const auto c = synthetic_corpus({3});
  SilentTransport silent;
  try {
    ds::classify(ds::plan_batches(c, 3, ds::PromptDesign()), {}, ds::PromptRenderer(), silent);
    FAIL();
  } catch (const ds::Error& e) {
    EXPECT_EQ(e.kind(), ds::ErrorKind::ModelRefusal);
  }
}

TEST(Classify, DeterministicAcrossRuns) {
  const auto c = synthetic_corpus({30, 30});
  const auto plan = ds::plan_batches(c, 10, ds::PromptDesign(ds::PromptVariant::RulesContext));
  auto a = ds::MockTransport::garbage(c, 0.3);
  auto b = ds::MockTransport::garbage(c, 0.3);
  const auto x = ds::classify(plan, {}, ds::PromptRenderer(), a);
  const auto y = ds::classify(plan, {}, ds::PromptRenderer(), b);
  EXPECT_EQ(x.predictions.per_utterance, y.predictions.per_utterance);
  EXPECT_EQ(x.predictions.fallback_count, y.predictions.fallback_count);
  EXPECT_EQ(x.keys, y.keys);
}
