#include <random>

#include <gtest/gtest.h>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/labels.hpp"
#include "support.hpp"

namespace ds = dialogsweep;

namespace {

ds::CodeVector vec(std::array<int, 6> bits) { return ds::CodeVector::from_code_bits(bits); }

template <class F>
ds::CompletionError completion_error(F&& f) {
  try {
    f();
  } catch (const ds::CompletionError& e) {
    return e;
  }
  ADD_FAILURE() << "expected CompletionError";
  return ds::CompletionError(ds::ErrorKind::EmptyCompletion, "", 0, 0, 0, "");
}

}  // namespace

TEST(ParseCompletion, TwoPlainRows) {
  const auto p = ds::parse_completion("0 1 0 0 0 0 0\n1 0 0 0 0 0 0", 2);
  ASSERT_EQ(p.per_utterance.size(), 2u);
  EXPECT_EQ(p.per_utterance[0], vec({0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(p.per_utterance[1], vec({1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(p.none_slot_conflicts, 0u);
}

TEST(ParseCompletion, TooFewRows) {
  const auto e = completion_error([] { ds::parse_completion("0 1 0 0 0 0 0\n1 0 0 0 0 0 0", 3); });
  EXPECT_EQ(e.kind(), ds::ErrorKind::RowCountMismatch);
  EXPECT_EQ(e.found(), 2u);
  EXPECT_EQ(e.expected(), 3u);
}

TEST(ParseCompletion, NonBinaryToken) {
  const auto e = completion_error([] { ds::parse_completion("0 1 2 0 0 0 0", 1); });
  EXPECT_EQ(e.kind(), ds::ErrorKind::MalformedRow);
  EXPECT_EQ(e.row_index(), 0u);
  EXPECT_NE(e.excerpt().find("0 1 2"), std::string::npos);
}

TEST(ParseCompletion, WrongWidth) {
  EXPECT_EQ(completion_error([] { ds::parse_completion("0 1 0 0 0 0", 1); }).kind(),
            ds::ErrorKind::MalformedRow);
}

TEST(ParseCompletion, EmptyCompletion) {
  EXPECT_EQ(completion_error([] { ds::parse_completion("  \n\t", 1); }).kind(),
            ds::ErrorKind::EmptyCompletion);
}

TEST(ParseCompletion, IgnoresReasoningAndProse) {
  const std::string text =
      "<think>\nFirst guess:\n1 1 1 1 1 1 0\nHmm, 0 0 0 0 0 0 1 no.\n</think>\n"
      "Here are the labels:\n\n1. 0 0 0 0 1 0 0\n2: 1, 0, 1, 0, 0, 0, 0\n\nHope this helps!";
  const auto p = ds::parse_completion(text, 2);
  EXPECT_EQ(p.per_utterance[0], vec({0, 0, 0, 0, 1, 0}));
  EXPECT_EQ(p.per_utterance[1], vec({1, 0, 1, 0, 0, 0}));
}

TEST(ParseCompletion, LastMatchingBlockWins) {
  const auto p = ds::parse_completion("1 0 0 0 0 0 0\n\nsome text\n0 0 0 0 0 1 0\n", 1);
  EXPECT_EQ(p.per_utterance[0], vec({0, 0, 0, 0, 0, 1}));
}

TEST(ParseCompletion, NoneSlotIsRederived) {
  const auto p = ds::parse_completion("0 0 0 0 0 0 0\n1 0 0 0 0 0 1", 2);
  EXPECT_TRUE(p.per_utterance[0].none());
  EXPECT_EQ(p.per_utterance[1].bit(6), 0);
  EXPECT_EQ(p.none_slot_conflicts, 2u);
}

TEST(ParseCompletion, FormatRoundTripProperty) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> len(1, 70);
  for (int round = 0; round < 300; ++round) {
    std::vector<ds::CodeVector> v(len(rng));
    for (auto& x : v) x = testsupport::random_vector(rng, false);
    const auto p = ds::parse_completion(ds::format_rows(v), v.size());
    EXPECT_EQ(p.per_utterance, v);
    EXPECT_EQ(p.none_slot_conflicts, 0u);
  }
}

TEST(Fallback, IsAllZeroWithNoneSet) {
  const auto f = ds::fallback_vector();
  EXPECT_EQ(f.bits(), (std::array<int, 7>{0, 0, 0, 0, 0, 0, 1}));
}
