#include <sstream>

#include <gtest/gtest.h>

#include "dialogsweep/corpus.hpp"
#include "dialogsweep/errors.hpp"
#include "support.hpp"

namespace ds = dialogsweep;
using testsupport::synthetic_corpus;

namespace {

ds::Corpus parse(const std::string& text) {
  std::istringstream in(text);
  return ds::parse_corpus(in);
}

std::string record(const std::string& sid, int id, const std::string& codes,
                   const std::string& extra = "") {
  return R"({"session_id":")" + sid + R"(","utterance_id":)" + std::to_string(id) +
         R"(,"t_start":)" + std::to_string(id) + R"(,"t_end":)" + std::to_string(id + 1) +
         R"(,"speaker":"primary_nurse_1","text":"u)" + std::to_string(id) + R"(","codes":)" + codes +
         extra + "}\n";
}

ds::ErrorKind kind_of(const std::string& text) {
  try {
    parse(text);
  } catch (const ds::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error for " << text;
  return ds::ErrorKind::Io;
}

}  // namespace

TEST(CodeVector, NoneSlotIsDerived) {
  ds::CodeVector v;
  EXPECT_TRUE(v.none());
  EXPECT_EQ(v.bits(), (std::array<int, 7>{0, 0, 0, 0, 0, 0, 1}));
  v.set(ds::Code::Handover);
  EXPECT_EQ(v.bits(), (std::array<int, 7>{0, 1, 0, 0, 0, 0, 0}));
  EXPECT_EQ(v.bit(6), 0);
}

TEST(CodeVector, FromBitsRejectsNonBinary) {
  EXPECT_THROW(ds::CodeVector::from_code_bits(std::array<int, 6>{0, 2, 0, 0, 0, 0}), ds::Error);
  EXPECT_THROW(ds::CodeVector::from_code_bits(std::array<int, 5>{}), ds::Error);
}

TEST(CodeVector, NoneConsistencyHoldsForEveryPattern) {
  for (int mask = 0; mask < 64; ++mask) {
    std::array<int, 6> bits{};
    for (int k = 0; k < 6; ++k) bits[k] = (mask >> k) & 1;
    const auto v = ds::CodeVector::from_code_bits(bits);
    EXPECT_EQ(v.bit(6) == 1, mask == 0);
    EXPECT_EQ(v.codes().size(), static_cast<std::size_t>(__builtin_popcount(mask)));
  }
}

TEST(Names, CodesAndRolesRoundTrip) {
  for (ds::Code c : ds::kAllCodes) EXPECT_EQ(ds::parse_code(ds::code_name(c)), c);
  EXPECT_EQ(ds::code_name(ds::Code::SharingInformation), "sharing_information");
  EXPECT_FALSE(ds::parse_code("gossip"));
  EXPECT_EQ(ds::parse_role("secondary_nurse_2"), ds::Role::SecondaryNurse2);
  EXPECT_FALSE(ds::parse_role("doctor"));
}

TEST(LoadCorpus, ParsesRecordsAndGroupsSessions) {
  const auto c = parse(record("b", 2, R"(["questioning"])") + record("a", 1, "[]") +
                       record("b", 1, R"(["task_allocation","escalation"])", R"(,"receiver":"other")"));
  ASSERT_EQ(c.session_count(), 2u);
  EXPECT_EQ(c.sessions()[0].id, "b");
  ASSERT_EQ(c.sessions()[0].utterances.size(), 2u);
  const auto& first = c.sessions()[0].utterances[0];
  EXPECT_EQ(first.utterance_id, 1);
  EXPECT_EQ(first.receiver, ds::Role::Other);
  EXPECT_TRUE(first.gold->has(ds::Code::Escalation));
  EXPECT_TRUE(c.sessions()[1].utterances[0].gold->none());
}

TEST(LoadCorpus, ReportsLineAndTokenOfSchemaViolations) {
  try {
    parse(record("a", 1, "[]") + record("a", 2, R"(["gossip"])"));
    FAIL();
  } catch (const ds::SchemaError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(e.token(), "gossip");
  }
}

TEST(LoadCorpus, RejectsMalformedRecords) {
  EXPECT_EQ(kind_of(record("a", 1, "[]", R"(,"mood":"calm")")), ds::ErrorKind::Schema);
  EXPECT_EQ(kind_of(R"({"session_id":"a","utterance_id":1})" "\n"), ds::ErrorKind::Schema);
  EXPECT_EQ(kind_of(record("a", 1, "[]", R"(,"receiver":"primary_nurse_1")")), ds::ErrorKind::Schema);
  EXPECT_EQ(kind_of("not json\n"), ds::ErrorKind::Schema);
  EXPECT_EQ(kind_of(record("a", 1, "[]") + record("a", 1, "[]")), ds::ErrorKind::Order);
  EXPECT_EQ(kind_of(
                R"({"session_id":"a","utterance_id":1,"t_start":5,"t_end":2,"speaker":"other","text":"x","codes":[]})"
                "\n"),
            ds::ErrorKind::Schema);
}

TEST(LoadCorpus, MissingFileIsIoError) {
  try {
    ds::load_corpus("/nonexistent/corpus.jsonl");
    FAIL();
  } catch (const ds::Error& e) {
    EXPECT_EQ(e.kind(), ds::ErrorKind::Io);
  }
}

TEST(LoadCorpus, WriteThenLoadRoundTrips) {
  const auto c = synthetic_corpus({7, 3, 12}, 9);
  std::stringstream buf;
  ds::write_corpus(c, buf);
  EXPECT_EQ(ds::parse_corpus(buf), c);
}

TEST(LoadCorpus, SampleCorpusLoads) {
  const auto c = ds::load_corpus(testsupport::data_dir() / "sample_corpus.jsonl");
  EXPECT_EQ(c.session_count(), 2u);
  EXPECT_EQ(c.utterance_count(), 62u);
}

TEST(FilterCoded, DropsNoneOnlyUtterancesAndEmptySessions) {
  const auto c = parse(record("a", 1, R"(["handover"])") + record("a", 2, "[]") +
                       record("a", 3, R"(["acknowledging"])") + record("b", 1, "[]"));
  const auto f = ds::filter_coded(c);
  ASSERT_EQ(f.session_count(), 1u);
  ASSERT_EQ(f.sessions()[0].utterances.size(), 2u);
  EXPECT_EQ(f.sessions()[0].utterances[1].utterance_id, 3);
  EXPECT_EQ(ds::filter_coded(f), f);
  EXPECT_TRUE(ds::filter_coded(parse(record("a", 1, "[]"))).empty());
}

TEST(FilterCoded, MissingGoldIsAnError) {
  const auto c = parse(R"({"session_id":"a","utterance_id":1,"t_start":0,"t_end":1,"speaker":"other","text":"x"})" "\n");
  try {
    ds::filter_coded(c);
    FAIL();
  } catch (const ds::Error& e) {
    EXPECT_EQ(e.kind(), ds::ErrorKind::MissingGold);
  }
}

TEST(FilterCoded, IsOrderPreservingSubsequence) {
  std::mt19937_64 rng(3);
  for (int round = 0; round < 50; ++round) {
    std::vector<ds::Session> sessions(3);
    for (std::size_t s = 0; s < sessions.size(); ++s) {
      sessions[s].id = "s" + std::to_string(s);
      for (int i = 0; i < 15; ++i) {
        ds::Utterance u;
        u.session_id = sessions[s].id;
        u.utterance_id = i;
        u.text = "x";
        u.gold = testsupport::random_vector(rng, false);
        sessions[s].utterances.push_back(u);
      }
    }
    const ds::Corpus c(sessions);
    const auto f = ds::filter_coded(c);
    for (const auto& fs : f.sessions()) {
      std::int64_t prev = -1;
      for (const auto& u : fs.utterances) {
        EXPECT_TRUE(u.gold->any_code());
        EXPECT_GT(u.utterance_id, prev);
        prev = u.utterance_id;
      }
    }
    EXPECT_EQ(ds::filter_coded(f), f);
  }
}

TEST(CorpusStats, UsesPopulationStandardDeviation) {
  const auto s = ds::corpus_stats(synthetic_corpus({2, 4, 6}));
  EXPECT_EQ(s.utterance_count, 12u);
  EXPECT_EQ(s.session_count, 3u);
  EXPECT_DOUBLE_EQ(s.mean_per_session, 4.0);
  EXPECT_NEAR(s.sd_per_session, 1.632993161855452, 1e-12);
}

TEST(CorpusStats, EmptyCorpusIsAnError) {
  EXPECT_THROW(ds::corpus_stats(ds::Corpus{}), ds::Error);
}
