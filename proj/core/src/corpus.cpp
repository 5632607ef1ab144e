#include "dialogsweep/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

using nlohmann::json;

constexpr std::array<std::string_view, kCodeCount> kCodeNames = {
    "task_allocation", "handover",    "sharing_information",
    "escalation",      "questioning", "acknowledging",
};

constexpr std::array<std::string_view, 5> kRoleNames = {
    "primary_nurse_1", "primary_nurse_2", "secondary_nurse_1", "secondary_nurse_2", "other",
};

const std::set<std::string, std::less<>> kRecordKeys = {
    "session_id", "utterance_id", "t_start", "t_end", "speaker", "receiver", "text", "codes",
};

const json& require(const json& record, const char* key, std::size_t line) {
  auto it = record.find(key);
  if (it == record.end()) {
    throw SchemaError(std::string("missing field '") + key + "'", line, key);
  }
  return *it;
}

double require_number(const json& record, const char* key, std::size_t line) {
  const json& value = require(record, key, line);
  if (!value.is_number()) {
    throw SchemaError(std::string("field '") + key + "' must be a number", line, value.dump());
  }
  return value.get<double>();
}

Role require_role(const json& value, const char* key, std::size_t line) {
  if (!value.is_string()) {
    throw SchemaError(std::string("field '") + key + "' must be a string", line, value.dump());
  }
  auto token = value.get<std::string>();
  auto role = parse_role(token);
  if (!role) throw SchemaError("unknown role '" + token + "'", line, token);
  return *role;
}

Utterance parse_record(const json& record, std::size_t line) {
  if (!record.is_object()) throw SchemaError("record is not an object", line);
  for (const auto& [key, _] : record.items()) {
    if (!kRecordKeys.contains(key)) throw SchemaError("unknown key '" + key + "'", line, key);
  }

  Utterance u;
  const json& sid = require(record, "session_id", line);
  if (!sid.is_string()) throw SchemaError("field 'session_id' must be a string", line, sid.dump());
  u.session_id = sid.get<std::string>();

  const json& uid = require(record, "utterance_id", line);
  if (!uid.is_number_integer()) {
    throw SchemaError("field 'utterance_id' must be an integer", line, uid.dump());
  }
  u.utterance_id = uid.get<std::int64_t>();

  u.t_start = require_number(record, "t_start", line);
  u.t_end = require_number(record, "t_end", line);
  if (!(u.t_start >= 0.0) || !(u.t_end >= u.t_start)) {
    throw SchemaError("require 0 <= t_start <= t_end", line);
  }

  u.speaker = require_role(require(record, "speaker", line), "speaker", line);
  if (auto it = record.find("receiver"); it != record.end() && !it->is_null()) {
    u.receiver = require_role(*it, "receiver", line);
    if (*u.receiver == u.speaker) throw SchemaError("speaker equals receiver", line);
  }

  const json& text = require(record, "text", line);
  if (!text.is_string() || text.get<std::string>().empty()) {
    throw SchemaError("field 'text' must be a non-empty string", line);
  }
  u.text = text.get<std::string>();

  if (auto it = record.find("codes"); it != record.end()) {
    if (!it->is_array()) throw SchemaError("field 'codes' must be an array", line, it->dump());
    CodeVector gold;
    for (const auto& item : *it) {
      if (!item.is_string()) throw SchemaError("code names must be strings", line, item.dump());
      auto name = item.get<std::string>();
      auto code = parse_code(name);
      if (!code) throw SchemaError("unknown code '" + name + "'", line, name);
      gold.set(*code);
    }
    u.gold = gold;
  }
  return u;
}

json to_record(const Utterance& u) {
  json record = json::object();
  record["session_id"] = u.session_id;
  record["utterance_id"] = u.utterance_id;
  record["t_start"] = u.t_start;
  record["t_end"] = u.t_end;
  record["speaker"] = std::string(role_name(u.speaker));
  if (u.receiver) record["receiver"] = std::string(role_name(*u.receiver));
  record["text"] = u.text;
  if (u.gold) {
    json codes = json::array();
    for (Code c : u.gold->codes()) codes.push_back(std::string(code_name(c)));
    record["codes"] = std::move(codes);
  }
  return record;
}

}  // namespace

std::string_view code_name(Code code) { return kCodeNames[static_cast<std::size_t>(code)]; }

std::optional<Code> parse_code(std::string_view name) {
  for (std::size_t i = 0; i < kCodeNames.size(); ++i) {
    if (kCodeNames[i] == name) return static_cast<Code>(i);
  }
  return std::nullopt;
}

std::string_view role_name(Role role) { return kRoleNames[static_cast<std::size_t>(role)]; }

std::optional<Role> parse_role(std::string_view name) {
  for (std::size_t i = 0; i < kRoleNames.size(); ++i) {
    if (kRoleNames[i] == name) return static_cast<Role>(i);
  }
  return std::nullopt;
}

CodeVector CodeVector::from_codes(std::span<const Code> codes) {
  CodeVector v;
  for (Code c : codes) v.set(c);
  return v;
}

CodeVector CodeVector::from_code_bits(std::span<const int> six_bits) {
  if (six_bits.size() != kCodeCount) {
    throw Error(ErrorKind::Schema, "code vector needs exactly six code bits");
  }
  CodeVector v;
  for (std::size_t i = 0; i < kCodeCount; ++i) {
    if (six_bits[i] != 0 && six_bits[i] != 1) {
      throw Error(ErrorKind::Schema, "code bits must be 0 or 1");
    }
    v.bits_.set(i, six_bits[i] == 1);
  }
  return v;
}

int CodeVector::bit(std::size_t slot) const {
  if (slot == kCodeCount) return none() ? 1 : 0;
  return bits_.test(slot) ? 1 : 0;
}

std::array<int, kVectorWidth> CodeVector::bits() const {
  std::array<int, kVectorWidth> out{};
  for (std::size_t i = 0; i < kVectorWidth; ++i) out[i] = bit(i);
  return out;
}

std::vector<Code> CodeVector::codes() const {
  std::vector<Code> out;
  for (Code c : kAllCodes) {
    if (has(c)) out.push_back(c);
  }
  return out;
}

Corpus::Corpus(std::vector<Session> sessions) : sessions_(std::move(sessions)) {}

std::size_t Corpus::utterance_count() const noexcept {
  std::size_t n = 0;
  for (const auto& s : sessions_) n += s.utterances.size();
  return n;
}

std::vector<Utterance> Corpus::flatten() const {
  std::vector<Utterance> out;
  out.reserve(utterance_count());
  for (const auto& s : sessions_) out.insert(out.end(), s.utterances.begin(), s.utterances.end());
  return out;
}

Corpus parse_corpus(std::istream& in) {
  std::vector<Session> sessions;
  std::unordered_map<std::string, std::size_t> index;
  std::map<std::pair<std::size_t, std::int64_t>, std::size_t> seen;  // -> line

  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (std::all_of(text.begin(), text.end(), [](unsigned char ch) { return std::isspace(ch); })) {
      continue;
    }
    json record;
    try {
      record = json::parse(text);
    } catch (const json::parse_error& e) {
      throw SchemaError(std::string("malformed record: ") + e.what(), line);
    }
    Utterance u = parse_record(record, line);

    auto [it, inserted] = index.try_emplace(u.session_id, sessions.size());
    if (inserted) sessions.push_back(Session{u.session_id, {}});
    auto key = std::make_pair(it->second, u.utterance_id);
    if (auto prev = seen.find(key); prev != seen.end()) {
      throw Error(ErrorKind::Order, "line " + std::to_string(line) + ": duplicate utterance_id " +
                                        std::to_string(u.utterance_id) + " in session '" +
                                        u.session_id + "' (first seen on line " +
                                        std::to_string(prev->second) + ")");
    }
    seen.emplace(key, line);
    sessions[it->second].utterances.push_back(std::move(u));
  }
  if (in.bad()) throw Error(ErrorKind::Io, "read failure");

  for (auto& s : sessions) {
    std::stable_sort(s.utterances.begin(), s.utterances.end(),
                     [](const Utterance& a, const Utterance& b) {
                       return a.utterance_id < b.utterance_id;
                     });
  }
  return Corpus(std::move(sessions));
}

Corpus load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open corpus '" + path.string() + "'");
  return parse_corpus(in);
}

void write_corpus(const Corpus& corpus, std::ostream& out) {
  for (const auto& s : corpus.sessions()) {
    for (const auto& u : s.utterances) out << to_record(u).dump() << '\n';
  }
}

void save_corpus(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::Io, "cannot write corpus '" + path.string() + "'");
  write_corpus(corpus, out);
  if (!out) throw Error(ErrorKind::Io, "write failure on '" + path.string() + "'");
}

Corpus filter_coded(const Corpus& corpus) {
  std::vector<Session> kept;
  for (const auto& s : corpus.sessions()) {
    Session out{s.id, {}};
    for (const auto& u : s.utterances) {
      if (!u.gold) {
        throw Error(ErrorKind::MissingGold, "utterance " + std::to_string(u.utterance_id) +
                                                " in session '" + s.id + "' has no gold codes");
      }
      if (u.gold->any_code()) out.utterances.push_back(u);
    }
    if (!out.utterances.empty()) kept.push_back(std::move(out));
  }
  return Corpus(std::move(kept));
}

CorpusStats corpus_stats(const Corpus& corpus) {
  if (corpus.empty()) throw Error(ErrorKind::EmptyCorpus, "corpus has no sessions");
  CorpusStats stats;
  stats.session_count = corpus.session_count();
  stats.utterance_count = corpus.utterance_count();
  const double n = static_cast<double>(stats.session_count);
  stats.mean_per_session = static_cast<double>(stats.utterance_count) / n;
  double ss = 0.0;
  for (const auto& s : corpus.sessions()) {
    double d = static_cast<double>(s.utterances.size()) - stats.mean_per_session;
    ss += d * d;
  }
  stats.sd_per_session = std::sqrt(ss / n);
  return stats;
}

}  // namespace dialogsweep
