#pragma once

#include <array>
#include <bitset>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dialogsweep {

// Communication codes in canonical (codebook table) order.
enum class Code : std::uint8_t {
  TaskAllocation,
  Handover,
  SharingInformation,
  Escalation,
  Questioning,
  Acknowledging,
};

inline constexpr std::size_t kCodeCount = 6;
// Six code bits plus the trailing "none" slot.
inline constexpr std::size_t kVectorWidth = kCodeCount + 1;

inline constexpr std::array<Code, kCodeCount> kAllCodes = {
    Code::TaskAllocation, Code::Handover,    Code::SharingInformation,
    Code::Escalation,     Code::Questioning, Code::Acknowledging,
};

std::string_view code_name(Code code);
std::optional<Code> parse_code(std::string_view name);

enum class Role : std::uint8_t {
  PrimaryNurse1,
  PrimaryNurse2,
  SecondaryNurse1,
  SecondaryNurse2,
  Other,
};

std::string_view role_name(Role role);
std::optional<Role> parse_role(std::string_view name);

/// Binary label vector over the six codes. The none-slot is never stored;
/// it reads as 1 exactly when no code bit is set.
class CodeVector {
 public:
  CodeVector() = default;

  static CodeVector from_codes(std::span<const Code> codes);
  /// Builds from the six code bits; any value other than 0/1 is rejected.
  static CodeVector from_code_bits(std::span<const int> six_bits);

  bool has(Code code) const { return bits_.test(static_cast<std::size_t>(code)); }
  void set(Code code, bool value = true) { bits_.set(static_cast<std::size_t>(code), value); }

  bool none() const { return bits_.none(); }
  bool any_code() const { return bits_.any(); }

  /// Bit at position 0..6 (6 is the none-slot).
  int bit(std::size_t slot) const;
  std::array<int, kVectorWidth> bits() const;
  std::vector<Code> codes() const;

  friend bool operator==(const CodeVector&, const CodeVector&) = default;

 private:
  std::bitset<kCodeCount> bits_;
};

struct Utterance {
  std::string session_id;
  std::int64_t utterance_id = 0;
  double t_start = 0.0;
  double t_end = 0.0;
  Role speaker = Role::Other;
  std::optional<Role> receiver;
  std::string text;
  std::optional<CodeVector> gold;

  friend bool operator==(const Utterance&, const Utterance&) = default;
};

struct Session {
  std::string id;
  std::vector<Utterance> utterances;

  friend bool operator==(const Session&, const Session&) = default;
};

/// Sessions in order of first appearance; utterances ordered by utterance_id.
class Corpus {
 public:
  Corpus() = default;
  explicit Corpus(std::vector<Session> sessions);

  const std::vector<Session>& sessions() const noexcept { return sessions_; }
  std::size_t session_count() const noexcept { return sessions_.size(); }
  std::size_t utterance_count() const noexcept;
  bool empty() const noexcept { return sessions_.empty(); }

  /// All utterances, session by session.
  std::vector<Utterance> flatten() const;

  friend bool operator==(const Corpus&, const Corpus&) = default;

 private:
  std::vector<Session> sessions_;
};

struct CorpusStats {
  std::size_t utterance_count = 0;
  std::size_t session_count = 0;
  double mean_per_session = 0.0;
  double sd_per_session = 0.0;  // population form
};

Corpus load_corpus(const std::filesystem::path& path);
Corpus parse_corpus(std::istream& in);

/// Inverse of load_corpus: one record per line, codes in canonical order.
void write_corpus(const Corpus& corpus, std::ostream& out);
void save_corpus(const Corpus& corpus, const std::filesystem::path& path);

/// Keeps utterances with at least one code bit; drops sessions left empty.
Corpus filter_coded(const Corpus& corpus);

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace dialogsweep
