#include "dialogsweep/labels.hpp"

#include <algorithm>
#include <cctype>
#include <optional>

#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

constexpr std::size_t kExcerptLimit = 120;

std::string excerpt(std::string_view text) {
  if (text.size() <= kExcerptLimit) return std::string(text);
  return std::string(text.substr(0, kExcerptLimit)) + "...";
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool all_digits(std::string_view s) {
  return !s.empty() &&
         std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

// Drops closed <think>...</think> sections.
std::string strip_reasoning(std::string_view text) {
  std::string out;
  std::size_t pos = 0;
  while (true) {
    auto open = text.find("<think>", pos);
    if (open == std::string_view::npos) break;
    auto close = text.find("</think>", open);
    if (close == std::string_view::npos) break;
    out.append(text.substr(pos, open - pos));
    out.push_back('\n');
    pos = close + 8;
  }
  out.append(text.substr(pos));
  return out;
}

struct RowLine {
  std::string raw;
  std::vector<std::string> tokens;
  bool valid = false;
};

// A row-like line is (after an optional "N." prefix and optional brackets)
// made of at least two integer tokens separated by spaces or commas.
std::optional<RowLine> classify_line(std::string_view line) {
  std::string_view body = trim(line);
  std::size_t i = 0;
  while (i < body.size() && std::isdigit(static_cast<unsigned char>(body[i]))) ++i;
  if (i > 0 && i < body.size() && (body[i] == '.' || body[i] == ':' || body[i] == ')')) {
    body = trim(body.substr(i + 1));
  }
  if (!body.empty() && body.front() == '[' && body.back() == ']') {
    body = trim(body.substr(1, body.size() - 2));
  }

  RowLine row;
  row.raw = std::string(trim(line));
  std::string token;
  auto flush = [&] {
    if (!token.empty()) row.tokens.push_back(std::move(token));
    token.clear();
  };
  for (char ch : body) {
    if (ch == ',' || std::isspace(static_cast<unsigned char>(ch))) {
      flush();
    } else {
      token.push_back(ch);
    }
  }
  flush();
  if (row.tokens.size() < 2 || !std::all_of(row.tokens.begin(), row.tokens.end(), all_digits)) {
    return std::nullopt;
  }
  row.valid = row.tokens.size() == kVectorWidth &&
              std::all_of(row.tokens.begin(), row.tokens.end(),
                          [](const std::string& t) { return t == "0" || t == "1"; });
  return row;
}

}  // namespace

std::string format_rows(std::span<const CodeVector> vectors) {
  std::string out;
  out.reserve(vectors.size() * 2 * kVectorWidth);
  for (const auto& v : vectors) {
    auto bits = v.bits();
    for (std::size_t i = 0; i < kVectorWidth; ++i) {
      if (i) out.push_back(' ');
      out.push_back(bits[i] ? '1' : '0');
    }
    out.push_back('\n');
  }
  return out;
}

ParsedLabels parse_completion(std::string_view text, std::size_t expected_rows) {
  if (trim(text).empty()) {
    throw CompletionError(ErrorKind::EmptyCompletion, "completion is empty", 0, 0, expected_rows,
                          "");
  }
  const std::string cleaned = strip_reasoning(text);

  std::vector<std::vector<RowLine>> blocks;
  bool in_block = false;
  std::size_t start = 0;
  while (start <= cleaned.size()) {
    auto end = cleaned.find('\n', start);
    if (end == std::string::npos) end = cleaned.size();
    std::string_view line(cleaned.data() + start, end - start);
    start = end + 1;

    if (trim(line).empty()) continue;  // blank lines do not split a block
    if (auto row = classify_line(line)) {
      if (!in_block) blocks.emplace_back();
      blocks.back().push_back(std::move(*row));
      in_block = true;
    } else {
      in_block = false;
    }
  }

  for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
    if (it->size() != expected_rows) continue;
    if (!std::all_of(it->begin(), it->end(), [](const RowLine& r) { return r.valid; })) continue;

    ParsedLabels parsed;
    parsed.per_utterance.reserve(expected_rows);
    for (const auto& row : *it) {
      std::array<int, kCodeCount> bits{};
      for (std::size_t k = 0; k < kCodeCount; ++k) bits[k] = row.tokens[k] == "1" ? 1 : 0;
      auto v = CodeVector::from_code_bits(bits);
      if ((row.tokens[kCodeCount] == "1") != v.none()) ++parsed.none_slot_conflicts;
      parsed.per_utterance.push_back(v);
    }
    return parsed;
  }

  if (blocks.empty()) {
    throw CompletionError(ErrorKind::RowCountMismatch,
                          "found 0 label rows, expected " + std::to_string(expected_rows), 0, 0,
                          expected_rows, excerpt(trim(text)));
  }
  const auto& last = blocks.back();
  for (std::size_t i = 0; i < last.size(); ++i) {
    if (!last[i].valid) {
      throw CompletionError(ErrorKind::MalformedRow,
                            "row " + std::to_string(i) + " is not seven 0/1 tokens", i,
                            last.size(), expected_rows, excerpt(last[i].raw));
    }
  }
  throw CompletionError(ErrorKind::RowCountMismatch,
                        "found " + std::to_string(last.size()) + " label rows, expected " +
                            std::to_string(expected_rows),
                        last.size(), last.size(), expected_rows, excerpt(last.front().raw));
}

}  // namespace dialogsweep
