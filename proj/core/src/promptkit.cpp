#include "dialogsweep/promptkit.hpp"

#include <algorithm>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "dialogsweep/errors.hpp"

namespace dialogsweep {
namespace {

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (char ch : text) {
    if (ch == ' ' || ch == '\t' || ch == '\n' || ch == '\r' || ch == '\f' || ch == '\v') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(ch);
  }
  return out;
}

std::string code_list(std::span<const Code> codes) {
  std::string out;
  for (std::size_t i = 0; i < codes.size(); ++i) {
    if (i) out += ", ";
    out += code_name(codes[i]);
  }
  return out;
}

std::vector<std::string> split_csv(const std::string& value) {
  std::vector<std::string> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto trimmed = collapse_whitespace(item);
    if (!trimmed.empty()) out.push_back(trimmed);
  }
  return out;
}

void append_block(std::string& out, const std::string& block) {
  if (!out.empty()) out += "\n";
  out += block;
  if (block.empty() || block.back() != '\n') out += "\n";
}

std::string preamble_block() {
  return "You are an expert qualitative coder analysing team dialogue recorded during a "
         "nursing simulation. Two primary nurses care for four patients; two secondary "
         "nurses join after a call for help. Code each utterance with the communication "
         "codes defined below.\n";
}

std::string codebook_block(const Codebook& codebook) {
  std::string out = "## Codes\n";
  for (std::size_t i = 0; i < codebook.size(); ++i) {
    const auto& entry = codebook[i];
    out += "\n### " + std::to_string(i + 1) + ". " + std::string(code_name(entry.code)) + "\n";
    out += "Definition: " + collapse_whitespace(entry.definition) + "\n";
    for (const auto& ex : entry.examples) {
      out += "Example: \"" + collapse_whitespace(ex.text) + "\"\n";
    }
  }
  return out;
}

std::string rules_block(std::span<const DecisionRule> rules) {
  std::string out = "## Decision rules\n";
  for (std::size_t i = 0; i < rules.size(); ++i) {
    out += "R" + std::to_string(i + 1) + ". " + collapse_whitespace(rules[i].condition_text) +
           " => codes: " + code_list(rules[i].implied_codes) + "\n";
  }
  return out;
}

std::string context_block(const PromptDesign& design, std::span<const Utterance> batch,
                          std::span<const Utterance> history) {
  const auto window = static_cast<std::size_t>(design.context_window());
  // History tail followed by the batch; target i sits at offset + i.
  std::vector<const Utterance*> seq;
  const std::size_t tail = std::min(window, history.size());
  for (std::size_t i = history.size() - tail; i < history.size(); ++i) seq.push_back(&history[i]);
  const std::size_t offset = seq.size();
  for (const auto& u : batch) seq.push_back(&u);

  std::ostringstream out;
  out << "## Conversational context\n"
      << "Consider the " << window << " preceding utterances when coding each target utterance.\n"
      << "For each label, if uncertainty is below " << *design.confidence_threshold_pct()
      << "%, leave that label as 0.\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::size_t pos = offset + i;
    const std::size_t first = pos >= window ? pos - window : 0;
    out << "\nContext for utterance " << (i + 1) << ":\n";
    if (first == pos) {
      out << "  (session start)\n";
      continue;
    }
    for (std::size_t j = first; j < pos; ++j) {
      out << "  > " << collapse_whitespace(seq[j]->text) << "\n";
    }
  }
  return out.str();
}

std::string metadata_block(std::span<const Utterance> batch) {
  std::string out = "## Speaker metadata\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out += std::to_string(i + 1) + ". speaker: " + std::string(role_name(batch[i].speaker)) +
           "; receiver: " +
           (batch[i].receiver ? std::string(role_name(*batch[i].receiver)) : "unspecified") +
           "\n";
  }
  return out;
}

std::string task_block(std::size_t rows) {
  std::string order;
  for (Code c : kAllCodes) order += std::string(code_name(c)) + " ";
  order += "none";
  return "## Task\n"
         "This is a multi-label classification task: an utterance may carry several codes.\n"
         "For every utterance output exactly one line of seven space-separated binary values "
         "(0 or 1) in this order: " +
         order +
         ".\n"
         "Set none to 1 only when none of the six codes applies.\n"
         "Output exactly " +
         std::to_string(rows) + " line" + (rows == 1 ? "" : "s") +
         ", one per utterance, in the order given, with no other text on those lines.\n";
}

std::string utterance_block(std::span<const Utterance> batch) {
  std::string out = "## Utterances\n";
  for (std::size_t i = 0; i < batch.size(); ++i) {
    out += std::to_string(i + 1) + ". " + collapse_whitespace(batch[i].text) + "\n";
  }
  return out;
}

}  // namespace

std::string_view variant_label(PromptVariant variant) {
  switch (variant) {
    case PromptVariant::FewShot: return "P1";
    case PromptVariant::Rules: return "P2";
    case PromptVariant::RulesContext: return "P3";
    case PromptVariant::RulesMetadata: return "P4";
  }
  return "P?";
}

std::optional<PromptVariant> parse_variant(std::string_view label) {
  for (PromptVariant v : kAllVariants) {
    auto l = variant_label(v);
    // Accept "P1" and "P.1".
    if (label == l || (label.size() == 3 && label[0] == 'P' && label[1] == '.' &&
                       label[2] == l[1])) {
      return v;
    }
  }
  return std::nullopt;
}

PromptDesign::PromptDesign(PromptVariant variant) : variant_(variant) {}

int PromptDesign::context_window() const noexcept {
  return variant_ == PromptVariant::RulesContext ? 3 : 0;
}

std::optional<double> PromptDesign::confidence_threshold_pct() const noexcept {
  if (variant_ == PromptVariant::RulesContext) return 95.0;
  return std::nullopt;
}

Codebook default_codebook() {
  auto original = [](std::string text) { return CodebookExample{std::move(text), false}; };
  auto harness = [](std::string text) { return CodebookExample{std::move(text), true}; };
  return {
      {Code::TaskAllocation,
       "A healthcare student self-assigns or assigns to another healthcare student one or more "
       "tasks.",
       {original("Can you start the IV line and prepare the fluids?"),
        harness("I'll take the blood pressure on bed two."),
        harness("You check the obs on Ruth and I'll grab the ECG.")}},
      {Code::Handover,
       "When a healthcare student provides structural communication of the medical situation to "
       "the new team members.",
       {original("We have Jack here. He's just been complaining of six out of ten chest pain."),
        harness("This is Mary, admitted this morning with pneumonia, she's now on four litres."),
        harness("So far we've given him GTN and his pain went from eight to six.")}},
      {Code::SharingInformation,
       "A healthcare student shares relevant clinical or situational information with one or "
       "more other healthcare professionals.",
       {original("His oxygen saturation has dropped to 88%."),
        harness("Her blood pressure is 90 on 60."),
        harness("The doctor is on the way up.")}},
      {Code::Escalation,
       "A healthcare student communicates that the situation exceeds their capacity and requests "
       "or suggests additional assistance, including initiating or proposing a formal call for "
       "help.",
       {original("This is deteriorating quickly, we need to call the resuscitation team."),
        harness("Can someone press the emergency buzzer?"),
        harness("I think we need the MET team here now.")}},
      {Code::Questioning,
       "A healthcare student asks another team member to obtain information.",
       {original("Have the blood results come back yet?"),
        harness("What was his last heart rate?"),
        harness("Did anyone check her blood sugar?")}},
      {Code::Acknowledging,
       "A healthcare student signals receipt or recognition of another professional's statement, "
       "request, or presence. This is a passive action and does not necessarily indicate "
       "agreement or disagreement, but demonstrates awareness or understanding.",
       {original("Okay."), original("I hear you."), harness("Yep, got it.")}},
  };
}

std::vector<DecisionRule> default_rules() {
  return {
      {"If an utterance contains a first-person commitment (e.g., \"I will...\", \"Let "
       "me...\"), then code it as task allocation; if the utterance also reports patient "
       "status, additionally code it as sharing information.",
       {Code::TaskAllocation, Code::SharingInformation},
       false},
      {"If an utterance summarises a patient's background, history or current treatment for "
       "nurses who have just arrived, code it as handover.",
       {Code::Handover},
       true},
      {"If an utterance calls for, or proposes calling, additional help (emergency buzzer, "
       "doctor, MET or resuscitation team), code it as escalation.",
       {Code::Escalation},
       true},
      {"If an utterance is a question that requests information from a team member, code it as "
       "questioning; a question that asks someone to perform a task is task allocation instead.",
       {Code::Questioning},
       true},
      {"If an utterance only confirms receipt (\"okay\", \"yep\", \"got it\") without adding "
       "information, code it as acknowledging.",
       {Code::Acknowledging},
       true},
  };
}

void validate_codebook(const Codebook& codebook) {
  if (codebook.size() != kCodeCount) {
    throw Error(ErrorKind::CodebookIncomplete,
                "expected 6 entries, got " + std::to_string(codebook.size()));
  }
  for (std::size_t i = 0; i < kCodeCount; ++i) {
    const auto& entry = codebook[i];
    if (entry.code != kAllCodes[i]) {
      throw Error(ErrorKind::CodebookIncomplete,
                  "entry " + std::to_string(i) + " must be " + std::string(code_name(kAllCodes[i])));
    }
    if (collapse_whitespace(entry.definition).empty()) {
      throw Error(ErrorKind::CodebookIncomplete,
                  std::string(code_name(entry.code)) + " has no definition");
    }
    if (entry.examples.size() != 3) {
      throw Error(ErrorKind::CodebookIncomplete,
                  std::string(code_name(entry.code)) + " needs exactly 3 examples");
    }
  }
}

PromptAssets default_prompt_assets() { return {default_codebook(), default_rules()}; }

PromptAssets load_prompt_assets(const std::filesystem::path& path) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    pt::read_ini(path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::Config, e.what());
  }

  PromptAssets assets = default_prompt_assets();
  std::vector<DecisionRule> rules;
  for (const auto& [section, body] : tree) {
    if (auto code = parse_code(section)) {
      auto& entry = assets.codebook[static_cast<std::size_t>(*code)];
      if (auto def = body.get_optional<std::string>("definition")) entry.definition = *def;
      for (int i = 0; i < 3; ++i) {
        if (auto ex = body.get_optional<std::string>("example" + std::to_string(i + 1))) {
          entry.examples[static_cast<std::size_t>(i)] = {*ex, false};
        }
      }
      continue;
    }
    if (section.rfind("rule.", 0) == 0) {
      DecisionRule rule;
      rule.condition_text = body.get<std::string>("condition", "");
      for (const auto& name : split_csv(body.get<std::string>("codes", ""))) {
        auto code = parse_code(name);
        if (!code) throw Error(ErrorKind::Config, "[" + section + "] unknown code '" + name + "'");
        rule.implied_codes.push_back(*code);
      }
      if (rule.condition_text.empty() || rule.implied_codes.empty()) {
        throw Error(ErrorKind::Config, "[" + section + "] needs condition and codes");
      }
      rules.push_back(std::move(rule));
      continue;
    }
    throw Error(ErrorKind::Config, "unknown section [" + section + "]");
  }
  if (!rules.empty()) assets.rules = std::move(rules);
  validate_codebook(assets.codebook);
  return assets;
}

RenderedPrompt render_prompt(const PromptDesign& design, std::span<const Utterance> batch,
                             std::span<const Utterance> session_history,
                             const Codebook& codebook, std::span<const DecisionRule> rules) {
  if (batch.empty()) throw Error(ErrorKind::EmptyBatch, "cannot render an empty batch");
  if (design.uses_rules() && rules.empty()) {
    throw Error(ErrorKind::RuleMismatch,
                std::string(variant_label(design.variant())) + " requires decision rules");
  }
  if (!design.uses_rules() && !rules.empty()) {
    throw Error(ErrorKind::RuleMismatch, "P1 takes no decision rules");
  }
  validate_codebook(codebook);

  std::string text;
  append_block(text, preamble_block());
  append_block(text, codebook_block(codebook));
  if (design.uses_rules()) append_block(text, rules_block(rules));
  if (design.variant() == PromptVariant::RulesContext) {
    append_block(text, context_block(design, batch, session_history));
  }
  if (design.variant() == PromptVariant::RulesMetadata) append_block(text, metadata_block(batch));
  append_block(text, task_block(batch.size()));
  append_block(text, utterance_block(batch));

  RenderedPrompt prompt;
  prompt.text = std::move(text);
  prompt.expected_output_rows = batch.size();
  prompt.design = design;
  prompt.targets.reserve(batch.size());
  for (const auto& u : batch) prompt.targets.emplace_back(u.session_id, u.utterance_id);
  return prompt;
}

PromptRenderer::PromptRenderer(PromptAssets assets) : assets_(std::move(assets)) {
  validate_codebook(assets_.codebook);
}

RenderedPrompt PromptRenderer::render(const PromptDesign& design, std::span<const Utterance> batch,
                                      std::span<const Utterance> session_history) const {
  std::span<const DecisionRule> rules;
  if (design.uses_rules()) rules = assets_.rules;
  return render_prompt(design, batch, session_history, assets_.codebook, rules);
}

}  // namespace dialogsweep
