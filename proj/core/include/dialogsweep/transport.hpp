#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>

#include "dialogsweep/clock.hpp"
#include "dialogsweep/corpus.hpp"
#include "dialogsweep/promptkit.hpp"

namespace dialogsweep {

inline constexpr const char* kEndpointEnvVar = "DIALOGSWEEP_ENDPOINT";

struct ModelConfig {
  std::string endpoint_url = "http://127.0.0.1:11434";
  std::string model_name = "deepseek-r1:14b";
  double temperature = 0.0;
  std::int64_t seed = 42;
  double request_timeout_s = 600.0;
  // Extra attempts after a connect/timeout/5xx failure.
  int max_retries = 2;
  double retry_backoff_s = 1.0;

  /// Throws ConfigError when temperature < 0 or timeout <= 0.
  void validate() const;
};

/// Applies DIALOGSWEEP_ENDPOINT when set and non-empty.
ModelConfig apply_endpoint_env(ModelConfig config);

class ModelTransport {
 public:
  virtual ~ModelTransport() = default;
  /// Returns the completion text verbatim.
  virtual std::string send(const RenderedPrompt& prompt, const ModelConfig& model) = 0;
};

/// Speaks the local model server chat protocol: POST {endpoint}/api/chat.
class HttpChatTransport final : public ModelTransport {
 public:
  HttpChatTransport() = default;
  std::string send(const RenderedPrompt& prompt, const ModelConfig& model) override;
};

/// JSON body sent to /api/chat. Exposed for tests and tooling.
std::string chat_request_body(const RenderedPrompt& prompt, const ModelConfig& model);
/// Extracts message.content; throws TransportError(MalformedBody).
std::string chat_response_content(const std::string& body);

enum class MockMode { EchoGold, Script, Garbage };

/// Deterministic stand-in for a model server, keyed by the prompt's target
/// utterances. Echo mode answers with the gold vectors; script mode with
/// rows from a script table; garbage mode echoes gold except for a
/// hash-selected fraction of batches, which get an unparseable reply on
/// every attempt. `send` has no side effects beyond the optional clock.
class MockTransport final : public ModelTransport {
 public:
  struct Latency {
    double per_request_s = 2.0;
    double per_utterance_s = 0.5;
  };

  static MockTransport echo_gold(const Corpus& corpus);
  static MockTransport garbage(const Corpus& corpus, double rate, std::uint64_t seed = 42);
  /// Script lines: `<session_id> <utterance_id> b0 b1 b2 b3 b4 b5 b6`; '#' starts a comment.
  static MockTransport script(const std::filesystem::path& path);
  static MockTransport script(std::map<UtteranceKey, std::string> rows);

  /// Advances `clock` by the simulated latency on every send.
  MockTransport& with_clock(ManualClock* clock, Latency latency);
  MockTransport& with_latency(Latency latency);

  std::string send(const RenderedPrompt& prompt, const ModelConfig& model) override;

  MockMode mode() const noexcept { return mode_; }
  /// Whether garbage mode corrupts the batch with these targets.
  bool garbles(const RenderedPrompt& prompt) const;

 private:
  MockTransport(MockMode mode, std::map<UtteranceKey, std::string> rows);

  MockMode mode_;
  std::map<UtteranceKey, std::string> rows_;
  double rate_ = 0.0;
  std::uint64_t seed_ = 0;
  ManualClock* clock_ = nullptr;
  Latency latency_{};
};

/// Parses a --mock spec: "echo-gold", "script:<path>", "garbage:<rate>".
MockTransport make_mock(const std::string& spec, const Corpus& corpus);

}  // namespace dialogsweep
