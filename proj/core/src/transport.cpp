#include "dialogsweep/transport.hpp"

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "dialogsweep/errors.hpp"
#include "dialogsweep/labels.hpp"
#include "hash.hpp"

namespace dialogsweep {
namespace {

using nlohmann::json;

struct ParsedUrl {
  std::string scheme_host_port;
  std::string base_path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw TransportError(TransportCause::Connect, "endpoint '" + url + "' lacks a scheme");
  }
  auto path_start = url.find('/', scheme_end + 3);
  ParsedUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.base_path = url.substr(path_start);
    while (!out.base_path.empty() && out.base_path.back() == '/') out.base_path.pop_back();
  }
  return out;
}

std::string row_for(const CodeVector& v) {
  std::string row = format_rows(std::span<const CodeVector>(&v, 1));
  row.pop_back();
  return row;
}

}  // namespace

void ModelConfig::validate() const {
  if (!(temperature >= 0.0)) throw Error(ErrorKind::Config, "temperature must be >= 0");
  if (!(request_timeout_s > 0.0)) throw Error(ErrorKind::Config, "request timeout must be > 0");
  if (max_retries < 0) throw Error(ErrorKind::Config, "max_retries must be >= 0");
}

ModelConfig apply_endpoint_env(ModelConfig config) {
  if (const char* env = std::getenv(kEndpointEnvVar); env && *env) config.endpoint_url = env;
  return config;
}

std::string chat_request_body(const RenderedPrompt& prompt, const ModelConfig& model) {
  json body = {
      {"model", model.model_name},
      {"messages", json::array({{{"role", "user"}, {"content", prompt.text}}})},
      {"stream", false},
      {"options", {{"temperature", model.temperature}, {"seed", model.seed}}},
  };
  return body.dump();
}

std::string chat_response_content(const std::string& body) {
  json parsed = json::parse(body, nullptr, false);
  if (parsed.is_discarded() || !parsed.is_object()) {
    throw TransportError(TransportCause::MalformedBody, "response is not a JSON object");
  }
  auto msg = parsed.find("message");
  if (msg == parsed.end() || !msg->is_object()) {
    throw TransportError(TransportCause::MalformedBody, "response lacks 'message'");
  }
  auto content = msg->find("content");
  if (content == msg->end() || !content->is_string()) {
    throw TransportError(TransportCause::MalformedBody, "response lacks 'message.content'");
  }
  return content->get<std::string>();
}

std::string HttpChatTransport::send(const RenderedPrompt& prompt, const ModelConfig& model) {
  if (prompt.text.empty()) throw Error(ErrorKind::EmptyBatch, "prompt is empty");
  const auto url = split_url(model.endpoint_url);
  const std::string path = url.base_path + "/api/chat";
  const std::string body = chat_request_body(prompt, model);

  const auto timeout = std::chrono::duration_cast<std::chrono::microseconds>(
      std::chrono::duration<double>(model.request_timeout_s));

  for (int attempt = 0;; ++attempt) {
    httplib::Client client(url.scheme_host_port);
    client.set_connection_timeout(std::min(timeout, std::chrono::microseconds(30'000'000)));
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(path, body, "application/json");
    std::optional<TransportError> failure;
    if (!res) {
      const auto err = res.error();
      const auto cause = err == httplib::Error::Read || err == httplib::Error::Write
                             ? TransportCause::Timeout
                             : TransportCause::Connect;
      failure.emplace(cause, model.endpoint_url + ": " + httplib::to_string(err));
    } else if (res->status >= 200 && res->status < 300) {
      return chat_response_content(res->body);
    } else {
      TransportError status_error(TransportCause::HttpStatus,
                                  model.endpoint_url + path + " returned HTTP " +
                                      std::to_string(res->status),
                                  res->status);
      if (res->status < 500) throw status_error;
      failure.emplace(status_error);
    }

    if (attempt >= model.max_retries) throw *failure;
    if (model.retry_backoff_s > 0.0) {
      std::this_thread::sleep_for(std::chrono::duration<double>(model.retry_backoff_s));
    }
  }
}

MockTransport::MockTransport(MockMode mode, std::map<UtteranceKey, std::string> rows)
    : mode_(mode), rows_(std::move(rows)) {}

MockTransport MockTransport::echo_gold(const Corpus& corpus) {
  std::map<UtteranceKey, std::string> rows;
  for (const auto& s : corpus.sessions()) {
    for (const auto& u : s.utterances) {
      rows.emplace(UtteranceKey{u.session_id, u.utterance_id}, row_for(u.gold.value_or(CodeVector{})));
    }
  }
  return MockTransport(MockMode::EchoGold, std::move(rows));
}

MockTransport MockTransport::garbage(const Corpus& corpus, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error(ErrorKind::Config, "garbage rate must be in [0,1]");
  MockTransport mock = echo_gold(corpus);
  mock.mode_ = MockMode::Garbage;
  mock.rate_ = rate;
  mock.seed_ = seed;
  return mock;
}

MockTransport MockTransport::script(std::map<UtteranceKey, std::string> rows) {
  return MockTransport(MockMode::Script, std::move(rows));
}

MockTransport MockTransport::script(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::Io, "cannot open mock script '" + path.string() + "'");
  std::map<UtteranceKey, std::string> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    std::string session;
    if (!(ss >> session)) continue;
    std::int64_t id = 0;
    if (!(ss >> id)) throw SchemaError("expected utterance id", line_no);
    std::string rest, token;
    while (ss >> token) rest += (rest.empty() ? "" : " ") + token;
    rows[{session, id}] = rest;
  }
  return script(std::move(rows));
}

MockTransport& MockTransport::with_clock(ManualClock* clock, Latency latency) {
  clock_ = clock;
  latency_ = latency;
  return *this;
}

MockTransport& MockTransport::with_latency(Latency latency) {
  latency_ = latency;
  return *this;
}

bool MockTransport::garbles(const RenderedPrompt& prompt) const {
  if (mode_ != MockMode::Garbage || prompt.targets.empty()) return false;
  std::string key = std::to_string(seed_) + "|" + prompt.targets.front().first + "|" +
                    std::to_string(prompt.targets.front().second) + "|" +
                    std::to_string(prompt.targets.size());
  std::uint64_t h = detail::fnv1a(key);
  // splitmix64 finaliser: FNV alone leaves the high bits poorly mixed for short keys.
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  h ^= h >> 31;
  const double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  return u < rate_;
}

std::string MockTransport::send(const RenderedPrompt& prompt, const ModelConfig& /*model*/) {
  if (prompt.text.empty()) throw Error(ErrorKind::EmptyBatch, "prompt is empty");
  if (clock_) {
    clock_->advance(latency_.per_request_s +
                    latency_.per_utterance_s * static_cast<double>(prompt.targets.size()));
  }

  std::string out = "<think>\nMatching each utterance against the codebook.\n</think>\n\n";
  if (garbles(prompt)) {
    out += "I am unable to label these utterances reliably.\n1 0 maybe 1\n";
    return out;
  }
  for (const auto& key : prompt.targets) {
    auto it = rows_.find(key);
    if (it != rows_.end()) out += it->second + "\n";
  }
  return out;
}

MockTransport make_mock(const std::string& spec, const Corpus& corpus) {
  if (spec == "echo-gold") return MockTransport::echo_gold(corpus);
  if (spec.rfind("script:", 0) == 0) return MockTransport::script(std::filesystem::path(spec.substr(7)));
  if (spec.rfind("garbage:", 0) == 0) {
    double rate = 0.0;
    try {
      std::size_t used = 0;
      rate = std::stod(spec.substr(8), &used);
      if (used != spec.size() - 8) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw Error(ErrorKind::Config, "bad garbage rate in '" + spec + "'");
    }
    return MockTransport::garbage(corpus, rate);
  }
  throw Error(ErrorKind::Config, "unknown mock mode '" + spec + "'");
}

}  // namespace dialogsweep
