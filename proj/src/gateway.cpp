#include "img2uml/gateway.hpp"

#include <cctype>
#include <cmath>
#include <condition_variable>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gateway_internal.hpp"
#include "img2uml/errors.hpp"

namespace img2uml {

std::string_view to_string(EndpointKind k) {
  switch (k) {
    case EndpointKind::OpenAiCompatible: return "openai-compatible";
    case EndpointKind::GeminiCompatible: return "gemini-compatible";
    case EndpointKind::Replay: return "replay";
  }
  return "?";
}

std::optional<EndpointKind> parse_endpoint_kind(std::string_view s) {
  for (auto k : {EndpointKind::OpenAiCompatible, EndpointKind::GeminiCompatible, EndpointKind::Replay}) {
    if (s == to_string(k)) {
      return k;
    }
  }
  return std::nullopt;
}

std::string_view to_string(Role r) { return r == Role::User ? "user" : "assistant"; }

void validate_provider_config(const ProviderConfig& c) {
  auto fail = [&](const std::string& what) {
    throw ConfigurationError("provider '" + c.provider_id + "': " + what);
  };
  if (c.provider_id.empty()) {
    throw ConfigurationError("provider id must not be empty");
  }
  if (c.model_name.empty()) {
    fail("model name must not be empty");
  }
  if (c.timeout_seconds < 1) {
    fail("timeout_seconds must be at least 1");
  }
  if (c.max_parallel_requests < 1) {
    fail("max_parallel_requests must be at least 1");
  }
  if (c.base_url && !(c.base_url->starts_with("http://") || c.base_url->starts_with("https://"))) {
    fail("base_url must start with http:// or https://");
  }
  if (c.sampling) {
    const Sampling& s = *c.sampling;
    if (s.temperature && (!std::isfinite(*s.temperature) || *s.temperature < 0 || *s.temperature > 2)) {
      fail("temperature must be within [0, 2]");
    }
    if (s.top_p && (!std::isfinite(*s.top_p) || *s.top_p <= 0 || *s.top_p > 1)) {
      fail("top_p must be within (0, 1]");
    }
    if (s.top_k && *s.top_k < 1) {
      fail("top_k must be at least 1");
    }
  }
}

Image Image::from_bytes(std::string bytes) {
  static constexpr std::string_view kPng = "\x89PNG\r\n\x1a\n";
  static constexpr std::string_view kJpeg = "\xff\xd8\xff";
  if (bytes.starts_with(kPng)) {
    return Image(std::move(bytes), "image/png");
  }
  if (bytes.starts_with(kJpeg)) {
    return Image(std::move(bytes), "image/jpeg");
  }
  throw ConfigurationError("unsupported image format (expected PNG or JPEG)");
}

Image Image::load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigurationError("cannot read image " + path.string());
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  try {
    return from_bytes(buf.str());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
}

void validate_conversation(const Conversation& conversation) {
  if (conversation.turns.empty()) {
    throw Error("conversation has no turns");
  }
  if (conversation.turns.front().role != Role::User) {
    throw Error("conversation must start with a user turn");
  }
  for (const auto& turn : conversation.turns) {
    if (turn.role == Role::Assistant && turn.image) {
      throw Error("assistant turns cannot carry images");
    }
  }
}

EnvLookup process_env() {
  return [](const std::string& name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name.c_str())) {
      return std::string(v);
    }
    return std::nullopt;
  };
}

std::string api_key_variable(std::string_view provider_id) {
  std::string out = "IMG2UML_";
  for (unsigned char c : provider_id) {
    out.push_back(std::isalnum(c) ? static_cast<char>(std::toupper(c)) : '_');
  }
  return out + "_API_KEY";
}

class Gateway::Limiter {
 public:
  explicit Limiter(int capacity) : capacity_(capacity), free_(capacity) {}

  /// Follows a changed max_parallel_requests; in-flight holders are unaffected.
  void resize(int capacity) {
    {
      std::lock_guard lock(mutex_);
      free_ += capacity - capacity_;
      capacity_ = capacity;
    }
    cv_.notify_all();
  }

  void acquire() {
    std::unique_lock lock(mutex_);
    cv_.wait(lock, [&] { return free_ > 0; });
    --free_;
  }

  void release() {
    {
      std::lock_guard lock(mutex_);
      ++free_;
    }
    cv_.notify_one();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  int capacity_;
  int free_;
};

Gateway::Gateway(std::shared_ptr<Transport> transport, EnvLookup env)
    : transport_(std::move(transport)), env_(std::move(env)) {}

Gateway::Limiter& Gateway::limiter_for(const ProviderConfig& config) {
  std::lock_guard lock(mutex_);
  auto& slot = limiters_[config.provider_id];
  if (!slot) {
    slot = std::make_shared<Limiter>(config.max_parallel_requests);
  } else {
    slot->resize(config.max_parallel_requests);
  }
  return *slot;
}

long long Gateway::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

LlmResponse Gateway::send(const ProviderConfig& config, const Conversation& conversation, int nonce) {
  validate_provider_config(config);
  validate_conversation(conversation);
  if (observer_) {
    observer_(config, conversation, nonce);
  }
  Limiter& limiter = limiter_for(config);
  limiter.acquire();
  struct Release {
    Limiter& l;
    ~Release() { l.release(); }
  } release{limiter};
  {
    std::lock_guard lock(mutex_);
    ++calls_;
  }
  return dispatch(config, conversation, nonce);
}

LlmResponse Gateway::dispatch(const ProviderConfig& config, const Conversation& conversation, int nonce) {
  if (config.endpoint_kind == EndpointKind::Replay) {
    return detail::read_replay(config, conversation, nonce, env_);
  }
  const std::string var = api_key_variable(config.provider_id);
  const auto key = env_(var);
  if (!key || key->empty()) {
    throw ConfigurationError("provider '" + config.provider_id + "': API key variable " + var + " is not set");
  }
  if (!transport_) {
    throw ConfigurationError("no HTTP transport configured");
  }
  const auto start = std::chrono::steady_clock::now();
  const HttpResponse http = transport_->post(detail::build_http_request(config, conversation, *key));
  LlmResponse response = detail::read_http_response(config, http);
  response.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  return response;
}

}  // namespace img2uml
