#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace img2uml {

enum class EndpointKind { OpenAiCompatible, GeminiCompatible, Replay };

std::string_view to_string(EndpointKind k);
std::optional<EndpointKind> parse_endpoint_kind(std::string_view s);

struct Sampling {
  std::optional<double> temperature;
  std::optional<double> top_p;
  std::optional<int> top_k;

  bool operator==(const Sampling&) const = default;
};

struct ProviderConfig {
  std::string provider_id;
  EndpointKind endpoint_kind = EndpointKind::Replay;
  std::string model_name;
  std::optional<std::string> base_url;
  std::optional<Sampling> sampling;  // absent: provider defaults
  int timeout_seconds = 120;
  int max_parallel_requests = 1;
  /// Replay fixture root when IMG2UML_REPLAY_DIR is not set.
  std::optional<std::filesystem::path> replay_dir;

  bool operator==(const ProviderConfig&) const = default;
};

/// Throws ConfigurationError naming the first violated constraint.
void validate_provider_config(const ProviderConfig& config);

/// A PNG or JPEG image. Other formats are rejected on construction.
class Image {
 public:
  /// Throws ConfigurationError unless the bytes start with a PNG or JPEG signature.
  static Image from_bytes(std::string bytes);
  /// Throws ConfigurationError when unreadable or not PNG/JPEG.
  static Image load(const std::filesystem::path& path);

  const std::string& bytes() const noexcept { return bytes_; }
  /// "image/png" or "image/jpeg".
  const std::string& media_type() const noexcept { return media_type_; }

  bool operator==(const Image& other) const { return bytes_ == other.bytes_; }

 private:
  Image(std::string bytes, std::string media_type) : bytes_(std::move(bytes)), media_type_(std::move(media_type)) {}

  std::string bytes_;
  std::string media_type_;
};

enum class Role { User, Assistant };

std::string_view to_string(Role r);

struct Turn {
  Role role = Role::User;
  std::string text;
  std::shared_ptr<const Image> image;

  bool operator==(const Turn& other) const {
    const bool same_image = image == other.image || (image && other.image && *image == *other.image);
    return role == other.role && text == other.text && same_image;
  }
};

struct Conversation {
  std::vector<Turn> turns;

  bool operator==(const Conversation&) const = default;
};

/// Throws Error when empty, when the first turn is not a user turn, or when an
/// assistant turn carries an image.
void validate_conversation(const Conversation& conversation);

struct LlmResponse {
  std::string text;
  std::string provider_id;
  long long latency_ms = 0;
  bool truncated = false;
};

struct HttpRequest {
  std::string url;
  std::vector<std::pair<std::string, std::string>> headers;
  std::string body;  // JSON
  int timeout_seconds = 120;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

/// Blocking HTTP POST. Network failures and timeouts throw TransportError;
/// any received status is returned as-is.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

std::shared_ptr<Transport> make_http_transport();

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Reads the process environment.
EnvLookup process_env();

/// `IMG2UML_<ID>_API_KEY` with the id upper-cased and every character other
/// than letters and digits replaced by '_'.
std::string api_key_variable(std::string_view provider_id);

/// IMG2UML_REPLAY_DIR, else config.replay_dir, else "./replay".
std::filesystem::path replay_root(const ProviderConfig& config, const EnvLookup& env);

/// Hex digest over provider id, model name, every turn's role, text and image
/// bytes, and the attempt nonce.
std::string conversation_digest(const ProviderConfig& config, const Conversation& conversation, int nonce);

/// Stores `<root>/<digest>.txt` and `<root>/<digest>.meta`; returns the digest.
std::string write_replay_fixture(const std::filesystem::path& root, const ProviderConfig& config,
                                 const Conversation& conversation, int nonce, std::string_view response);

/// Uniform client for all endpoint kinds. send() may be called from several
/// threads; at most max_parallel_requests calls per provider id are in flight.
class Gateway {
 public:
  using Observer = std::function<void(const ProviderConfig&, const Conversation&, int nonce)>;

  explicit Gateway(std::shared_ptr<Transport> transport = make_http_transport(), EnvLookup env = process_env());

  /// Errors: TransportError (retryable), ConfigurationError, FixtureMissingError.
  LlmResponse send(const ProviderConfig& config, const Conversation& conversation, int nonce = 0);

  /// Called with every conversation before it is sent. Not synchronized with
  /// concurrent sends; the callback must do its own locking.
  void set_observer(Observer observer) { observer_ = std::move(observer); }

  /// Requests that reached the transport or the replay store.
  long long calls() const;

 private:
  class Limiter;
  Limiter& limiter_for(const ProviderConfig& config);
  LlmResponse dispatch(const ProviderConfig& config, const Conversation& conversation, int nonce);

  std::shared_ptr<Transport> transport_;
  EnvLookup env_;
  Observer observer_;
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<Limiter>> limiters_;
  long long calls_ = 0;
};

namespace detail {

/// Request shape for a live endpoint; exposed for tests.
HttpRequest build_http_request(const ProviderConfig& config, const Conversation& conversation,
                               const std::string& api_key);

/// Maps status codes to errors and extracts text from a live endpoint's reply.
LlmResponse read_http_response(const ProviderConfig& config, const HttpResponse& response);

}  // namespace detail

}  // namespace img2uml
