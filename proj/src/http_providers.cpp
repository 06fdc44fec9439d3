#include <httplib.h>

#include <nlohmann/json.hpp>

#include "img2uml/digest.hpp"
#include "img2uml/errors.hpp"
#include "img2uml/gateway.hpp"

namespace img2uml {

namespace {

using nlohmann::json;

std::string base_of(const ProviderConfig& config, std::string_view fallback) {
  std::string base = config.base_url.value_or(std::string(fallback));
  while (base.ends_with('/')) {
    base.pop_back();
  }
  return base;
}

std::string data_url(const Image& image) { return "data:" + image.media_type() + ";base64," + base64_encode(image.bytes()); }

HttpRequest openai_request(const ProviderConfig& config, const Conversation& conversation, const std::string& key) {
  json messages = json::array();
  for (const auto& turn : conversation.turns) {
    if (turn.role == Role::Assistant) {
      messages.push_back({{"role", "assistant"}, {"content", turn.text}});
      continue;
    }
    json content = json::array({{{"type", "text"}, {"text", turn.text}}});
    if (turn.image) {
      content.push_back({{"type", "image_url"}, {"image_url", {{"url", data_url(*turn.image)}}}});
    }
    messages.push_back({{"role", "user"}, {"content", std::move(content)}});
  }
  json body = {{"model", config.model_name}, {"messages", std::move(messages)}};
  if (config.sampling) {
    if (config.sampling->temperature) body["temperature"] = *config.sampling->temperature;
    if (config.sampling->top_p) body["top_p"] = *config.sampling->top_p;
    // Not part of the OpenAI API; self-hosted compatible servers accept it.
    if (config.sampling->top_k) body["top_k"] = *config.sampling->top_k;
  }
  return HttpRequest{base_of(config, "https://api.openai.com/v1") + "/chat/completions",
                     {{"Authorization", "Bearer " + key}},
                     body.dump(-1, ' ', false, json::error_handler_t::replace),
                     config.timeout_seconds};
}

HttpRequest gemini_request(const ProviderConfig& config, const Conversation& conversation, const std::string& key) {
  json contents = json::array();
  for (const auto& turn : conversation.turns) {
    json parts = json::array({{{"text", turn.text}}});
    if (turn.image) {
      parts.push_back(
          {{"inline_data", {{"mime_type", turn.image->media_type()}, {"data", base64_encode(turn.image->bytes())}}}});
    }
    contents.push_back({{"role", turn.role == Role::User ? "user" : "model"}, {"parts", std::move(parts)}});
  }
  json body = {{"contents", std::move(contents)}};
  if (config.sampling) {
    json gen = json::object();
    if (config.sampling->temperature) gen["temperature"] = *config.sampling->temperature;
    if (config.sampling->top_p) gen["topP"] = *config.sampling->top_p;
    if (config.sampling->top_k) gen["topK"] = *config.sampling->top_k;
    body["generationConfig"] = std::move(gen);
  }
  return HttpRequest{
      base_of(config, "https://generativelanguage.googleapis.com/v1beta") + "/models/" + config.model_name +
          ":generateContent",
      {{"x-goog-api-key", key}},
      body.dump(-1, ' ', false, json::error_handler_t::replace),
      config.timeout_seconds};
}

std::string excerpt(std::string_view body) {
  constexpr std::size_t kMax = 300;
  std::string out(body.substr(0, kMax));
  if (body.size() > kMax) {
    out += "...";
  }
  return out;
}

json parse_body(const ProviderConfig& config, const HttpResponse& response) {
  try {
    return json::parse(response.body);
  } catch (const json::exception&) {
    throw TransportError("provider '" + config.provider_id + "': malformed response body: " + excerpt(response.body));
  }
}

class HttplibTransport final : public Transport {
 public:
  HttpResponse post(const HttpRequest& request) override {
    const auto scheme = request.url.find("://");
    if (scheme == std::string::npos) {
      throw ConfigurationError("malformed URL " + request.url);
    }
    const auto slash = request.url.find('/', scheme + 3);
    const std::string origin = request.url.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : request.url.substr(slash);

    httplib::Client client(origin);
    client.set_connection_timeout(request.timeout_seconds, 0);
    client.set_read_timeout(request.timeout_seconds, 0);
    client.set_write_timeout(request.timeout_seconds, 0);
    httplib::Headers headers;
    for (const auto& [k, v] : request.headers) {
      headers.emplace(k, v);
    }
    auto result = client.Post(path, headers, request.body, "application/json");
    if (!result) {
      throw TransportError("POST " + origin + path + " failed: " + httplib::to_string(result.error()));
    }
    return HttpResponse{result->status, result->body};
  }
};

}  // namespace

std::shared_ptr<Transport> make_http_transport() { return std::make_shared<HttplibTransport>(); }

namespace detail {

HttpRequest build_http_request(const ProviderConfig& config, const Conversation& conversation,
                               const std::string& api_key) {
  switch (config.endpoint_kind) {
    case EndpointKind::OpenAiCompatible: return openai_request(config, conversation, api_key);
    case EndpointKind::GeminiCompatible: return gemini_request(config, conversation, api_key);
    case EndpointKind::Replay: break;
  }
  throw ConfigurationError("provider '" + config.provider_id + "' has no HTTP endpoint");
}

LlmResponse read_http_response(const ProviderConfig& config, const HttpResponse& response) {
  const std::string who = "provider '" + config.provider_id + "': HTTP " + std::to_string(response.status) + ": ";
  if (response.status == 408 || response.status == 429 || response.status >= 500) {
    throw TransportError(who + excerpt(response.body));
  }
  if (response.status >= 400) {
    throw ConfigurationError(who + excerpt(response.body));
  }
  if (response.status < 200 || response.status >= 300) {
    throw TransportError(who + "unexpected status");
  }

  const json body = parse_body(config, response);
  LlmResponse out{"", config.provider_id, 0, false};
  try {
    if (config.endpoint_kind == EndpointKind::OpenAiCompatible) {
      const json& choice = body.at("choices").at(0);
      const json& content = choice.at("message").value("content", json());
      out.text = content.is_string() ? content.get<std::string>() : "";
      out.truncated = choice.value("finish_reason", json()) == "length";
    } else {
      // A blocked prompt comes back without candidates: an empty completion.
      if (body.contains("candidates") && !body["candidates"].empty()) {
        const json& candidate = body["candidates"][0];
        if (candidate.contains("content")) {
          for (const auto& part : candidate["content"].value("parts", json::array())) {
            if (part.contains("text")) {
              out.text += part["text"].get<std::string>();
            }
          }
        }
        out.truncated = candidate.value("finishReason", json()) == "MAX_TOKENS";
      }
    }
  } catch (const json::exception&) {
    throw TransportError("provider '" + config.provider_id + "': unexpected response shape: " + excerpt(response.body));
  }
  return out;
}

}  // namespace detail

}  // namespace img2uml
