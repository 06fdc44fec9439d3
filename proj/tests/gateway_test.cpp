#include <doctest.h>

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <map>
#include <thread>

#include <nlohmann/json.hpp>

#include "img2uml/errors.hpp"
#include "img2uml/gateway.hpp"
#include "temp_dir.hpp"

using namespace img2uml;
using nlohmann::json;

namespace {

EnvLookup env_of(std::map<std::string, std::string> vars) {
  return [vars = std::move(vars)](const std::string& name) -> std::optional<std::string> {
    auto it = vars.find(name);
    if (it == vars.end()) {
      return std::nullopt;
    }
    return it->second;
  };
}

Conversation one_turn(std::string text, std::string image_tag = "a") {
  return Conversation{{Turn{Role::User, std::move(text),
                            std::make_shared<const Image>(Image::from_bytes(testing::fake_png(image_tag)))}}};
}

ProviderConfig replay_provider(const std::filesystem::path& dir) {
  ProviderConfig c;
  c.provider_id = "replay-gpt4v";
  c.endpoint_kind = EndpointKind::Replay;
  c.model_name = "gpt-4-vision-preview";
  c.replay_dir = dir;
  return c;
}

ProviderConfig live_provider(EndpointKind kind) {
  ProviderConfig c;
  c.provider_id = "live";
  c.endpoint_kind = kind;
  c.model_name = "vision-model";
  return c;
}

class ScriptedTransport : public Transport {
 public:
  explicit ScriptedTransport(HttpResponse reply) : reply_(std::move(reply)) {}
  HttpResponse post(const HttpRequest& request) override {
    last = request;
    return reply_;
  }
  HttpRequest last;

 private:
  HttpResponse reply_;
};

class SlowTransport : public Transport {
 public:
  HttpResponse post(const HttpRequest&) override {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(15));
    --in_flight;
    return HttpResponse{200, R"({"choices":[{"message":{"content":"ok"},"finish_reason":"stop"}]})"};
  }
  std::atomic<int> in_flight{0};
  std::atomic<int> peak{0};
};

}  // namespace

TEST_CASE("image signatures") {
  CHECK(Image::from_bytes(testing::fake_png()).media_type() == "image/png");
  CHECK(Image::from_bytes(testing::fake_jpeg()).media_type() == "image/jpeg");
  CHECK_THROWS_AS(Image::from_bytes("GIF89a..."), ConfigurationError);
  CHECK_THROWS_AS(Image::from_bytes(""), ConfigurationError);
  CHECK_THROWS_AS(Image::load("/nonexistent/image.png"), ConfigurationError);
}

TEST_CASE("provider config validation") {
  testing::TempDir dir;
  ProviderConfig c = replay_provider(dir.path());
  CHECK_NOTHROW(validate_provider_config(c));
  c.sampling = Sampling{0.8, 0.4, 1};
  CHECK_NOTHROW(validate_provider_config(c));
  c.sampling->temperature = -0.1;
  CHECK_THROWS_AS(validate_provider_config(c), ConfigurationError);
  c.sampling = Sampling{std::nullopt, 1.5, std::nullopt};
  CHECK_THROWS_AS(validate_provider_config(c), ConfigurationError);
  c.sampling.reset();
  c.max_parallel_requests = 0;
  CHECK_THROWS_AS(validate_provider_config(c), ConfigurationError);
  c.max_parallel_requests = 1;
  c.base_url = "ftp://example.com";
  CHECK_THROWS_AS(validate_provider_config(c), ConfigurationError);
}

TEST_CASE("conversation shape") {
  CHECK_THROWS_AS(validate_conversation(Conversation{}), Error);
  CHECK_THROWS_AS(validate_conversation(Conversation{{Turn{Role::Assistant, "hi"}}}), Error);
  Conversation c = one_turn("x");
  c.turns.push_back(Turn{Role::Assistant, "y", c.turns[0].image});
  CHECK_THROWS_AS(validate_conversation(c), Error);
}

TEST_CASE("environment names") {
  CHECK(api_key_variable("openai") == "IMG2UML_OPENAI_API_KEY");
  CHECK(api_key_variable("gemini-pro") == "IMG2UML_GEMINI_PRO_API_KEY");
  CHECK(api_key_variable("cog.vlm") == "IMG2UML_COG_VLM_API_KEY");

  ProviderConfig c = replay_provider("/from/config");
  CHECK(replay_root(c, env_of({})) == "/from/config");
  CHECK(replay_root(c, env_of({{"IMG2UML_REPLAY_DIR", "/from/env"}})) == "/from/env");
  c.replay_dir.reset();
  CHECK(replay_root(c, env_of({})) == "replay");
}

TEST_CASE("replay returns the stored response verbatim") {
  testing::TempDir dir;
  const ProviderConfig c = replay_provider(dir.path());
  const Conversation conv = one_turn("Can you turn this into PlantUML?");
  const std::string canned = "```plantuml\n@startuml\nclass A\n@enduml\n```\n\xe2\x9c\x93 trailing";
  const std::string digest = write_replay_fixture(dir.path(), c, conv, 2, canned);
  CHECK(std::filesystem::exists(dir / (digest + ".meta")));

  Gateway gw(nullptr, env_of({}));
  const Conversation before = conv;
  const auto r1 = gw.send(c, conv, 2);
  const auto r2 = gw.send(c, conv, 2);
  CHECK(r1.text == canned);
  CHECK(r2.text == r1.text);
  CHECK(r1.provider_id == "replay-gpt4v");
  CHECK_FALSE(r1.truncated);
  CHECK(conv == before);
  CHECK(gw.calls() == 2);

  const auto meta = json::parse(std::ifstream(dir / (digest + ".meta")));
  CHECK(meta["nonce"] == 2);
  CHECK(meta["turns"][0]["role"] == "user");
  CHECK(meta["turns"][0]["image_sha256"].is_string());
}

TEST_CASE("replay digest covers every keyed field") {
  const ProviderConfig c = replay_provider("/x");
  const Conversation conv = one_turn("p");
  const std::string base = conversation_digest(c, conv, 1);
  CHECK(base.size() == 64);
  CHECK(conversation_digest(c, conv, 1) == base);
  CHECK(conversation_digest(c, conv, 2) != base);
  CHECK(conversation_digest(c, one_turn("p", "b"), 1) != base);
  CHECK(conversation_digest(c, one_turn("q"), 1) != base);
  ProviderConfig other = c;
  other.model_name = "m2";
  CHECK(conversation_digest(other, conv, 1) != base);
  other = c;
  other.provider_id = "p2";
  CHECK(conversation_digest(other, conv, 1) != base);
  other = c;
  other.timeout_seconds = 5;  // not keyed
  CHECK(conversation_digest(other, conv, 1) == base);
  Conversation longer = conv;
  longer.turns.push_back(Turn{Role::Assistant, "r"});
  CHECK(conversation_digest(c, longer, 1) != base);
}

TEST_CASE("missing fixture") {
  testing::TempDir dir;
  const ProviderConfig c = replay_provider(dir.path());
  Gateway gw(nullptr, env_of({}));
  const Conversation conv = one_turn("nothing stored");
  try {
    gw.send(c, conv, 1);
    FAIL("expected FixtureMissingError");
  } catch (const FixtureMissingError& e) {
    CHECK(e.digest() == conversation_digest(c, conv, 1));
  }
}

TEST_CASE("replay dir from the environment wins") {
  testing::TempDir config_dir;
  testing::TempDir env_dir;
  const ProviderConfig c = replay_provider(config_dir.path());
  const Conversation conv = one_turn("p");
  write_replay_fixture(config_dir.path(), c, conv, 1, "from config");
  write_replay_fixture(env_dir.path(), c, conv, 1, "from env");
  CHECK(Gateway(nullptr, env_of({})).send(c, conv, 1).text == "from config");
  CHECK(Gateway(nullptr, env_of({{"IMG2UML_REPLAY_DIR", env_dir.path().string()}})).send(c, conv, 1).text ==
        "from env");
}

TEST_CASE("per-provider parallelism ceiling") {
  auto transport = std::make_shared<SlowTransport>();
  Gateway gw(transport, env_of({{"IMG2UML_LIVE_API_KEY", "k"}, {"IMG2UML_OTHER_API_KEY", "k"}}));
  ProviderConfig c = live_provider(EndpointKind::OpenAiCompatible);
  c.max_parallel_requests = 3;
  const Conversation conv = one_turn("p");

  std::vector<std::thread> threads;
  for (int i = 0; i < 16; ++i) {
    threads.emplace_back([&] { gw.send(c, conv); });
  }
  for (auto& t : threads) {
    t.join();
  }
  CHECK(transport->peak.load() <= 3);
  CHECK(transport->peak.load() >= 2);
  CHECK(gw.calls() == 16);

  // Limits are per provider id.
  transport->peak = 0;
  ProviderConfig a = c;
  a.max_parallel_requests = 1;
  ProviderConfig b = a;
  b.provider_id = "other";
  threads.clear();
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] { gw.send(i % 2 == 0 ? a : b, conv); });
  }
  for (auto& t : threads) {
    t.join();
  }
  CHECK(transport->peak.load() <= 2);
}

TEST_CASE("openai-compatible request shape") {
  ProviderConfig c = live_provider(EndpointKind::OpenAiCompatible);
  c.base_url = "http://localhost:8000/v1/";
  c.sampling = Sampling{0.8, 0.4, 1};
  Conversation conv = one_turn("describe", "img");
  conv.turns.push_back(Turn{Role::Assistant, "@startuml\n@enduml"});
  conv.turns.push_back(Turn{Role::User, "fix it"});

  const HttpRequest req = detail::build_http_request(c, conv, "sk-test");
  CHECK(req.url == "http://localhost:8000/v1/chat/completions");
  CHECK(req.headers == std::vector<std::pair<std::string, std::string>>{{"Authorization", "Bearer sk-test"}});
  const json body = json::parse(req.body);
  CHECK(body["model"] == "vision-model");
  CHECK(body["temperature"] == 0.8);
  CHECK(body["top_p"] == 0.4);
  CHECK(body["top_k"] == 1);
  REQUIRE(body["messages"].size() == 3);
  CHECK(body["messages"][0]["content"][0] == json{{"type", "text"}, {"text", "describe"}});
  CHECK(body["messages"][0]["content"][1]["image_url"]["url"] == "data:image/png;base64,iVBORw0KGgppbWc=");
  CHECK(body["messages"][1] == json{{"role", "assistant"}, {"content", "@startuml\n@enduml"}});
  CHECK(body["messages"][2]["content"].size() == 1);

  c.sampling.reset();
  const json plain = json::parse(detail::build_http_request(c, conv, "k").body);
  CHECK_FALSE(plain.contains("temperature"));
  CHECK_FALSE(plain.contains("top_k"));
}

TEST_CASE("gemini-compatible request shape") {
  ProviderConfig c = live_provider(EndpointKind::GeminiCompatible);
  c.model_name = "gemini-pro-vision";
  c.sampling = Sampling{0.2, std::nullopt, 3};
  Conversation conv = one_turn("describe", "img");
  conv.turns.push_back(Turn{Role::Assistant, "answer"});

  const HttpRequest req = detail::build_http_request(c, conv, "g-key");
  CHECK(req.url == "https://generativelanguage.googleapis.com/v1beta/models/gemini-pro-vision:generateContent");
  CHECK(req.headers == std::vector<std::pair<std::string, std::string>>{{"x-goog-api-key", "g-key"}});
  const json body = json::parse(req.body);
  CHECK(body["contents"][0]["role"] == "user");
  CHECK(body["contents"][0]["parts"][1]["inline_data"] ==
        json{{"mime_type", "image/png"}, {"data", "iVBORw0KGgppbWc="}});
  CHECK(body["contents"][1]["role"] == "model");
  CHECK(body["generationConfig"] == json{{"temperature", 0.2}, {"topK", 3}});
}

TEST_CASE("live responses and error mapping") {
  const ProviderConfig openai = live_provider(EndpointKind::OpenAiCompatible);
  const ProviderConfig gemini = live_provider(EndpointKind::GeminiCompatible);

  auto r = detail::read_http_response(
      openai, {200, R"({"choices":[{"message":{"content":"hello"},"finish_reason":"length"}]})"});
  CHECK(r.text == "hello");
  CHECK(r.truncated);

  r = detail::read_http_response(
      gemini, {200, R"({"candidates":[{"content":{"parts":[{"text":"a"},{"text":"b"}]},"finishReason":"STOP"}]})"});
  CHECK(r.text == "ab");
  CHECK_FALSE(r.truncated);
  CHECK(detail::read_http_response(gemini, {200, R"({"promptFeedback":{"blockReason":"SAFETY"}})"}).text.empty());

  CHECK_THROWS_AS(detail::read_http_response(openai, {400, "bad request"}), ConfigurationError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {401, "unauthorized"}), ConfigurationError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {404, ""}), ConfigurationError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {408, ""}), TransportError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {429, "slow down"}), TransportError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {503, ""}), TransportError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {200, "<html>"}), TransportError);
  CHECK_THROWS_AS(detail::read_http_response(openai, {200, R"({"choices":[]})"}), TransportError);
}

TEST_CASE("missing API key is a configuration error") {
  auto transport = std::make_shared<ScriptedTransport>(HttpResponse{200, "{}"});
  Gateway gw(transport, env_of({}));
  CHECK_THROWS_AS(gw.send(live_provider(EndpointKind::OpenAiCompatible), one_turn("p")), ConfigurationError);
  CHECK(transport->last.url.empty());
}

TEST_CASE("HTTP transport against a local server") {
  httplib::Server server;
  std::string seen_auth;
  std::string seen_body;
  server.Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(R"({"choices":[{"message":{"content":"@startuml\nclass A\n@enduml"},"finish_reason":"stop"}]})",
                    "application/json");
  });
  server.Post("/v1/fail/chat/completions", [](const httplib::Request&, httplib::Response& res) {
    res.status = 429;
    res.set_content("rate limited", "text/plain");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::thread t([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  ProviderConfig c = live_provider(EndpointKind::OpenAiCompatible);
  c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1";
  c.timeout_seconds = 5;
  Gateway gw(make_http_transport(), env_of({{"IMG2UML_LIVE_API_KEY", "secret"}}));
  const auto r = gw.send(c, one_turn("p"));
  CHECK(r.text == "@startuml\nclass A\n@enduml");
  CHECK(seen_auth == "Bearer secret");
  CHECK(json::parse(seen_body)["model"] == "vision-model");

  c.base_url = "http://127.0.0.1:" + std::to_string(port) + "/v1/fail";
  CHECK_THROWS_AS(gw.send(c, one_turn("p")), TransportError);

  server.stop();
  t.join();

  // Nothing listens any more.
  c.timeout_seconds = 2;
  CHECK_THROWS_AS(gw.send(c, one_turn("p")), TransportError);
}
