#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "img2uml/digest.hpp"
#include "img2uml/errors.hpp"
#include "gateway_internal.hpp"

namespace img2uml {

namespace {

// Netstring framing keeps field boundaries unambiguous.
void frame(std::string& out, std::string_view field) {
  out += std::to_string(field.size());
  out += ':';
  out += field;
  out += ',';
}

void write_file(const std::filesystem::path& path, std::string_view content) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!f) {
    throw Error("cannot write " + path.string());
  }
}

}  // namespace

std::filesystem::path replay_root(const ProviderConfig& config, const EnvLookup& env) {
  if (auto dir = env("IMG2UML_REPLAY_DIR"); dir && !dir->empty()) {
    return *dir;
  }
  if (config.replay_dir) {
    return *config.replay_dir;
  }
  return "replay";
}

std::string conversation_digest(const ProviderConfig& config, const Conversation& conversation, int nonce) {
  std::string data;
  frame(data, "img2uml-replay-v1");
  frame(data, config.provider_id);
  frame(data, config.model_name);
  frame(data, std::to_string(nonce));
  frame(data, std::to_string(conversation.turns.size()));
  for (const auto& turn : conversation.turns) {
    frame(data, to_string(turn.role));
    frame(data, turn.text);
    frame(data, turn.image ? turn.image->bytes() : std::string_view("-"));
  }
  return sha256_hex(data);
}

std::string write_replay_fixture(const std::filesystem::path& root, const ProviderConfig& config,
                                 const Conversation& conversation, int nonce, std::string_view response) {
  validate_conversation(conversation);
  const std::string digest = conversation_digest(config, conversation, nonce);
  std::filesystem::create_directories(root);

  nlohmann::json turns = nlohmann::json::array();
  for (const auto& turn : conversation.turns) {
    nlohmann::json t = {{"role", to_string(turn.role)}, {"text", turn.text}, {"image_sha256", nullptr}};
    if (turn.image) {
      t["image_sha256"] = sha256_hex(turn.image->bytes());
      t["image_media_type"] = turn.image->media_type();
    }
    turns.push_back(std::move(t));
  }
  const nlohmann::json meta = {
      {"digest", digest},   {"provider_id", config.provider_id}, {"model_name", config.model_name},
      {"nonce", nonce},     {"turns", std::move(turns)},
  };
  write_file(root / (digest + ".txt"), response);
  write_file(root / (digest + ".meta"),
             meta.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");
  return digest;
}

namespace detail {

LlmResponse read_replay(const ProviderConfig& config, const Conversation& conversation, int nonce,
                        const EnvLookup& env) {
  const std::string digest = conversation_digest(config, conversation, nonce);
  const auto path = replay_root(config, env) / (digest + ".txt");
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw FixtureMissingError("no replay fixture " + path.string(), digest);
  }
  std::ostringstream text;
  text << f.rdbuf();
  return LlmResponse{text.str(), config.provider_id, 0, false};
}

}  // namespace detail

}  // namespace img2uml
