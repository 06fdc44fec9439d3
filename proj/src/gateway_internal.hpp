#pragma once

#include "img2uml/gateway.hpp"

namespace img2uml::detail {

/// Throws FixtureMissingError when the store holds no response for the conversation.
LlmResponse read_replay(const ProviderConfig& config, const Conversation& conversation, int nonce,
                        const EnvLookup& env);

}  // namespace img2uml::detail
