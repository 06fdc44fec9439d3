#pragma once

#include <string>
#include <string_view>

namespace img2uml {

/// Lower-case hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

/// Standard base64 with padding, no line breaks.
std::string base64_encode(std::string_view bytes);

}  // namespace img2uml
