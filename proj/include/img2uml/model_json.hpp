#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "img2uml/uml_model.hpp"

namespace img2uml {

// JSON form of UmlModel. Field names follow the struct members; enums are
// lower-case hyphenated strings; absent optionals are written as null and
// accepted as null or missing on read.

nlohmann::json model_to_json(const UmlModel& model);

/// Throws FormatError on structural problems or unknown enum values.
UmlModel model_from_json(const nlohmann::json& j);

std::string serialize_model(const UmlModel& model);
UmlModel deserialize_model(std::string_view text);

/// Reads and deserializes a model file. Throws FormatError on I/O or format problems.
UmlModel load_model_file(const std::filesystem::path& path);

}  // namespace img2uml
