#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "img2uml/gateway.hpp"
#include "img2uml/plantuml.hpp"
#include "img2uml/uml_model.hpp"

namespace img2uml {

/// prompt_id is "1", "2" or "3" for the built-in prompts, any other label for
/// custom text.
struct PromptTemplate {
  std::string prompt_id;
  std::string text;
  bool ignore_semantics = false;

  bool operator==(const PromptTemplate&) const = default;
};

inline constexpr std::string_view kIgnoreSemanticsSentence = "Ignore the semantics.";

/// Built-in prompt 1, 2 or 3. Throws UsageError for other numbers.
PromptTemplate builtin_prompt(int number);

/// Template text, plus " Ignore the semantics." when the flag is set.
std::string render_prompt(const PromptTemplate& prompt);

/// Repair request sent after a parse failure: the diagnostics followed by a
/// short reference of the accepted notation.
std::string repair_message(const std::vector<Diagnostic>& diagnostics);

/// Single user turn carrying the rendered prompt and the image.
Conversation build_initial_conversation(const std::shared_ptr<const Image>& image, const PromptTemplate& prompt);

struct ConversionSuccess {
  UmlModel model;
  std::string plantuml_text;  // the extracted block as the model wrote it
};

struct ConversionSyntaxError {
  std::vector<Diagnostic> diagnostics;
  std::string raw_text;
};

struct ConversionRefusal {
  std::string raw_text;
};

enum class OutcomeClass { Ok, SyntaxError, Refusal };

std::string_view to_string(OutcomeClass c);

struct AttemptOutcome {
  std::variant<ConversionSuccess, ConversionSyntaxError, ConversionRefusal> result;
  int repairs_used = 0;
  /// Every turn exchanged, including the final assistant response.
  Conversation transcript;

  OutcomeClass outcome_class() const { return static_cast<OutcomeClass>(result.index()); }
  const ConversionSuccess* success() const { return std::get_if<ConversionSuccess>(&result); }
  const ConversionSyntaxError* syntax_error() const { return std::get_if<ConversionSyntaxError>(&result); }
  const ConversionRefusal* refusal() const { return std::get_if<ConversionRefusal>(&result); }
};

struct ConvertOptions {
  int max_repairs = 0;
  int nonce = 0;
};

/// One conversion attempt in a fresh conversation, followed by up to
/// max_repairs repair rounds in the same conversation. Gateway errors
/// propagate unchanged.
AttemptOutcome convert(Gateway& gateway, const std::shared_ptr<const Image>& image, const PromptTemplate& prompt,
                       const ProviderConfig& provider, const ConvertOptions& options = {});

/// Writes the transcript turns, extracted block, model JSON (on success) and
/// outcome.json into `dir`, replacing any previous content. The directory
/// appears only once fully written.
void write_attempt_artifacts(const std::filesystem::path& dir, const AttemptOutcome& outcome);

}  // namespace img2uml
