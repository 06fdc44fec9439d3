#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "img2uml/uml_model.hpp"

namespace img2uml {

/// A positioned syntax error. Line and column are 1-based byte positions.
struct Diagnostic {
  int line = 1;
  int column = 1;
  std::string message;
  std::string offending_text;

  bool operator==(const Diagnostic&) const = default;
};

/// "line L, column C: message (near 'text')"
std::string format_diagnostic(const Diagnostic& d);

/// Either a parsed model or a non-empty list of diagnostics.
class ParseOutcome {
 public:
  explicit ParseOutcome(UmlModel model) : value_(std::move(model)) {}
  explicit ParseOutcome(std::vector<Diagnostic> diagnostics);

  bool ok() const noexcept { return std::holds_alternative<UmlModel>(value_); }
  explicit operator bool() const noexcept { return ok(); }

  /// Precondition: ok().
  const UmlModel& model() const { return std::get<UmlModel>(value_); }
  /// Precondition: !ok().
  const std::vector<Diagnostic>& diagnostics() const { return std::get<std::vector<Diagnostic>>(value_); }

 private:
  std::variant<UmlModel, std::vector<Diagnostic>> value_;
};

/// Parses the class-diagram subset of PlantUML.
///
/// Accepted constructs:
///   - `class|abstract class|abstract|interface|enum Name` with an optional
///     `{ ... }` body (or `{}` on the same line), optional `extends A, B` and
///     `implements C` clauses. Names are identifiers or double-quoted text.
///   - member lines `[+-#~] name [: type]` and `[+-#~] name(params) [: type]`,
///     also the Java-like `type name` / `type name(params)` spellings;
///     `{static}`-style modifiers are accepted and dropped.
///   - enum bodies: one literal per line.
///   - relationship lines `A ["m1"] <arrow> ["m2"] B [: label]` where the
///     label may carry a leading or trailing `<`/`>` direction marker.
///     Arrows are solid or dotted with optional heads `<|`, `|>`, `<`, `>`,
///     `o`, `*` on either side, and may contain a layout hint (`-up->`).
///   - `skinparam`, `hide`, `show`, `title` and similar layout directives,
///     `'` comments, `/' '/` block comments and blank lines are skipped.
///
/// Text outside the first @startuml/@enduml pair is ignored; both markers
/// are optional. Any other line is an error. Classifiers that are only named
/// by relationships are appended as empty classes in first-mention order.
/// On success the model satisfies validate_model.
ParseOutcome parse_plantuml(std::string_view source);

/// Canonical PlantUML text for a valid model. Throws InvalidModelError otherwise.
std::string emit_plantuml(const UmlModel& model);

/// First `@startuml ... @enduml` substring (inclusive), with or without
/// surrounding Markdown fences.
std::optional<std::string> extract_plantuml_block(std::string_view raw_llm_text);

}  // namespace img2uml
