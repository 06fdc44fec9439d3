#pragma once

#include <compare>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "img2uml/uml_model.hpp"

namespace img2uml {

enum class ElementCategory { Classifier, Attribute, Method, Relationship };

/// Identity of a gradable element. Components are normalized names.
///   classifier:   {name}
///   attribute:    {owner, name}
///   method:       {owner, name, parameter count}
///   relationship: {a, "->", b} for generalization, realization and
///                 dependency; {min(a,b), "--", max(a,b)} otherwise.
struct ElementKey {
  ElementCategory category = ElementCategory::Classifier;
  std::vector<std::string> identity;

  auto operator<=>(const ElementKey&) const = default;
  bool operator==(const ElementKey&) const = default;

  /// "classifier animal", "method duck.quack/0", "relationship fish->animal".
  std::string to_string() const;
};

enum class MistakeKind { Missing, Hallucinated, PropertyMismatch };

enum class GradedProperty {
  ClassifierKind,
  Visibility,
  TypeText,
  ReturnType,
  ParameterTypes,
  Kind,
  Navigability,
  MultiplicitySource,
  MultiplicityTarget,
  Label,
};

struct Mistake {
  MistakeKind kind = MistakeKind::Missing;
  ElementKey key;
  std::optional<GradedProperty> property;
  std::optional<std::string> expected;
  std::optional<std::string> actual;

  bool operator==(const Mistake&) const = default;
};

struct DiffReport {
  std::vector<Mistake> mistakes;
  int total = 0;

  int count(MistakeKind kind) const;
  bool operator==(const DiffReport&) const = default;
};

std::string_view to_string(ElementCategory c);
std::string_view to_string(MistakeKind k);
std::string_view to_string(GradedProperty p);

/// Rendered in place of an absent optional property value.
inline constexpr std::string_view kAbsentValue = "(absent)";

/// Precondition: validate_model(model) is empty (throws InvalidModelError otherwise).
std::set<ElementKey> extract_elements(const UmlModel& model);

/// Mistakes are: one `missing` per gold key without a candidate counterpart,
/// one `hallucinated` per candidate key without a gold counterpart, and one
/// `property-mismatch` per differing graded property of a matched key. When
/// several elements share a key, the first in model order is graded.
/// Ordering: missing, hallucinated, mismatches; each sorted by key (and
/// property).
DiffReport diff_models(const UmlModel& gold, const UmlModel& candidate);

nlohmann::json diff_to_json(const DiffReport& report);

/// Fixed-width table, one mistake per row, followed by a total line.
std::string render_diff_table(const DiffReport& report);

}  // namespace img2uml
