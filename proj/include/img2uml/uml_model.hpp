#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace img2uml {

enum class Visibility { Public, Private, Protected, Package, Unspecified };

enum class ClassifierKind { Class, AbstractClass, Interface, Enumeration };

enum class RelationshipKind {
  Generalization,
  Realization,
  Association,
  Aggregation,
  Composition,
  Dependency,
};

enum class Navigability { None, SourceToTarget, TargetToSource };

struct Attribute {
  std::string name;
  std::optional<std::string> type_text;
  Visibility visibility = Visibility::Unspecified;

  bool operator==(const Attribute&) const = default;
};

struct Parameter {
  std::optional<std::string> name;
  std::string type_text;

  bool operator==(const Parameter&) const = default;
};

struct Method {
  std::string name;
  std::vector<Parameter> parameters;
  std::optional<std::string> return_type_text;
  Visibility visibility = Visibility::Unspecified;

  bool operator==(const Method&) const = default;
};

struct Classifier {
  std::string name;
  ClassifierKind kind = ClassifierKind::Class;
  std::vector<Attribute> attributes;
  std::vector<Method> methods;
  std::vector<std::string> literals;  // enumeration only

  bool operator==(const Classifier&) const = default;
};

/// For generalization and realization, `source` is the specializing or
/// implementing classifier and `target` the general one. For aggregation and
/// composition, `source` is the whole (the diamond end).
struct Relationship {
  RelationshipKind kind = RelationshipKind::Association;
  std::string source;
  std::string target;
  Navigability navigability = Navigability::None;
  std::optional<std::string> source_multiplicity;
  std::optional<std::string> target_multiplicity;
  std::optional<std::string> label;

  bool operator==(const Relationship&) const = default;
};

/// Ordered classifiers and relationships of one class diagram. Equality is
/// structural, order-sensitive and compares names raw.
struct UmlModel {
  std::vector<Classifier> classifiers;
  std::vector<Relationship> relationships;

  bool operator==(const UmlModel&) const = default;

  /// Classifier whose normalized name equals normalize_name(name), if any.
  const Classifier* find_classifier(std::string_view name) const;
};

std::string_view to_string(Visibility v);
std::string_view to_string(ClassifierKind k);
std::string_view to_string(RelationshipKind k);
std::string_view to_string(Navigability n);

std::optional<Visibility> parse_visibility(std::string_view s);
std::optional<ClassifierKind> parse_classifier_kind(std::string_view s);
std::optional<RelationshipKind> parse_relationship_kind(std::string_view s);
std::optional<Navigability> parse_navigability(std::string_view s);

/// Lower-cases, trims, and collapses internal whitespace runs to a single
/// underscore. Throws UnusableNameError when nothing is left.
std::string normalize_name(std::string_view raw);

/// Same folding as normalize_name, but an empty result is returned rather
/// than rejected. Used for comparing free-text properties.
std::string fold_text(std::string_view raw);

/// `1`, `*`, `0..*`, `1..5`: one bound, or two bounds joined by `..`, where a
/// bound is a digit run or `*`.
bool is_valid_multiplicity(std::string_view text);

/// One description per violated invariant; empty iff the model is valid.
std::vector<std::string> validate_model(const UmlModel& model);

/// Throws InvalidModelError listing the violations when the model is invalid.
void require_valid(const UmlModel& model, std::string_view what);

/// Structural equality with every name and free-text field compared after
/// fold_text. Sequence order still matters.
bool semantically_equal(const UmlModel& a, const UmlModel& b);

}  // namespace img2uml
