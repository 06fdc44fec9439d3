#include "img2uml/uml_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "img2uml/errors.hpp"

namespace img2uml {

namespace {

bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

bool is_bound(std::string_view s) {
  if (s == "*") {
    return true;
  }
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

template <typename Enum, std::size_t N>
std::optional<Enum> lookup(std::string_view s, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (name == s) {
      return value;
    }
  }
  return std::nullopt;
}

template <typename Enum, std::size_t N>
std::string_view name_of(Enum e, const std::pair<Enum, std::string_view> (&table)[N]) {
  for (const auto& [value, name] : table) {
    if (value == e) {
      return name;
    }
  }
  return "?";
}

constexpr std::pair<Visibility, std::string_view> kVisibilities[] = {
    {Visibility::Public, "public"},
    {Visibility::Private, "private"},
    {Visibility::Protected, "protected"},
    {Visibility::Package, "package"},
    {Visibility::Unspecified, "unspecified"},
};

constexpr std::pair<ClassifierKind, std::string_view> kClassifierKinds[] = {
    {ClassifierKind::Class, "class"},
    {ClassifierKind::AbstractClass, "abstract-class"},
    {ClassifierKind::Interface, "interface"},
    {ClassifierKind::Enumeration, "enumeration"},
};

constexpr std::pair<RelationshipKind, std::string_view> kRelationshipKinds[] = {
    {RelationshipKind::Generalization, "generalization"},
    {RelationshipKind::Realization, "realization"},
    {RelationshipKind::Association, "association"},
    {RelationshipKind::Aggregation, "aggregation"},
    {RelationshipKind::Composition, "composition"},
    {RelationshipKind::Dependency, "dependency"},
};

constexpr std::pair<Navigability, std::string_view> kNavigabilities[] = {
    {Navigability::None, "none"},
    {Navigability::SourceToTarget, "source-to-target"},
    {Navigability::TargetToSource, "target-to-source"},
};

std::optional<std::string> fold_opt(const std::optional<std::string>& s) {
  if (!s) {
    return std::nullopt;
  }
  return fold_text(*s);
}

}  // namespace

std::string_view to_string(Visibility v) { return name_of(v, kVisibilities); }
std::string_view to_string(ClassifierKind k) { return name_of(k, kClassifierKinds); }
std::string_view to_string(RelationshipKind k) { return name_of(k, kRelationshipKinds); }
std::string_view to_string(Navigability n) { return name_of(n, kNavigabilities); }

std::optional<Visibility> parse_visibility(std::string_view s) { return lookup(s, kVisibilities); }
std::optional<ClassifierKind> parse_classifier_kind(std::string_view s) { return lookup(s, kClassifierKinds); }
std::optional<RelationshipKind> parse_relationship_kind(std::string_view s) {
  return lookup(s, kRelationshipKinds);
}
std::optional<Navigability> parse_navigability(std::string_view s) { return lookup(s, kNavigabilities); }

std::string fold_text(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (char c : raw) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back('_');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return out;
}

std::string normalize_name(std::string_view raw) {
  std::string out = fold_text(raw);
  if (out.empty()) {
    throw UnusableNameError("name '" + std::string(raw) + "' is empty after normalization");
  }
  return out;
}

bool is_valid_multiplicity(std::string_view text) {
  const auto dots = text.find("..");
  if (dots == std::string_view::npos) {
    return is_bound(text);
  }
  return is_bound(text.substr(0, dots)) && is_bound(text.substr(dots + 2));
}

const Classifier* UmlModel::find_classifier(std::string_view name) const {
  const std::string key = fold_text(name);
  if (key.empty()) {
    return nullptr;
  }
  for (const auto& c : classifiers) {
    if (fold_text(c.name) == key) {
      return &c;
    }
  }
  return nullptr;
}

std::vector<std::string> validate_model(const UmlModel& model) {
  std::vector<std::string> violations;
  std::set<std::string> seen;

  for (const auto& c : model.classifiers) {
    const std::string key = fold_text(c.name);
    if (key.empty()) {
      violations.push_back("classifier name '" + c.name + "' is empty after normalization");
    } else if (!seen.insert(key).second) {
      violations.push_back("duplicate classifier name '" + c.name + "' (normalized '" + key + "')");
    }

    if (c.kind == ClassifierKind::Enumeration) {
      if (!c.attributes.empty() || !c.methods.empty()) {
        violations.push_back("enumeration '" + c.name + "' has attributes or methods");
      }
    } else if (!c.literals.empty()) {
      violations.push_back("non-enumeration '" + c.name + "' has literals");
    }

    for (const auto& a : c.attributes) {
      if (fold_text(a.name).empty()) {
        violations.push_back("attribute of '" + c.name + "' has an empty name");
      }
    }
    for (const auto& m : c.methods) {
      if (fold_text(m.name).empty()) {
        violations.push_back("method of '" + c.name + "' has an empty name");
      }
    }
  }

  for (const auto& r : model.relationships) {
    const std::string where = std::string(to_string(r.kind)) + " " + r.source + " -> " + r.target;
    for (const auto* end : {&r.source, &r.target}) {
      const std::string key = fold_text(*end);
      if (key.empty() || seen.count(key) == 0) {
        violations.push_back(where + ": endpoint '" + *end + "' names no classifier");
      }
    }
    if (r.kind == RelationshipKind::Generalization || r.kind == RelationshipKind::Realization) {
      if (r.navigability != Navigability::None) {
        violations.push_back(where + ": navigability must be none");
      }
      if (r.source_multiplicity || r.target_multiplicity) {
        violations.push_back(where + ": multiplicities are not allowed");
      }
      continue;
    }
    for (const auto* m : {&r.source_multiplicity, &r.target_multiplicity}) {
      if (*m && !is_valid_multiplicity(**m)) {
        violations.push_back(where + ": malformed multiplicity '" + **m + "'");
      }
    }
  }
  return violations;
}

void require_valid(const UmlModel& model, std::string_view what) {
  const auto violations = validate_model(model);
  if (violations.empty()) {
    return;
  }
  std::ostringstream msg;
  msg << what << " is not a valid model:";
  for (const auto& v : violations) {
    msg << "\n  " << v;
  }
  throw InvalidModelError(msg.str());
}

bool semantically_equal(const UmlModel& a, const UmlModel& b) {
  auto fold_model = [](const UmlModel& m) {
    UmlModel out = m;
    for (auto& c : out.classifiers) {
      c.name = fold_text(c.name);
      for (auto& attr : c.attributes) {
        attr.name = fold_text(attr.name);
        attr.type_text = fold_opt(attr.type_text);
      }
      for (auto& method : c.methods) {
        method.name = fold_text(method.name);
        method.return_type_text = fold_opt(method.return_type_text);
        for (auto& p : method.parameters) {
          p.name = fold_opt(p.name);
          p.type_text = fold_text(p.type_text);
        }
      }
      for (auto& lit : c.literals) {
        lit = fold_text(lit);
      }
    }
    for (auto& r : out.relationships) {
      r.source = fold_text(r.source);
      r.target = fold_text(r.target);
      r.label = fold_opt(r.label);
    }
    return out;
  };
  return fold_model(a) == fold_model(b);
}

}  // namespace img2uml
