#include "img2uml/model_diff.hpp"

#include <algorithm>
#include <array>
#include <iomanip>
#include <map>
#include <sstream>
#include <variant>

namespace img2uml {

namespace {

bool ordered_kind(RelationshipKind k) {
  return k == RelationshipKind::Generalization || k == RelationshipKind::Realization ||
         k == RelationshipKind::Dependency;
}

ElementKey classifier_key(const Classifier& c) {
  return {ElementCategory::Classifier, {normalize_name(c.name)}};
}

ElementKey attribute_key(const Classifier& owner, const Attribute& a) {
  return {ElementCategory::Attribute, {normalize_name(owner.name), normalize_name(a.name)}};
}

ElementKey method_key(const Classifier& owner, const Method& m) {
  return {ElementCategory::Method,
          {normalize_name(owner.name), normalize_name(m.name), std::to_string(m.parameters.size())}};
}

ElementKey relationship_key(const Relationship& r) {
  std::string a = normalize_name(r.source);
  std::string b = normalize_name(r.target);
  if (ordered_kind(r.kind)) {
    return {ElementCategory::Relationship, {std::move(a), "->", std::move(b)}};
  }
  if (b < a) {
    std::swap(a, b);
  }
  return {ElementCategory::Relationship, {std::move(a), "--", std::move(b)}};
}

using Element = std::variant<const Classifier*, const Attribute*, const Method*, const Relationship*>;

/// First element per key, in model order.
std::map<ElementKey, Element> index_elements(const UmlModel& m) {
  std::map<ElementKey, Element> out;
  for (const auto& c : m.classifiers) {
    out.emplace(classifier_key(c), &c);
    for (const auto& a : c.attributes) {
      out.emplace(attribute_key(c, a), &a);
    }
    for (const auto& method : c.methods) {
      out.emplace(method_key(c, method), &method);
    }
  }
  for (const auto& r : m.relationships) {
    out.emplace(relationship_key(r), &r);
  }
  return out;
}

std::string show(const std::optional<std::string>& s) { return s ? *s : std::string(kAbsentValue); }

bool same_text(const std::optional<std::string>& a, const std::optional<std::string>& b) {
  if (a.has_value() != b.has_value()) {
    return false;
  }
  return !a || fold_text(*a) == fold_text(*b);
}

std::string join_types(const Method& m) {
  std::string out;
  for (std::size_t i = 0; i < m.parameters.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += m.parameters[i].type_text;
  }
  return out;
}

Navigability reversed(Navigability n) {
  switch (n) {
    case Navigability::SourceToTarget: return Navigability::TargetToSource;
    case Navigability::TargetToSource: return Navigability::SourceToTarget;
    case Navigability::None: return Navigability::None;
  }
  return n;
}

class MismatchCollector {
 public:
  MismatchCollector(const ElementKey& key, std::vector<Mistake>& out) : key_(key), out_(out) {}

  void add(GradedProperty p, std::string expected, std::string actual) {
    out_.push_back(Mistake{MistakeKind::PropertyMismatch, key_, p, std::move(expected), std::move(actual)});
  }

  void text(GradedProperty p, const std::optional<std::string>& expected, const std::optional<std::string>& actual) {
    if (!same_text(expected, actual)) {
      add(p, show(expected), show(actual));
    }
  }

  template <typename Enum>
  void value(GradedProperty p, Enum expected, Enum actual) {
    if (expected != actual) {
      add(p, std::string(to_string(expected)), std::string(to_string(actual)));
    }
  }

 private:
  const ElementKey& key_;
  std::vector<Mistake>& out_;
};

void compare(const ElementKey& key, const Element& gold, const Element& cand, std::vector<Mistake>& out) {
  MismatchCollector diff(key, out);
  if (auto* g = std::get_if<const Classifier*>(&gold)) {
    diff.value(GradedProperty::ClassifierKind, (*g)->kind, std::get<const Classifier*>(cand)->kind);
  } else if (auto* g = std::get_if<const Attribute*>(&gold)) {
    const Attribute* c = std::get<const Attribute*>(cand);
    diff.value(GradedProperty::Visibility, (*g)->visibility, c->visibility);
    diff.text(GradedProperty::TypeText, (*g)->type_text, c->type_text);
  } else if (auto* g = std::get_if<const Method*>(&gold)) {
    const Method* c = std::get<const Method*>(cand);
    diff.value(GradedProperty::Visibility, (*g)->visibility, c->visibility);
    diff.text(GradedProperty::ReturnType, (*g)->return_type_text, c->return_type_text);
    const bool same_params = std::equal(
        (*g)->parameters.begin(), (*g)->parameters.end(), c->parameters.begin(), c->parameters.end(),
        [](const Parameter& a, const Parameter& b) { return fold_text(a.type_text) == fold_text(b.type_text); });
    if (!same_params) {
      diff.add(GradedProperty::ParameterTypes, join_types(**g), join_types(*c));
    }
  } else {
    const Relationship& gr = *std::get<const Relationship*>(gold);
    Relationship cr = *std::get<const Relationship*>(cand);
    // Unordered keys may match a candidate drawn in the opposite direction;
    // express its end properties relative to the gold orientation.
    if (fold_text(cr.source) != fold_text(gr.source)) {
      std::swap(cr.source, cr.target);
      std::swap(cr.source_multiplicity, cr.target_multiplicity);
      cr.navigability = reversed(cr.navigability);
    }
    diff.value(GradedProperty::Kind, gr.kind, cr.kind);
    diff.value(GradedProperty::Navigability, gr.navigability, cr.navigability);
    diff.text(GradedProperty::MultiplicitySource, gr.source_multiplicity, cr.source_multiplicity);
    diff.text(GradedProperty::MultiplicityTarget, gr.target_multiplicity, cr.target_multiplicity);
    diff.text(GradedProperty::Label, gr.label, cr.label);
  }
}

std::string pad(std::string_view s, std::size_t width) {
  std::string out(s);
  if (out.size() < width) {
    out.append(width - out.size(), ' ');
  }
  return out;
}

}  // namespace

std::string_view to_string(ElementCategory c) {
  switch (c) {
    case ElementCategory::Classifier: return "classifier";
    case ElementCategory::Attribute: return "attribute";
    case ElementCategory::Method: return "method";
    case ElementCategory::Relationship: return "relationship";
  }
  return "?";
}

std::string_view to_string(MistakeKind k) {
  switch (k) {
    case MistakeKind::Missing: return "missing";
    case MistakeKind::Hallucinated: return "hallucinated";
    case MistakeKind::PropertyMismatch: return "property-mismatch";
  }
  return "?";
}

std::string_view to_string(GradedProperty p) {
  switch (p) {
    case GradedProperty::ClassifierKind: return "classifier-kind";
    case GradedProperty::Visibility: return "visibility";
    case GradedProperty::TypeText: return "type_text";
    case GradedProperty::ReturnType: return "return_type";
    case GradedProperty::ParameterTypes: return "parameter-types";
    case GradedProperty::Kind: return "kind";
    case GradedProperty::Navigability: return "navigability";
    case GradedProperty::MultiplicitySource: return "multiplicity-source";
    case GradedProperty::MultiplicityTarget: return "multiplicity-target";
    case GradedProperty::Label: return "label";
  }
  return "?";
}

std::string ElementKey::to_string() const {
  std::string out(img2uml::to_string(category));
  out += ' ';
  switch (category) {
    case ElementCategory::Classifier:
      out += identity.at(0);
      break;
    case ElementCategory::Attribute:
      out += identity.at(0) + "." + identity.at(1);
      break;
    case ElementCategory::Method:
      out += identity.at(0) + "." + identity.at(1) + "/" + identity.at(2);
      break;
    case ElementCategory::Relationship:
      out += identity.at(0) + identity.at(1) + identity.at(2);
      break;
  }
  return out;
}

int DiffReport::count(MistakeKind kind) const {
  return static_cast<int>(
      std::count_if(mistakes.begin(), mistakes.end(), [kind](const Mistake& m) { return m.kind == kind; }));
}

std::set<ElementKey> extract_elements(const UmlModel& model) {
  require_valid(model, "model");
  std::set<ElementKey> keys;
  for (auto& [key, element] : index_elements(model)) {
    keys.insert(key);
  }
  return keys;
}

DiffReport diff_models(const UmlModel& gold, const UmlModel& candidate) {
  require_valid(gold, "gold model");
  require_valid(candidate, "candidate model");
  const auto g = index_elements(gold);
  const auto c = index_elements(candidate);

  DiffReport report;
  std::vector<Mistake> mismatches;
  for (const auto& [key, element] : g) {
    auto it = c.find(key);
    if (it == c.end()) {
      report.mistakes.push_back(Mistake{MistakeKind::Missing, key, std::nullopt, std::nullopt, std::nullopt});
    } else {
      compare(key, element, it->second, mismatches);
    }
  }
  for (const auto& [key, element] : c) {
    if (g.count(key) == 0) {
      report.mistakes.push_back(Mistake{MistakeKind::Hallucinated, key, std::nullopt, std::nullopt, std::nullopt});
    }
  }
  // std::map iteration already yields keys in order, and properties are
  // compared in enum order, so the concatenation is sorted.
  report.mistakes.insert(report.mistakes.end(), mismatches.begin(), mismatches.end());
  report.total = static_cast<int>(report.mistakes.size());
  return report;
}

nlohmann::json diff_to_json(const DiffReport& report) {
  auto opt = [](const auto& v) -> nlohmann::json {
    if (!v) {
      return nullptr;
    }
    return *v;
  };
  nlohmann::json mistakes = nlohmann::json::array();
  for (const auto& m : report.mistakes) {
    mistakes.push_back({
        {"kind", to_string(m.kind)},
        {"key", {{"category", to_string(m.key.category)}, {"identity", m.key.identity}}},
        {"property", m.property ? nlohmann::json(to_string(*m.property)) : nlohmann::json(nullptr)},
        {"expected", opt(m.expected)},
        {"actual", opt(m.actual)},
    });
  }
  return {{"mistakes", std::move(mistakes)}, {"total", report.total}};
}

std::string render_diff_table(const DiffReport& report) {
  std::vector<std::array<std::string, 5>> rows;
  rows.push_back({"KIND", "ELEMENT", "PROPERTY", "EXPECTED", "ACTUAL"});
  for (const auto& m : report.mistakes) {
    rows.push_back({std::string(to_string(m.kind)), m.key.to_string(),
                    m.property ? std::string(to_string(*m.property)) : "-", m.expected.value_or("-"),
                    m.actual.value_or("-")});
  }
  std::array<std::size_t, 5> width{};
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      width[i] = std::max(width[i], row[i].size());
    }
  }
  std::ostringstream out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += i + 1 < row.size() ? pad(row[i], width[i] + 2) : row[i];
    }
    while (!line.empty() && line.back() == ' ') {
      line.pop_back();
    }
    out << line << '\n';
  }
  out << "total: " << report.total << '\n';
  return out.str();
}

}  // namespace img2uml
