#include <algorithm>
#include <cctype>
#include <sstream>

#include "img2uml/plantuml.hpp"

namespace img2uml {

namespace {

bool plain_identifier(std::string_view s) {
  if (s.empty()) {
    return false;
  }
  auto start = [](char c) {
    const auto u = static_cast<unsigned char>(c);
    return std::isalpha(u) || c == '_' || u >= 0x80;
  };
  return start(s.front()) && std::all_of(s.begin(), s.end(), [&](char c) {
           return start(c) || std::isdigit(static_cast<unsigned char>(c));
         });
}

std::string name_token(const std::string& name) {
  return plain_identifier(name) ? name : "\"" + name + "\"";
}

std::string_view visibility_symbol(Visibility v) {
  switch (v) {
    case Visibility::Public: return "+";
    case Visibility::Private: return "-";
    case Visibility::Protected: return "#";
    case Visibility::Package: return "~";
    case Visibility::Unspecified: return "";
  }
  return "";
}

std::string_view keyword(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::Class: return "class";
    case ClassifierKind::AbstractClass: return "abstract class";
    case ClassifierKind::Interface: return "interface";
    case ClassifierKind::Enumeration: return "enum";
  }
  return "class";
}

void emit_classifier(std::ostream& out, const Classifier& c) {
  out << keyword(c.kind) << ' ' << name_token(c.name) << " {\n";
  for (const auto& lit : c.literals) {
    out << "  " << lit << '\n';
  }
  for (const auto& a : c.attributes) {
    out << "  " << visibility_symbol(a.visibility) << a.name;
    if (a.type_text) {
      out << " : " << *a.type_text;
    }
    out << '\n';
  }
  for (const auto& m : c.methods) {
    out << "  " << visibility_symbol(m.visibility) << m.name << '(';
    for (std::size_t i = 0; i < m.parameters.size(); ++i) {
      const auto& p = m.parameters[i];
      if (i > 0) {
        out << ", ";
      }
      if (p.name) {
        out << *p.name << " : ";
      }
      out << p.type_text;
    }
    out << ')';
    if (m.return_type_text) {
      out << " : " << *m.return_type_text;
    }
    out << '\n';
  }
  out << "}\n";
}

std::string_view arrow(RelationshipKind k) {
  switch (k) {
    case RelationshipKind::Generalization: return "<|--";
    case RelationshipKind::Realization: return "<|..";
    case RelationshipKind::Association: return "--";
    case RelationshipKind::Aggregation: return "o--";
    case RelationshipKind::Composition: return "*--";
    case RelationshipKind::Dependency: return "..>";
  }
  return "--";
}

void emit_relationship(std::ostream& out, const Relationship& r) {
  const bool inherits = r.kind == RelationshipKind::Generalization || r.kind == RelationshipKind::Realization;
  // Inheritance is written parent-first; everything else source-first.
  const std::string& left = inherits ? r.target : r.source;
  const std::string& right = inherits ? r.source : r.target;

  out << name_token(left);
  if (r.source_multiplicity) {
    out << " \"" << *r.source_multiplicity << '"';
  }
  out << ' ' << arrow(r.kind) << ' ';
  if (r.target_multiplicity) {
    out << '"' << *r.target_multiplicity << "\" ";
  }
  out << name_token(right);

  if (r.label || r.navigability != Navigability::None) {
    out << " :";
    if (r.label) {
      out << ' ' << *r.label;
    }
    if (r.navigability == Navigability::SourceToTarget) {
      out << " >";
    } else if (r.navigability == Navigability::TargetToSource) {
      out << " <";
    }
  }
  out << '\n';
}

}  // namespace

std::string emit_plantuml(const UmlModel& model) {
  require_valid(model, "model to emit");
  std::ostringstream out;
  out << "@startuml\n";
  for (const auto& c : model.classifiers) {
    emit_classifier(out, c);
  }
  for (const auto& r : model.relationships) {
    emit_relationship(out, r);
  }
  out << "@enduml\n";
  return out.str();
}

std::optional<std::string> extract_plantuml_block(std::string_view raw_llm_text) {
  constexpr std::string_view kStart = "@startuml";
  constexpr std::string_view kEnd = "@enduml";
  const auto start = raw_llm_text.find(kStart);
  if (start == std::string_view::npos) {
    return std::nullopt;
  }
  const auto end = raw_llm_text.find(kEnd, start + kStart.size());
  if (end == std::string_view::npos) {
    return std::nullopt;
  }
  return std::string(raw_llm_text.substr(start, end + kEnd.size() - start));
}

}  // namespace img2uml
