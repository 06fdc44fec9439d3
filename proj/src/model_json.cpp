#include "img2uml/model_json.hpp"

#include <fstream>
#include <sstream>

#include "img2uml/errors.hpp"

namespace img2uml {

namespace {

using nlohmann::json;

json opt(const std::optional<std::string>& s) { return s ? json(*s) : json(nullptr); }

const json& field(const json& obj, const char* name, const char* where) {
  static const json kNull;
  if (!obj.is_object()) {
    throw FormatError(std::string(where) + ": expected an object");
  }
  auto it = obj.find(name);
  return it == obj.end() ? kNull : *it;
}

std::string req_string(const json& obj, const char* name, const char* where) {
  const json& v = field(obj, name, where);
  if (!v.is_string()) {
    throw FormatError(std::string(where) + ": field '" + name + "' must be a string");
  }
  return v.get<std::string>();
}

std::optional<std::string> opt_string(const json& obj, const char* name, const char* where) {
  const json& v = field(obj, name, where);
  if (v.is_null()) {
    return std::nullopt;
  }
  if (!v.is_string()) {
    throw FormatError(std::string(where) + ": field '" + name + "' must be a string or null");
  }
  return v.get<std::string>();
}

const json& opt_array(const json& obj, const char* name, const char* where) {
  static const json kEmpty = json::array();
  const json& v = field(obj, name, where);
  if (v.is_null()) {
    return kEmpty;
  }
  if (!v.is_array()) {
    throw FormatError(std::string(where) + ": field '" + name + "' must be an array");
  }
  return v;
}

template <typename Enum, typename Parse>
Enum req_enum(const json& obj, const char* name, const char* where, Parse parse, std::optional<Enum> fallback) {
  const json& v = field(obj, name, where);
  if (v.is_null() && fallback) {
    return *fallback;
  }
  if (!v.is_string()) {
    throw FormatError(std::string(where) + ": field '" + name + "' must be a string");
  }
  auto parsed = parse(v.template get<std::string>());
  if (!parsed) {
    throw FormatError(std::string(where) + ": unknown " + name + " '" + v.template get<std::string>() + "'");
  }
  return *parsed;
}

}  // namespace

nlohmann::json model_to_json(const UmlModel& model) {
  json classifiers = json::array();
  for (const auto& c : model.classifiers) {
    json attributes = json::array();
    for (const auto& a : c.attributes) {
      attributes.push_back({{"name", a.name}, {"type_text", opt(a.type_text)}, {"visibility", to_string(a.visibility)}});
    }
    json methods = json::array();
    for (const auto& m : c.methods) {
      json params = json::array();
      for (const auto& p : m.parameters) {
        params.push_back({{"name", opt(p.name)}, {"type_text", p.type_text}});
      }
      methods.push_back({{"name", m.name},
                         {"parameters", std::move(params)},
                         {"return_type_text", opt(m.return_type_text)},
                         {"visibility", to_string(m.visibility)}});
    }
    classifiers.push_back({{"name", c.name},
                           {"kind", to_string(c.kind)},
                           {"attributes", std::move(attributes)},
                           {"methods", std::move(methods)},
                           {"literals", c.literals}});
  }
  json relationships = json::array();
  for (const auto& r : model.relationships) {
    relationships.push_back({{"kind", to_string(r.kind)},
                             {"source", r.source},
                             {"target", r.target},
                             {"navigability", to_string(r.navigability)},
                             {"source_multiplicity", opt(r.source_multiplicity)},
                             {"target_multiplicity", opt(r.target_multiplicity)},
                             {"label", opt(r.label)}});
  }
  return {{"classifiers", std::move(classifiers)}, {"relationships", std::move(relationships)}};
}

UmlModel model_from_json(const nlohmann::json& j) {
  UmlModel model;
  for (const auto& jc : opt_array(j, "classifiers", "model")) {
    Classifier c;
    c.name = req_string(jc, "name", "classifier");
    c.kind = req_enum<ClassifierKind>(jc, "kind", "classifier", parse_classifier_kind, ClassifierKind::Class);
    for (const auto& ja : opt_array(jc, "attributes", "classifier")) {
      Attribute a;
      a.name = req_string(ja, "name", "attribute");
      a.type_text = opt_string(ja, "type_text", "attribute");
      a.visibility = req_enum<Visibility>(ja, "visibility", "attribute", parse_visibility, Visibility::Unspecified);
      c.attributes.push_back(std::move(a));
    }
    for (const auto& jm : opt_array(jc, "methods", "classifier")) {
      Method m;
      m.name = req_string(jm, "name", "method");
      for (const auto& jp : opt_array(jm, "parameters", "method")) {
        Parameter p;
        p.name = opt_string(jp, "name", "parameter");
        p.type_text = opt_string(jp, "type_text", "parameter").value_or("");
        m.parameters.push_back(std::move(p));
      }
      m.return_type_text = opt_string(jm, "return_type_text", "method");
      m.visibility = req_enum<Visibility>(jm, "visibility", "method", parse_visibility, Visibility::Unspecified);
      c.methods.push_back(std::move(m));
    }
    for (const auto& jl : opt_array(jc, "literals", "classifier")) {
      if (!jl.is_string()) {
        throw FormatError("classifier: literals must be strings");
      }
      c.literals.push_back(jl.get<std::string>());
    }
    model.classifiers.push_back(std::move(c));
  }
  for (const auto& jr : opt_array(j, "relationships", "model")) {
    Relationship r;
    r.kind = req_enum<RelationshipKind>(jr, "kind", "relationship", parse_relationship_kind, std::nullopt);
    r.source = req_string(jr, "source", "relationship");
    r.target = req_string(jr, "target", "relationship");
    r.navigability =
        req_enum<Navigability>(jr, "navigability", "relationship", parse_navigability, Navigability::None);
    r.source_multiplicity = opt_string(jr, "source_multiplicity", "relationship");
    r.target_multiplicity = opt_string(jr, "target_multiplicity", "relationship");
    r.label = opt_string(jr, "label", "relationship");
    model.relationships.push_back(std::move(r));
  }
  return model;
}

std::string serialize_model(const UmlModel& model) {
  return model_to_json(model).dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

UmlModel deserialize_model(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(std::string("model JSON: ") + e.what());
  }
  return model_from_json(j);
}

UmlModel load_model_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("cannot read model file " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return deserialize_model(buf.str());
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace img2uml
