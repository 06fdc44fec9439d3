#include "random_models.hpp"

#include <algorithm>
#include <set>
#include <string>
#include <vector>

namespace img2uml::testing {

namespace {

const std::vector<std::string> kClassNames = {
    "Animal", "Fish",   "Duck",   "Zoo",     "Keeper", "Human", "Spaceship", "Dog",  "Cat",   "Owner",
    "Pet Owner", "Order", "Item", "Customer", "Address", "Shape", "Circle", "Color", "Engine", "Wheel_2"};

const std::vector<std::string> kMemberNames = {"name", "age",    "id",   "size",   "weight", "color",
                                               "swim", "quack",  "fly",  "eat",    "total",  "speed",
                                               "owner_id", "items", "run", "stop"};

const std::vector<std::string> kTypes = {"int",  "str",          "String", "bool", "float",
                                         "void", "List<String>", "int[]",  "Map<K, V>", "Date"};

const std::vector<std::string> kMultiplicities = {"1", "*", "0..1", "0..*", "1..*", "1..5", "2"};

const std::vector<std::string> kLabels = {"uses", "owns", "has", "lives in", "drives"};

template <typename T>
const T& pick(std::mt19937& rng, const std::vector<T>& v) {
  return v[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(v.size()) - 1))];
}

bool coin(std::mt19937& rng, int percent = 50) { return uniform(rng, 1, 100) <= percent; }

Visibility random_visibility(std::mt19937& rng) { return static_cast<Visibility>(uniform(rng, 0, 4)); }

std::optional<std::string> maybe(std::mt19937& rng, const std::vector<std::string>& pool, int percent = 60) {
  if (coin(rng, percent)) {
    return pick(rng, pool);
  }
  return std::nullopt;
}

}  // namespace

int uniform(std::mt19937& rng, int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); }

UmlModel random_model(std::mt19937& rng, int max_classifiers) {
  UmlModel m;
  std::vector<std::string> names = kClassNames;
  std::shuffle(names.begin(), names.end(), rng);
  const int n = uniform(rng, 1, std::min<int>(max_classifiers, static_cast<int>(names.size())));

  for (int i = 0; i < n; ++i) {
    Classifier c;
    c.name = names[static_cast<std::size_t>(i)];
    c.kind = static_cast<ClassifierKind>(uniform(rng, 0, 3));
    if (c.kind == ClassifierKind::Enumeration) {
      const int literals = uniform(rng, 0, 3);
      for (int k = 0; k < literals; ++k) {
        c.literals.push_back("LIT_" + std::to_string(k));
      }
    } else {
      std::vector<std::string> members = kMemberNames;
      std::shuffle(members.begin(), members.end(), rng);
      const int attrs = uniform(rng, 0, 3);
      const int methods = uniform(rng, 0, 3);
      std::size_t next = 0;
      for (int k = 0; k < attrs; ++k) {
        c.attributes.push_back(Attribute{members[next++], maybe(rng, kTypes), random_visibility(rng)});
      }
      for (int k = 0; k < methods; ++k) {
        Method method;
        method.name = members[next++];
        method.visibility = random_visibility(rng);
        method.return_type_text = maybe(rng, kTypes);
        const int params = uniform(rng, 0, 3);
        for (int p = 0; p < params; ++p) {
          Parameter param;
          if (coin(rng, 70)) {
            param.name = "p" + std::to_string(p);
          }
          param.type_text = pick(rng, kTypes);
          method.parameters.push_back(std::move(param));
        }
        c.methods.push_back(std::move(method));
      }
    }
    m.classifiers.push_back(std::move(c));
  }

  std::set<std::pair<std::string, std::string>> used;
  const int rels = uniform(rng, 0, 2 * n);
  for (int k = 0; k < rels; ++k) {
    Relationship r;
    r.kind = static_cast<RelationshipKind>(uniform(rng, 0, 5));
    r.source = m.classifiers[static_cast<std::size_t>(uniform(rng, 0, n - 1))].name;
    r.target = m.classifiers[static_cast<std::size_t>(uniform(rng, 0, n - 1))].name;
    // One relationship per unordered endpoint pair keeps ordered and
    // unordered keys from overlapping.
    std::string a = fold_text(r.source);
    std::string b = fold_text(r.target);
    if (b < a) {
      std::swap(a, b);
    }
    if (!used.insert({a, b}).second) {
      continue;
    }
    const bool inherits = r.kind == RelationshipKind::Generalization || r.kind == RelationshipKind::Realization;
    if (!inherits) {
      r.navigability = static_cast<Navigability>(uniform(rng, 0, 2));
      r.source_multiplicity = maybe(rng, kMultiplicities, 50);
      r.target_multiplicity = maybe(rng, kMultiplicities, 50);
    }
    r.label = maybe(rng, kLabels, 40);
    m.relationships.push_back(std::move(r));
  }
  return m;
}

}  // namespace img2uml::testing

namespace img2uml::testing {

int remove_classifier(UmlModel& m, std::size_t index) {
  const Classifier c = m.classifiers[index];
  int removed = 1 + static_cast<int>(c.attributes.size() + c.methods.size());
  m.classifiers.erase(m.classifiers.begin() + static_cast<std::ptrdiff_t>(index));
  const std::string key = fold_text(c.name);
  const auto before = m.relationships.size();
  std::erase_if(m.relationships,
                [&](const Relationship& r) { return fold_text(r.source) == key || fold_text(r.target) == key; });
  removed += static_cast<int>(before - m.relationships.size());
  return removed;
}

Mutation mutate(const UmlModel& gold, std::mt19937& rng) {
  Mutation out;
  UmlModel& m = out.candidate;
  m = gold;

  const int deletions = uniform(rng, 0, 4);
  for (int k = 0; k < deletions; ++k) {
    switch (uniform(rng, 0, 3)) {
      case 0:
        if (!m.classifiers.empty()) {
          out.deleted_keys += remove_classifier(m, static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(m.classifiers.size()) - 1)));
        }
        break;
      case 1:
      case 2: {
        if (m.classifiers.empty()) {
          break;
        }
        auto& c = m.classifiers[static_cast<std::size_t>(uniform(rng, 0, static_cast<int>(m.classifiers.size()) - 1))];
        if (!c.attributes.empty()) {
          c.attributes.erase(c.attributes.begin() + uniform(rng, 0, static_cast<int>(c.attributes.size()) - 1));
          ++out.deleted_keys;
        } else if (!c.methods.empty()) {
          c.methods.erase(c.methods.begin() + uniform(rng, 0, static_cast<int>(c.methods.size()) - 1));
          ++out.deleted_keys;
        }
        break;
      }
      default:
        if (!m.relationships.empty()) {
          m.relationships.erase(m.relationships.begin() +
                                uniform(rng, 0, static_cast<int>(m.relationships.size()) - 1));
          ++out.deleted_keys;
        }
        break;
    }
  }

  const int insertions = uniform(rng, 0, 3);
  for (int k = 0; k < insertions; ++k) {
    m.classifiers.push_back(Classifier{"Fresh" + std::to_string(k)});
    ++out.inserted_classes;
  }

  // Each surviving element gets at most one property change so changes never
  // cancel out.
  for (auto& c : m.classifiers) {
    if (c.name.starts_with("Fresh")) {
      continue;
    }
    if (c.kind != ClassifierKind::Enumeration && uniform(rng, 1, 100) <= 15) {
      c.kind = c.kind == ClassifierKind::Class ? ClassifierKind::Interface : ClassifierKind::Class;
      ++out.flipped_properties;
    }
    for (auto& a : c.attributes) {
      const int roll = uniform(rng, 1, 100);
      if (roll <= 10) {
        a.visibility = a.visibility == Visibility::Public ? Visibility::Private : Visibility::Public;
        ++out.flipped_properties;
      } else if (roll <= 20) {
        a.type_text = a.type_text ? std::optional<std::string>() : std::optional<std::string>("Flipped");
        ++out.flipped_properties;
      }
    }
    for (auto& me : c.methods) {
      const int roll = uniform(rng, 1, 100);
      if (roll <= 10) {
        me.return_type_text = me.return_type_text ? *me.return_type_text + "X" : "Flipped";
        ++out.flipped_properties;
      } else if (roll <= 20 && !me.parameters.empty()) {
        me.parameters.back().type_text += "X";
        ++out.flipped_properties;
      }
    }
  }
  for (auto& r : m.relationships) {
    const int roll = uniform(rng, 1, 100);
    const bool inherits = r.kind == RelationshipKind::Generalization || r.kind == RelationshipKind::Realization;
    if (roll <= 10) {
      r.label = r.label ? *r.label + " too" : "flipped";
      ++out.flipped_properties;
    } else if (roll <= 20) {
      if (inherits) {
        r.kind = r.kind == RelationshipKind::Generalization ? RelationshipKind::Realization
                                                            : RelationshipKind::Generalization;
        ++out.flipped_properties;
      } else if (r.kind != RelationshipKind::Dependency) {
        r.kind = r.kind == RelationshipKind::Association ? RelationshipKind::Composition
                                                         : RelationshipKind::Association;
        ++out.flipped_properties;
      }
    } else if (roll <= 30 && !inherits) {
      r.target_multiplicity = r.target_multiplicity ? std::optional<std::string>() : std::optional<std::string>("7");
      ++out.flipped_properties;
    } else if (roll <= 35 && !inherits) {
      r.navigability = r.navigability == Navigability::None ? Navigability::SourceToTarget : Navigability::None;
      ++out.flipped_properties;
    }
  }
  return out;
}

}  // namespace img2uml::testing
