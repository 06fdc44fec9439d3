#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "img2uml/digest.hpp"
#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"
#include "img2uml/model_json.hpp"

namespace img2uml {

namespace fs = std::filesystem;

namespace {

/// Typed access to one TOML table that rejects keys nobody asked for.
class Fields {
 public:
  Fields(const toml::table& table, std::string where) : table_(table), where_(std::move(where)) {}

  [[noreturn]] void fail(const std::string& message) const { throw ConfigurationError(where_ + ": " + message); }

  const toml::node* get(std::string_view key) {
    seen_.insert(std::string(key));
    return table_.get(key);
  }

  std::optional<std::string> text(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return std::nullopt;
    }
    if (auto s = n->value_exact<std::string>()) {
      return *s;
    }
    fail("'" + std::string(key) + "' must be a string");
  }

  /// Strings, or integers spelled as strings ("1" and 1 are the same id).
  std::optional<std::string> id(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return std::nullopt;
    }
    if (auto i = n->value_exact<int64_t>()) {
      return std::to_string(*i);
    }
    if (auto s = n->value_exact<std::string>()) {
      return *s;
    }
    fail("'" + std::string(key) + "' must be a string or an integer");
  }

  std::string required_text(std::string_view key) {
    auto v = text(key);
    if (!v || v->empty()) {
      fail("'" + std::string(key) + "' is required");
    }
    return *v;
  }

  std::optional<int64_t> integer(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return std::nullopt;
    }
    if (auto i = n->value_exact<int64_t>()) {
      return *i;
    }
    fail("'" + std::string(key) + "' must be an integer");
  }

  std::optional<double> real(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return std::nullopt;
    }
    if (auto d = n->value<double>(); d && (n->is_floating_point() || n->is_integer())) {
      return *d;
    }
    fail("'" + std::string(key) + "' must be a number");
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return std::nullopt;
    }
    if (auto b = n->value_exact<bool>()) {
      return *b;
    }
    fail("'" + std::string(key) + "' must be true or false");
  }

  const toml::table* table(std::string_view key) {
    const toml::node* n = get(key);
    if (!n) {
      return nullptr;
    }
    if (!n->is_table()) {
      fail("'" + std::string(key) + "' must be a table");
    }
    return n->as_table();
  }

  /// Array of tables, e.g. [[images]].
  std::vector<const toml::table*> tables(std::string_view key) {
    std::vector<const toml::table*> out;
    const toml::node* n = get(key);
    if (!n) {
      return out;
    }
    const toml::array* arr = n->as_array();
    if (!arr) {
      fail("'" + std::string(key) + "' must be an array of tables ([[" + std::string(key) + "]])");
    }
    for (const auto& item : *arr) {
      if (!item.is_table()) {
        fail("'" + std::string(key) + "' must be an array of tables ([[" + std::string(key) + "]])");
      }
      out.push_back(item.as_table());
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, value] : table_) {
      if (seen_.count(std::string(key.str())) == 0) {
        fail("unknown key '" + std::string(key.str()) + "'");
      }
    }
  }

 private:
  const toml::table& table_;
  std::string where_;
  std::set<std::string> seen_;
};

int to_int(Fields& f, std::string_view key, int64_t v) {
  if (v < INT32_MIN || v > INT32_MAX) {
    f.fail("'" + std::string(key) + "' is out of range");
  }
  return static_cast<int>(v);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

toml::table parse_toml(std::string_view text, const std::string& source) {
  try {
    return toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw FormatError(msg.str());
  }
}

ProviderConfig parse_provider(const toml::table& t, std::size_t index, const fs::path& base) {
  Fields f(t, "providers[" + std::to_string(index) + "]");
  ProviderConfig c;
  c.provider_id = f.required_text("id");
  const std::string kind = f.required_text("kind");
  const auto k = parse_endpoint_kind(kind);
  if (!k) {
    f.fail("unknown kind '" + kind + "' (expected openai-compatible, gemini-compatible or replay)");
  }
  c.endpoint_kind = *k;
  c.model_name = f.required_text("model");
  c.base_url = f.text("base_url");
  if (auto v = f.integer("timeout_seconds")) {
    c.timeout_seconds = to_int(f, "timeout_seconds", *v);
  }
  if (auto v = f.integer("max_parallel_requests")) {
    c.max_parallel_requests = to_int(f, "max_parallel_requests", *v);
  }
  if (auto v = f.text("replay_dir")) {
    c.replay_dir = resolve(base, *v);
  }
  if (const toml::table* s = f.table("sampling")) {
    Fields sf(*s, "providers[" + std::to_string(index) + "].sampling");
    Sampling sampling;
    sampling.temperature = sf.real("temperature");
    sampling.top_p = sf.real("top_p");
    if (auto v = sf.integer("top_k")) {
      sampling.top_k = to_int(sf, "top_k", *v);
    }
    sf.reject_unknown();
    c.sampling = sampling;
  }
  f.reject_unknown();
  validate_provider_config(c);
  return c;
}

PromptTemplate parse_prompt(const toml::table& t, std::size_t index) {
  Fields f(t, "prompts[" + std::to_string(index) + "]");
  PromptTemplate p;
  const auto id = f.id("id");
  if (!id || id->empty()) {
    f.fail("'id' is required");
  }
  const auto text = f.text("text");
  auto builtin = f.integer("builtin");
  if (!builtin && !text && (*id == "1" || *id == "2" || *id == "3")) {
    builtin = std::stoi(*id);
  }
  if (builtin && text) {
    f.fail("give either 'builtin' or 'text', not both");
  }
  if (builtin) {
    if (*builtin < 1 || *builtin > 3) {
      f.fail("'builtin' must be 1, 2 or 3");
    }
    p = builtin_prompt(static_cast<int>(*builtin));
  } else if (text && !text->empty()) {
    p.text = *text;
  } else {
    f.fail("custom prompt '" + *id + "' needs a non-empty 'text'");
  }
  p.prompt_id = *id;
  p.ignore_semantics = f.boolean("ignore_semantics").value_or(false);
  f.reject_unknown();
  return p;
}

}  // namespace

ExperimentConfig parse_experiment_config(std::string_view toml_text, const fs::path& base_dir) {
  const toml::table root = parse_toml(toml_text, "experiment config");
  Fields f(root, "experiment config");
  ExperimentConfig config;
  if (auto v = f.integer("attempts_per_cell")) {
    config.attempts_per_cell = to_int(f, "attempts_per_cell", *v);
  }
  if (auto v = f.integer("max_repairs")) {
    config.max_repairs = to_int(f, "max_repairs", *v);
  }
  config.output_dir = resolve(base_dir, f.text("output_dir").value_or("runs"));

  const auto images = f.tables("images");
  for (std::size_t i = 0; i < images.size(); ++i) {
    Fields img(*images[i], "images[" + std::to_string(i) + "]");
    ImageSpec spec;
    const auto id = img.id("id");
    if (!id || id->empty()) {
      img.fail("'id' is required");
    }
    spec.image_id = *id;
    spec.image_path = resolve(base_dir, img.required_text("path"));
    spec.gold_path = resolve(base_dir, img.required_text("gold"));
    spec.level = img.id("level").value_or("");
    img.reject_unknown();
    config.images.push_back(std::move(spec));
  }
  const auto prompts = f.tables("prompts");
  for (std::size_t i = 0; i < prompts.size(); ++i) {
    config.prompts.push_back(parse_prompt(*prompts[i], i));
  }
  const auto providers = f.tables("providers");
  for (std::size_t i = 0; i < providers.size(); ++i) {
    config.providers.push_back(parse_provider(*providers[i], i, base_dir));
  }
  f.reject_unknown();

  if (config.attempts_per_cell < 1) {
    throw ConfigurationError("attempts_per_cell must be at least 1");
  }
  if (config.max_repairs < 0) {
    throw ConfigurationError("max_repairs must not be negative");
  }
  auto unique = [](const auto& items, auto key, const char* what) {
    std::set<std::string> ids;
    for (const auto& item : items) {
      if (!ids.insert(key(item)).second) {
        throw ConfigurationError(std::string("duplicate ") + what + " id '" + key(item) + "'");
      }
    }
  };
  unique(config.images, [](const ImageSpec& s) { return s.image_id; }, "image");
  unique(config.prompts, [](const PromptTemplate& p) { return p.prompt_id; }, "prompt");
  unique(config.providers, [](const ProviderConfig& p) { return p.provider_id; }, "provider");
  return config;
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw ConfigurationError("cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

}  // namespace

ExperimentConfig load_experiment_config(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  ExperimentConfig config;
  try {
    config = parse_experiment_config(read_text(path), base);
  } catch (const FormatError& e) {
    throw FormatError(path.string() + ": " + e.what());
  } catch (const ConfigurationError& e) {
    throw ConfigurationError(path.string() + ": " + e.what());
  }
  validate_experiment_config(config);
  return config;
}

std::vector<ProviderConfig> load_providers(const fs::path& path) {
  const fs::path base = path.has_parent_path() ? path.parent_path() : fs::path(".");
  const toml::table root = parse_toml(read_text(path), path.string());
  Fields f(root, path.string());
  std::vector<ProviderConfig> out;
  std::set<std::string> ids;
  const auto tables = f.tables("providers");
  for (std::size_t i = 0; i < tables.size(); ++i) {
    out.push_back(parse_provider(*tables[i], i, base));
    if (!ids.insert(out.back().provider_id).second) {
      throw ConfigurationError(path.string() + ": duplicate provider id '" + out.back().provider_id + "'");
    }
  }
  return out;
}

void validate_experiment_config(const ExperimentConfig& config) {
  if (config.images.empty() || config.prompts.empty() || config.providers.empty()) {
    throw ConfigurationError("experiment needs at least one image, one prompt and one provider");
  }
  for (const auto& p : config.providers) {
    validate_provider_config(p);
  }
  for (const auto& img : config.images) {
    Image::load(img.image_path);
    try {
      require_valid(load_model_file(img.gold_path), "gold model " + img.gold_path.string());
    } catch (const Error& e) {
      throw ConfigurationError("image '" + img.image_id + "': " + e.what());
    }
  }
}

namespace {

// File contents rather than paths, so moving a checkout keeps the digest.
std::string content_digest(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    return "missing:" + path.generic_string();
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return sha256_hex(buf.str());
}

}  // namespace

std::string config_digest(const ExperimentConfig& config) {
  nlohmann::json j;
  j["attempts_per_cell"] = config.attempts_per_cell;
  j["max_repairs"] = config.max_repairs;
  for (const auto& img : config.images) {
    j["images"].push_back({img.image_id, content_digest(img.image_path), content_digest(img.gold_path), img.level});
  }
  for (const auto& p : config.prompts) {
    j["prompts"].push_back({p.prompt_id, p.text, p.ignore_semantics});
  }
  for (const auto& p : config.providers) {
    nlohmann::json sampling = nullptr;
    if (p.sampling) {
      sampling = {p.sampling->temperature.value_or(-1), p.sampling->top_p.value_or(-1), p.sampling->top_k.value_or(-1)};
    }
    j["providers"].push_back({p.provider_id, to_string(p.endpoint_kind), p.model_name, p.base_url.value_or(""), sampling});
  }
  return sha256_hex(j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace));
}

}  // namespace img2uml
