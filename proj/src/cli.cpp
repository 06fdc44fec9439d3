#include "img2uml/cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"
#include "img2uml/model_diff.hpp"
#include "img2uml/model_json.hpp"
#include "img2uml/pipeline.hpp"
#include "img2uml/plantuml.hpp"

namespace img2uml::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    throw UsageError("cannot read " + path.string());
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path());
  }
  std::ofstream f(path, std::ios::binary);
  f << text;
  if (!f) {
    throw UsageError("cannot write " + path.string());
  }
}

json diagnostics_json(const std::vector<Diagnostic>& diags) {
  json out = json::array();
  for (const auto& d : diags) {
    out.push_back({{"line", d.line}, {"column", d.column}, {"message", d.message}, {"near", d.offending_text}});
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2, ' ', false, json::error_handler_t::replace) + "\n"; }

/// `.json` files hold a serialized model; anything else is PlantUML.
UmlModel load_model_argument(const fs::path& path) {
  const std::string text = read_file(path);
  if (path.extension() == ".json") {
    return deserialize_model(text);
  }
  const ParseOutcome parsed = parse_plantuml(text);
  if (!parsed) {
    std::string msg = path.string() + " does not parse:";
    for (const auto& d : parsed.diagnostics()) {
      msg += "\n  " + format_diagnostic(d);
    }
    throw FormatError(msg);
  }
  return parsed.model();
}

PromptTemplate resolve_prompt(const std::string& arg, bool ignore_semantics) {
  PromptTemplate prompt;
  if (arg == "1" || arg == "2" || arg == "3") {
    prompt = builtin_prompt(std::stoi(arg));
  } else {
    prompt.prompt_id = fs::path(arg).stem().string();
    prompt.text = read_file(arg);
    while (!prompt.text.empty() && (prompt.text.back() == '\n' || prompt.text.back() == '\r')) {
      prompt.text.pop_back();
    }
    if (prompt.text.empty()) {
      throw UsageError("prompt file " + arg + " is empty");
    }
  }
  prompt.ignore_semantics = prompt.ignore_semantics || ignore_semantics;
  return prompt;
}

struct Globals {
  std::string replay_dir;
  std::string providers_file;
  bool json = false;
};

class Context {
 public:
  Context(const Globals& g, EnvLookup env, std::shared_ptr<Transport> transport)
      : globals_(g), env_(std::move(env)), transport_(std::move(transport)) {
    if (!globals_.replay_dir.empty()) {
      env_ = [inner = env_, dir = globals_.replay_dir](const std::string& name) -> std::optional<std::string> {
        if (name == "IMG2UML_REPLAY_DIR") {
          return dir;
        }
        return inner(name);
      };
    }
  }

  const EnvLookup& env() const { return env_; }
  bool json() const { return globals_.json; }

  Gateway gateway() const { return Gateway(transport_ ? transport_ : make_http_transport(), env_); }

  ProviderConfig provider(const std::string& id) const {
    fs::path file = globals_.providers_file;
    if (file.empty()) {
      file = env_("IMG2UML_PROVIDERS").value_or("providers.toml");
    }
    if (!fs::exists(file)) {
      throw UsageError("providers file " + file.string() + " not found (use --providers)");
    }
    for (auto& p : load_providers(file)) {
      if (p.provider_id == id) {
        return p;
      }
    }
    throw UsageError("unknown provider '" + id + "' in " + file.string());
  }

 private:
  Globals globals_;
  EnvLookup env_;
  std::shared_ptr<Transport> transport_;
};

struct ConvertArgs {
  std::string image;
  std::string provider;
  std::string prompt = "1";
  bool ignore_semantics = false;
  int repairs = 0;
  int attempt = 1;
  std::string out;
  std::string model_out;
};

int cmd_convert(const Context& ctx, const ConvertArgs& a, std::ostream& out, std::ostream& err) {
  const ProviderConfig provider = ctx.provider(a.provider);
  const PromptTemplate prompt = resolve_prompt(a.prompt, a.ignore_semantics);
  const auto image = std::make_shared<const Image>(Image::load(a.image));
  Gateway gateway = ctx.gateway();
  const AttemptOutcome outcome = convert(gateway, image, prompt, provider, ConvertOptions{a.repairs, a.attempt});

  json j = {{"outcome", to_string(outcome.outcome_class())}, {"repairs_used", outcome.repairs_used}};
  int status = kDomainFailure;
  if (const auto* s = outcome.success()) {
    const std::string canonical = emit_plantuml(s->model);
    if (!a.out.empty()) {
      write_file(a.out, canonical);
    }
    if (!a.model_out.empty()) {
      write_file(a.model_out, serialize_model(s->model));
    }
    j["plantuml"] = canonical;
    j["model"] = model_to_json(s->model);
    if (!ctx.json() && a.out.empty()) {
      out << canonical;
    }
    status = kSuccess;
  } else if (const auto* e = outcome.syntax_error()) {
    j["diagnostics"] = diagnostics_json(e->diagnostics);
    j["raw_text"] = e->raw_text;
    if (!ctx.json()) {
      err << "PlantUML code does not compile:\n";
      for (const auto& d : e->diagnostics) {
        err << "  " << format_diagnostic(d) << '\n';
      }
    }
  } else {
    const auto* r = outcome.refusal();
    j["raw_text"] = r->raw_text;
    if (!ctx.json()) {
      err << "no PlantUML code found in the response:\n" << r->raw_text << '\n';
    }
  }
  if (ctx.json()) {
    out << dump(j);
  }
  return status;
}

int cmd_parse(const Context& ctx, const std::string& file, std::ostream& out, std::ostream& err) {
  const ParseOutcome parsed = parse_plantuml(read_file(file));
  if (ctx.json()) {
    out << (parsed ? dump(model_to_json(parsed.model())) : dump({{"diagnostics", diagnostics_json(parsed.diagnostics())}}));
  } else if (parsed) {
    out << emit_plantuml(parsed.model());
  } else {
    for (const auto& d : parsed.diagnostics()) {
      err << file << ": " << format_diagnostic(d) << '\n';
    }
  }
  return parsed ? kSuccess : kDomainFailure;
}

int cmd_emit(const Context& ctx, const std::string& file, std::ostream& out) {
  const std::string text = emit_plantuml(deserialize_model(read_file(file)));
  out << (ctx.json() ? dump({{"plantuml", text}}) : text);
  return kSuccess;
}

int cmd_diff(const Context& ctx, const std::string& gold, const std::string& candidate, bool strict,
             std::ostream& out) {
  const DiffReport report = diff_models(load_model_argument(gold), load_model_argument(candidate));
  out << (ctx.json() ? dump(diff_to_json(report)) : render_diff_table(report));
  return strict && report.total > 0 ? kDomainFailure : kSuccess;
}

int cmd_experiment_run(const Context& ctx, const std::string& config_path, std::optional<int> repairs,
                       std::ostream& out) {
  ExperimentConfig config = load_experiment_config(config_path);
  if (repairs) {
    if (*repairs < 0) {
      throw UsageError("--repairs must not be negative");
    }
    config.max_repairs = *repairs;
  }
  Gateway gateway = ctx.gateway();
  const auto records = run_experiment(config, gateway);
  std::map<std::string, int> counts;
  for (auto o : {RecordOutcome::Ok, RecordOutcome::SyntaxError, RecordOutcome::Refusal,
                 RecordOutcome::FailedInfrastructure}) {
    counts[std::string(to_string(o))] = 0;
  }
  for (const auto& r : records) {
    ++counts[std::string(to_string(r.outcome))];
  }
  const std::string log = run_log_path(config).string();
  if (ctx.json()) {
    out << dump({{"records", records.size()}, {"outcomes", counts}, {"requests", gateway.calls()}, {"run_log", log}});
  } else {
    out << "records: " << records.size() << '\n';
    for (const auto& [name, n] : counts) {
      out << name << ": " << n << '\n';
    }
    out << "requests: " << gateway.calls() << '\n' << "run log: " << log << '\n';
  }
  return counts["failed-infrastructure"] > 0 ? kInfrastructure : kSuccess;
}

int cmd_experiment_report(const std::string& log, const std::string& format, const std::string& out_path,
                          std::ostream& out) {
  const ReportFormat f = parse_report_format(format);
  if (!fs::exists(log)) {
    throw UsageError("run log " + log + " not found");
  }
  const std::string text = render_report(read_run_log(log), f);
  if (out_path.empty()) {
    out << text;
  } else {
    write_file(out_path, text);
  }
  return kSuccess;
}

struct FixtureArgs {
  std::string provider;
  std::string image;
  std::string prompt = "1";
  bool ignore_semantics = false;
  int attempt = 1;
  std::string response;
};

int cmd_fixture_put(const Context& ctx, const FixtureArgs& a, std::ostream& out) {
  const ProviderConfig provider = ctx.provider(a.provider);
  const auto image = std::make_shared<const Image>(Image::load(a.image));
  const Conversation conv = build_initial_conversation(image, resolve_prompt(a.prompt, a.ignore_semantics));
  const fs::path root = replay_root(provider, ctx.env());
  const std::string digest = write_replay_fixture(root, provider, conv, a.attempt, read_file(a.response));
  out << (ctx.json() ? dump({{"digest", digest}, {"path", (root / (digest + ".txt")).string()}})
                     : (root / (digest + ".txt")).string() + "\n");
  return kSuccess;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err, EnvLookup env,
        std::shared_ptr<Transport> transport) {
  CLI::App app{"Hand-drawn UML class diagrams to PlantUML via vision LLMs", "img2uml"};
  app.require_subcommand(1);
  Globals globals;
  app.add_option("--replay-dir", globals.replay_dir, "Replay fixture directory (overrides IMG2UML_REPLAY_DIR)");
  app.add_option("--providers", globals.providers_file,
                 "Providers file (default: $IMG2UML_PROVIDERS or providers.toml)");
  app.add_flag("--json", globals.json, "Machine-readable output");

  ConvertArgs conv;
  auto* convert_cmd = app.add_subcommand("convert", "Convert a diagram image to PlantUML");
  convert_cmd->add_option("image", conv.image, "PNG or JPEG image")->required();
  convert_cmd->add_option("--provider", conv.provider, "Provider id from the providers file")->required();
  convert_cmd->add_option("--prompt", conv.prompt, "1, 2, 3 or a file with prompt text");
  convert_cmd->add_flag("--ignore-semantics", conv.ignore_semantics, "Append the ignore-semantics sentence");
  convert_cmd->add_option("--repairs", conv.repairs, "Repair rounds after a syntax error")
      ->check(CLI::NonNegativeNumber);
  convert_cmd->add_option("--attempt", conv.attempt, "Attempt number, selects the replay fixture")
      ->check(CLI::PositiveNumber);
  convert_cmd->add_option("--out", conv.out, "Write canonical PlantUML here instead of stdout");
  convert_cmd->add_option("--model-out", conv.model_out, "Also write the model as JSON");

  std::string parse_file;
  auto* parse_cmd = app.add_subcommand("parse", "Parse PlantUML and print the normalized diagram");
  parse_cmd->add_option("file", parse_file)->required();

  std::string emit_file;
  auto* emit_cmd = app.add_subcommand("emit", "Print canonical PlantUML for a model JSON file");
  emit_cmd->add_option("model", emit_file)->required();

  std::string gold;
  std::string candidate;
  bool strict = false;
  auto* diff_cmd = app.add_subcommand("diff", "Count mistakes of a candidate against a gold model");
  diff_cmd->add_option("gold", gold, "Model JSON or PlantUML")->required();
  diff_cmd->add_option("candidate", candidate, "Model JSON or PlantUML")->required();
  diff_cmd->add_flag("--strict", strict, "Exit 1 when there are mistakes");

  auto* experiment_cmd = app.add_subcommand("experiment", "Run or report an experiment grid");
  experiment_cmd->require_subcommand(1);
  std::string config_path;
  std::optional<int> run_repairs;
  auto* run_cmd = experiment_cmd->add_subcommand("run", "Run missing attempts of the grid");
  run_cmd->add_option("config", config_path, "Experiment TOML file")->required();
  run_cmd->add_option("--repairs", run_repairs, "Override max_repairs");
  std::string log_path;
  std::string format = "markdown";
  std::string report_out;
  auto* report_cmd = experiment_cmd->add_subcommand("report", "Render tables from a run log");
  report_cmd->add_option("runlog", log_path)->required();
  report_cmd->add_option("--format", format, "markdown or csv");
  report_cmd->add_option("--out", report_out, "Write the report here instead of stdout");

  auto* fixture_cmd = app.add_subcommand("fixture", "Manage replay fixtures");
  fixture_cmd->require_subcommand(1);
  FixtureArgs fix;
  auto* put_cmd = fixture_cmd->add_subcommand("put", "Store a response for a first-turn conversation");
  put_cmd->add_option("--provider", fix.provider)->required();
  put_cmd->add_option("--image", fix.image)->required();
  put_cmd->add_option("--prompt", fix.prompt, "1, 2, 3 or a file with prompt text");
  put_cmd->add_flag("--ignore-semantics", fix.ignore_semantics);
  put_cmd->add_option("--attempt", fix.attempt)->check(CLI::PositiveNumber);
  put_cmd->add_option("response", fix.response, "File with the response text")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsageError;
  }

  try {
    const Context ctx(globals, std::move(env), std::move(transport));
    if (*convert_cmd) return cmd_convert(ctx, conv, out, err);
    if (*parse_cmd) return cmd_parse(ctx, parse_file, out, err);
    if (*emit_cmd) return cmd_emit(ctx, emit_file, out);
    if (*diff_cmd) return cmd_diff(ctx, gold, candidate, strict, out);
    if (*run_cmd) return cmd_experiment_run(ctx, config_path, run_repairs, out);
    if (*report_cmd) return cmd_experiment_report(log_path, format, report_out, out);
    if (*put_cmd) return cmd_fixture_put(ctx, fix, out);
  } catch (const TransportError& e) {
    err << "error: " << e.what() << '\n';
    return kInfrastructure;
  } catch (const FixtureMissingError& e) {
    err << "error: " << e.what() << '\n';
    return kInfrastructure;
  } catch (const Error& e) {
    // Usage, configuration, format, invalid-model and name errors.
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kInfrastructure;
  }
  return kUsageError;
}

}  // namespace img2uml::cli
