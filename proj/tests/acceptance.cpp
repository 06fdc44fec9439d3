// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// nonzero when any criterion fails.

#include <chrono>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include "diff_oracle.hpp"
#include "img2uml/cli.hpp"
#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"
#include "img2uml/model_diff.hpp"
#include "img2uml/plantuml.hpp"
#include "random_models.hpp"
#include "replay_experiment.hpp"
#include "study_grid.hpp"
#include "temp_dir.hpp"

using namespace img2uml;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Verdict {
  enum { Pass, Fail, Skip } state = Pass;
  std::string detail;
};

/// Collects failed conditions; the first few are reported.
class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (!ok && failures_.size() < 5) {
      failures_.push_back(what);
    }
    failed_ = failed_ || !ok;
  }
  Verdict verdict(const std::string& pass_detail) const {
    if (!failed_) {
      return {Verdict::Pass, pass_detail};
    }
    std::string msg;
    for (const auto& f : failures_) {
      msg += (msg.empty() ? "" : "; ") + f;
    }
    return {Verdict::Fail, msg};
  }

 private:
  bool failed_ = false;
  std::vector<std::string> failures_;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt_seconds(double s) {
  std::ostringstream out;
  out.precision(2);
  out << std::fixed << s << " s";
  return out.str();
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream buf;
  buf << f.rdbuf();
  return buf.str();
}

int run_cli(std::vector<std::string> args, std::string* out_text = nullptr, EnvLookup env = process_env()) {
  args.insert(args.begin(), "img2uml");
  std::vector<const char*> argv;
  for (const auto& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err, std::move(env));
  if (out_text) {
    *out_text = out.str();
  }
  return code;
}

Verdict round_trip() {
  Checker c;
  std::mt19937 rng(500);
  std::set<ClassifierKind> kinds;
  std::set<Visibility> visibilities;
  std::set<RelationshipKind> relationships;
  std::set<std::string> multiplicities;
  int labels = 0;
  const auto start = Clock::now();
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const UmlModel m = testing::random_model(rng);
    const auto parsed = parse_plantuml(emit_plantuml(m));
    c.expect(parsed.ok() && parsed.model() == m, "model " + std::to_string(i) + " differs after round trip");
    for (const auto& cl : m.classifiers) {
      kinds.insert(cl.kind);
      for (const auto& a : cl.attributes) visibilities.insert(a.visibility);
      for (const auto& me : cl.methods) visibilities.insert(me.visibility);
    }
    for (const auto& r : m.relationships) {
      relationships.insert(r.kind);
      if (r.source_multiplicity) multiplicities.insert(*r.source_multiplicity);
      if (r.target_multiplicity) multiplicities.insert(*r.target_multiplicity);
      labels += r.label.has_value();
    }
  }
  const double elapsed = seconds_since(start);
  c.expect(kinds.size() == 4, "not every classifier kind generated");
  c.expect(visibilities.size() == 5, "not every visibility generated");
  c.expect(relationships.size() == 6, "not every relationship kind generated");
  c.expect(multiplicities.size() >= 4, "too few distinct multiplicities");
  c.expect(labels > 0, "no labels generated");
  c.expect(elapsed < 10.0, "took " + fmt_seconds(elapsed));
  return c.verdict(std::to_string(n) + " models in " + fmt_seconds(elapsed) + ", " +
                   std::to_string(multiplicities.size()) + " distinct multiplicities");
}

Verdict syntax_fixtures() {
  Checker c;
  {
    const auto out = parse_plantuml("@startuml\nclass Animal{}\nclass Fish extends Animal{\n  +swim()\n}\n@enduml");
    c.expect(out.ok(), "extends form rejected");
    if (out.ok()) {
      const auto& rels = out.model().relationships;
      c.expect(rels.size() == 1 && rels[0].kind == RelationshipKind::Generalization && rels[0].source == "Fish" &&
                   rels[0].target == "Animal",
               "extends form is not Fish -> Animal generalization");
    }
  }
  {
    const auto out = parse_plantuml("@startuml\nclass Animal{}\nclass Fish <|-- Animal{\n  +swim()\n}\n@enduml");
    c.expect(!out.ok() && out.diagnostics()[0].line == 3 && out.diagnostics()[0].column > 1,
             "arrow inside a class declaration not rejected at line 3");
  }
  {
    const auto out = parse_plantuml("@startuml\nDuck{}\n@enduml");
    c.expect(!out.ok() && out.diagnostics()[0].line == 2, "bare Duck{} not rejected at line 2");
  }
  {
    const auto out = parse_plantuml("@startuml\nAnimal <|-- Fish\n@enduml");
    c.expect(out.ok() && out.model().relationships.size() == 1 && out.model().relationships[0].source == "Fish" &&
                 out.model().relationships[0].target == "Animal",
             "Animal <|-- Fish is not source=Fish, target=Animal");
  }
  return c.verdict("extends accepted; arrow-in-declaration and bare body rejected with positions; <|-- direction");
}

Verdict diff_properties() {
  Checker c;
  std::mt19937 rng(1000);
  const auto start = Clock::now();
  const int n = 2000;
  for (int i = 0; i < n; ++i) {
    const UmlModel gold = testing::random_model(rng, 10);
    const UmlModel cand = i % 2 == 0 ? testing::random_model(rng, 10) : testing::mutate(gold, rng).candidate;
    const std::string id = "pair " + std::to_string(i);
    c.expect(diff_models(gold, gold).total == 0, id + ": identity");
    const auto ab = diff_models(gold, cand);
    const auto ba = diff_models(cand, gold);
    c.expect(ab.total == ba.total, id + ": asymmetric count");
    c.expect(ab.total == testing::oracle_diff(gold, cand).total(), id + ": disagrees with oracle");

    UmlModel cut = gold;
    const auto index = static_cast<std::size_t>(testing::uniform(rng, 0, static_cast<int>(gold.classifiers.size()) - 1));
    const Classifier& victim = gold.classifiers[index];
    const std::string key = fold_text(victim.name);
    int incident = 0;
    for (const auto& r : gold.relationships) {
      incident += fold_text(r.source) == key || fold_text(r.target) == key;
    }
    testing::remove_classifier(cut, index);
    const int expected = 1 + static_cast<int>(victim.attributes.size() + victim.methods.size()) + incident;
    c.expect(diff_models(gold, cut).total == expected, id + ": cascade");
  }
  const double elapsed = seconds_since(start);
  c.expect(elapsed < 30.0, "took " + fmt_seconds(elapsed));
  return c.verdict(std::to_string(n) + " pairs in " + fmt_seconds(elapsed));
}

Verdict syntax_table() {
  Checker c;
  std::vector<AttemptRecord> records;
  const std::vector<std::tuple<std::string, int, int, std::string, std::string>> rows = {
      {"gpt-4v", 0, 0, "0 (0.0%)", "0 (0.0%)"},
      {"gemini-pro", 16, 4, "16 (44.4%)", "4 (11.1%)"},
      {"gemini-ultra", 16, 8, "16 (44.4%)", "8 (22.2%)"},
      {"cogvlm", 20, 0, "20 (55.6%)", "0 (0.0%)"},
  };
  for (const auto& [provider, errors, refusals, a, b] : rows) {
    const auto part = testing::syntax_records(provider, 36, errors, refusals);
    records.insert(records.end(), part.begin(), part.end());
  }
  const auto summary = summarize_syntax(records);
  std::string shown;
  for (const auto& [provider, errors, refusals, want_syntax, want_none] : rows) {
    const auto it = std::find_if(summary.rows.begin(), summary.rows.end(),
                                 [&](const SyntaxRow& r) { return r.provider_id == provider; });
    if (it == summary.rows.end()) {
      c.expect(false, provider + " missing");
      continue;
    }
    const std::string syntax = format_count_pct(it->wrong_syntax_count, it->wrong_syntax_pct);
    const std::string none = format_count_pct(it->no_code_count, it->no_code_pct);
    c.expect(syntax == want_syntax && none == want_none, provider + ": " + syntax + " / " + none);
    shown += (shown.empty() ? "" : ", ") + syntax + "/" + none;
  }
  return c.verdict(shown);
}

Verdict ranking() {
  Checker c;
  auto ok = [](std::string provider, std::string image, std::string prompt, int attempt, int mistakes) {
    AttemptRecord r;
    r.provider_id = std::move(provider);
    r.image_id = std::move(image);
    r.prompt_id = std::move(prompt);
    r.attempt_index = attempt;
    r.mistake_count = mistakes;
    return r;
  };
  AttemptRecord refusal = ok("m", "skipped", "1", 1, 0);
  refusal.outcome = RecordOutcome::Refusal;
  refusal.mistake_count.reset();
  AttemptRecord error = ok("m", "skipped", "2", 1, 0);
  error.outcome = RecordOutcome::SyntaxError;
  error.mistake_count.reset();
  const auto hand = rank_prompts({ok("m", "i", "1", 1, 2), ok("m", "i", "2", 1, 5), ok("m", "i", "3", 1, 5),
                                  ok("m", "i", "3", 2, 9), ok("m", "j", "1", 1, 3), ok("m", "j", "2", 1, 3),
                                  refusal, error});
  c.expect(hand.cells_considered == 2, "unscorable cell not skipped");
  c.expect(hand.by_prompt.at("1") == PromptScore{2, 1}, "prompt 1 credits");
  c.expect(hand.by_prompt.at("2") == PromptScore{1, 2}, "prompt 2 credits");
  c.expect(hand.by_prompt.at("3") == PromptScore{0, 1}, "prompt 3 credits");

  const auto grid = rank_prompts(testing::study_records());
  auto row = [&](auto member) {
    std::string s;
    for (const auto* id : {"1", "2", "3"}) {
      s += (s.empty() ? "" : "/") + std::to_string(grid.by_prompt.at(id).*member);
    }
    return s;
  };
  const std::string best = row(&PromptScore::best_count);
  const std::string worst = row(&PromptScore::worst_count);
  // Pinned output of the ranking rule on the reference grid.
  c.expect(grid.cells_considered == 15 && best == "8/5/5" && worst == "5/7/8",
           "reference grid gives best " + best + ", worst " + worst);
  const bool published = best == "8/6/4" && worst == "5/4/6";
  const std::string readme = slurp(fs::path(IMG2UML_SOURCE_DIR) / "README.md");
  const bool documented = readme.find("8/6/4") != std::string::npos && readme.find("8/5/5") != std::string::npos;
  c.expect(published || documented, "grid result differs from 8/6/4, 5/4/6 and the difference is not documented");
  return c.verdict("ties and skips credited correctly; reference grid gives best " + best + ", worst " + worst +
                   " over 15 cells" + (published ? "" : " (published 8/6/4, 5/4/6; difference documented in README)"));
}

Verdict replay_end_to_end() {
  Checker c;
  std::vector<std::string> reports;
  std::vector<std::vector<AttemptRecord>> runs;
  double slowest = 0;
  for (int run = 0; run < 2; ++run) {
    testing::TempDir dir;
    const testing::ReplayExperiment exp(dir.path());
    const auto start = Clock::now();
    std::string out;
    const int code = run_cli({"experiment", "run", exp.config_path().string()}, &out);
    const double elapsed = seconds_since(start);
    slowest = std::max(slowest, elapsed);
    c.expect(code == 0, "experiment run exited " + std::to_string(code));
    c.expect(elapsed < 10.0, "run took " + fmt_seconds(elapsed));
    const fs::path log = dir / "out" / "runlog.jsonl";
    auto records = latest_records(read_run_log(log));
    c.expect(records.size() == 36, std::to_string(records.size()) + " records");
    for (auto& r : records) {
      r.timestamp.clear();
    }
    runs.push_back(records);
    for (const std::string format : {"markdown", "csv"}) {
      std::string first;
      std::string second;
      c.expect(run_cli({"experiment", "report", log.string(), "--format", format}, &first) == 0, format + " failed");
      run_cli({"experiment", "report", log.string(), "--format", format}, &second);
      c.expect(!first.empty() && first == second, format + " reports differ between invocations");
    }
  }
  c.expect(runs[0] == runs[1], "two fresh runs recorded different outcomes");
  return c.verdict("36 records per run, slowest " + fmt_seconds(slowest) +
                   "; identical outcomes across runs; markdown and csv reports byte-identical");
}

class FunctionTransport : public Transport {
 public:
  explicit FunctionTransport(std::function<std::string()> next) : next_(std::move(next)) {}
  HttpResponse post(const HttpRequest&) override {
    nlohmann::json body = {{"choices", {{{"message", {{"content", next_()}}}, {"finish_reason", "stop"}}}}};
    return HttpResponse{200, body.dump()};
  }

 private:
  std::function<std::string()> next_;
};

Verdict fresh_context() {
  Checker c;
  int conversations = 0;
  for (int max_repairs : {0, 2}) {
    testing::TempDir dir;
    const testing::ReplayExperiment exp(dir.path());
    ExperimentConfig config = exp.load();
    config.max_repairs = max_repairs;
    std::mutex m;
    std::vector<Conversation> seen;
    Gateway gateway(make_http_transport(), process_env());
    gateway.set_observer([&](const ProviderConfig& p, const Conversation& conv, int nonce) {
      std::lock_guard lock(m);
      seen.push_back(conv);
      if (conv.turns.size() > 1) {
        // Repair answers stay broken so the conversation keeps growing.
        write_replay_fixture(dir / "replay", p, conv, nonce, "```plantuml\n@startuml\nStill{}\n@enduml\n```");
      }
    });
    const auto records = run_experiment(config, gateway);
    c.expect(records.size() == 36, "grid incomplete");
    for (const auto& r : records) {
      c.expect(r.repairs_used <= max_repairs, "repairs_used above the bound");
    }
    std::set<std::string> prompts;
    for (int p = 1; p <= 3; ++p) {
      prompts.insert(render_prompt(builtin_prompt(p)));
    }
    int initial = 0;
    for (const auto& conv : seen) {
      const auto& t = conv.turns;
      if (t.size() == 1) {
        ++initial;
        c.expect(t[0].role == Role::User && t[0].image && prompts.count(t[0].text) == 1, "initial turn shape");
        continue;
      }
      c.expect(max_repairs > 0, "multi-turn conversation without repairs");
      c.expect(t.size() % 2 == 1 && t.size() <= 1 + 2 * static_cast<std::size_t>(max_repairs),
               "repair conversation size " + std::to_string(t.size()));
      for (std::size_t k = 1; k < t.size(); ++k) {
        c.expect(t[k].role == (k % 2 == 1 ? Role::Assistant : Role::User) && !t[k].image, "repair turn order");
      }
    }
    c.expect(initial == 36, std::to_string(initial) + " initial conversations");
    conversations += static_cast<int>(seen.size());
  }

  std::mt19937 rng(77);
  const std::vector<std::string> fragments = {"@startuml\n", "@enduml\n", "```\n", "class A {\n", "}\n", "A -- B\n",
                                              "Duck{}\n", "I cannot help.\n", "A <|-- B\n", "+x : int\n"};
  Gateway fuzz_gateway(std::make_shared<FunctionTransport>([&] {
                         std::string s;
                         for (int i = testing::uniform(rng, 0, 8); i > 0; --i) {
                           s += fragments[static_cast<std::size_t>(testing::uniform(rng, 0, 9))];
                         }
                         return s;
                       }),
                       [](const std::string&) { return std::optional<std::string>("key"); });
  ProviderConfig fuzz;
  fuzz.provider_id = "fuzz";
  fuzz.endpoint_kind = EndpointKind::OpenAiCompatible;
  fuzz.model_name = "m";
  const auto image = std::make_shared<const Image>(Image::from_bytes(testing::fake_png("fuzz")));
  const int pipelines = 2000;
  for (int i = 0; i < pipelines; ++i) {
    const int bound = i % 4;
    const auto out = convert(fuzz_gateway, image, builtin_prompt(1 + i % 3), fuzz, {bound, i});
    c.expect(out.repairs_used <= bound, "fuzzed pipeline exceeded repair bound");
    c.expect(out.transcript.turns.size() == 2 + 2 * static_cast<std::size_t>(out.repairs_used),
             "fuzzed transcript size");
  }
  return c.verdict(std::to_string(conversations) + " harness conversations and " + std::to_string(pipelines) +
                   " fuzzed pipelines checked");
}

Verdict live_smoke() {
  const EnvLookup env = process_env();
  const auto providers_file = env("IMG2UML_PROVIDERS");
  if (!providers_file || !fs::exists(*providers_file)) {
    return {Verdict::Skip, "IMG2UML_PROVIDERS not set"};
  }
  const auto wanted = env("IMG2UML_LIVE_PROVIDER");
  std::optional<ProviderConfig> live;
  for (const auto& p : load_providers(*providers_file)) {
    if (p.endpoint_kind != EndpointKind::Replay && env(api_key_variable(p.provider_id)) &&
        (!wanted || *wanted == p.provider_id)) {
      live = p;
      break;
    }
  }
  if (!live) {
    return {Verdict::Skip, "no live provider with an API key in the environment"};
  }
  const fs::path image =
      env("IMG2UML_LIVE_IMAGE").value_or((fs::path(IMG2UML_SOURCE_DIR) / "data" / "images" / "level1.png").string());
  testing::TempDir dir;
  const fs::path out = dir / "live.puml";
  const int code = run_cli({"--providers", *providers_file, "convert", image.string(), "--provider",
                            live->provider_id, "--out", out.string()});
  Checker c;
  c.expect(code == cli::kSuccess || code == cli::kDomainFailure, "exit " + std::to_string(code));
  if (code == cli::kSuccess) {
    c.expect(parse_plantuml(slurp(out)).ok(), "written file does not parse");
  }
  return c.verdict(live->provider_id + " exited " + std::to_string(code));
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"parser-round-trip", round_trip},
      {"syntax-fixtures", syntax_fixtures},
      {"diff-properties", diff_properties},
      {"syntax-summary-table", syntax_table},
      {"prompt-ranking", ranking},
      {"replay-end-to-end", replay_end_to_end},
      {"fresh-context", fresh_context},
      {"live-smoke", live_smoke},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {Verdict::Fail, std::string("exception: ") + e.what()};
    }
    const char* label = v.state == Verdict::Pass ? "PASS" : v.state == Verdict::Fail ? "FAIL" : "SKIP";
    failed += v.state == Verdict::Fail;
    std::cout << label << ' ' << name << ": " << v.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
