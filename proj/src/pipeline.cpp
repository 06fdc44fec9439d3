#include "img2uml/pipeline.hpp"

#include <fstream>
#include <random>

#include <nlohmann/json.hpp>

#include "img2uml/errors.hpp"
#include "img2uml/model_json.hpp"

namespace img2uml {

namespace fs = std::filesystem;

std::string_view to_string(OutcomeClass c) {
  switch (c) {
    case OutcomeClass::Ok: return "ok";
    case OutcomeClass::SyntaxError: return "syntax-error";
    case OutcomeClass::Refusal: return "refusal";
  }
  return "?";
}

Conversation build_initial_conversation(const std::shared_ptr<const Image>& image, const PromptTemplate& prompt) {
  return Conversation{{Turn{Role::User, render_prompt(prompt), image}}};
}

AttemptOutcome convert(Gateway& gateway, const std::shared_ptr<const Image>& image, const PromptTemplate& prompt,
                       const ProviderConfig& provider, const ConvertOptions& options) {
  if (!image) {
    throw UsageError("convert needs an image");
  }
  if (options.max_repairs < 0) {
    throw UsageError("max_repairs must not be negative");
  }
  AttemptOutcome out;
  out.transcript = build_initial_conversation(image, prompt);
  for (;;) {
    const LlmResponse response = gateway.send(provider, out.transcript, options.nonce);
    out.transcript.turns.push_back(Turn{Role::Assistant, response.text, nullptr});

    const auto block = extract_plantuml_block(response.text);
    if (!block) {
      out.result = ConversionRefusal{response.text};
      return out;
    }
    ParseOutcome parsed = parse_plantuml(*block);
    if (parsed.ok()) {
      out.result = ConversionSuccess{parsed.model(), *block};
      return out;
    }
    if (out.repairs_used >= options.max_repairs) {
      out.result = ConversionSyntaxError{parsed.diagnostics(), response.text};
      return out;
    }
    ++out.repairs_used;
    out.transcript.turns.push_back(Turn{Role::User, repair_message(parsed.diagnostics()), nullptr});
  }
}

namespace {

void write_text(const fs::path& path, std::string_view text) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  f.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!f) {
    throw Error("cannot write " + path.string());
  }
}

std::string two_digits(std::size_t n) { return n < 10 ? "0" + std::to_string(n) : std::to_string(n); }

}  // namespace

void write_attempt_artifacts(const fs::path& dir, const AttemptOutcome& outcome) {
  fs::create_directories(dir.parent_path().empty() ? fs::path(".") : dir.parent_path());
  std::random_device rd;
  const fs::path staging = dir.parent_path() / (dir.filename().string() + ".tmp-" + std::to_string(rd()));
  fs::create_directories(staging);
  try {
    nlohmann::json turns = nlohmann::json::array();
    for (std::size_t i = 0; i < outcome.transcript.turns.size(); ++i) {
      const Turn& t = outcome.transcript.turns[i];
      const std::string name = "turn-" + two_digits(i + 1) + "-" + std::string(to_string(t.role)) + ".txt";
      write_text(staging / name, t.text);
      turns.push_back(name);
    }
    nlohmann::json record = {
        {"outcome", to_string(outcome.outcome_class())},
        {"repairs_used", outcome.repairs_used},
        {"turns", std::move(turns)},
    };
    if (const auto* s = outcome.success()) {
      write_text(staging / "extracted.puml", s->plantuml_text);
      write_text(staging / "model.json", serialize_model(s->model));
      record["plantuml"] = "extracted.puml";
      record["model"] = "model.json";
    } else if (const auto* e = outcome.syntax_error()) {
      if (auto block = extract_plantuml_block(e->raw_text)) {
        write_text(staging / "extracted.puml", *block);
        record["plantuml"] = "extracted.puml";
      }
      nlohmann::json diags = nlohmann::json::array();
      for (const auto& d : e->diagnostics) {
        diags.push_back({{"line", d.line}, {"column", d.column}, {"message", d.message}, {"near", d.offending_text}});
      }
      record["diagnostics"] = std::move(diags);
    }
    write_text(staging / "outcome.json",
               record.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n");
    fs::remove_all(dir);
    fs::rename(staging, dir);
  } catch (...) {
    std::error_code ec;
    fs::remove_all(staging, ec);
    throw;
  }
}

}  // namespace img2uml
