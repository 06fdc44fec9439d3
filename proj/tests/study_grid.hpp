#pragma once

// Mistake counts from a four-model study over four diagram levels, three
// prompts and three attempts. "E" marks a syntax error, "/" an answer without
// PlantUML code.

#include <array>
#include <string>
#include <vector>

#include "img2uml/experiment.hpp"

namespace img2uml::testing {

struct StudyRow {
  const char* level;
  const char* model;
  const char* prompt;
  std::array<const char*, 3> attempts;
};

inline const std::vector<StudyRow> kStudyGrid = {
    {"1", "gpt-4v", "1", {"2", "2", "2"}},       {"1", "gpt-4v", "2", {"1", "1", "2"}},
    {"1", "gpt-4v", "3", {"1", "2", "1"}},       {"1", "gemini-pro", "1", {"2", "2", "E"}},
    {"1", "gemini-pro", "2", {"E", "E", "E"}},   {"1", "gemini-pro", "3", {"E", "E", "2"}},
    {"1", "gemini-ultra", "1", {"E", "9", "E"}}, {"1", "gemini-ultra", "2", {"E", "2", "E"}},
    {"1", "gemini-ultra", "3", {"E", "/", "E"}}, {"1", "cogvlm", "1", {"14", "E", "10"}},
    {"1", "cogvlm", "2", {"E", "E", "33"}},      {"1", "cogvlm", "3", {"E", "5", "13"}},

    {"2", "gpt-4v", "1", {"2", "2", "2"}},       {"2", "gpt-4v", "2", {"1", "3", "2"}},
    {"2", "gpt-4v", "3", {"2", "2", "2"}},       {"2", "gemini-pro", "1", {"E", "4", "E"}},
    {"2", "gemini-pro", "2", {"2", "E", "5"}},   {"2", "gemini-pro", "3", {"4", "E", "E"}},
    {"2", "gemini-ultra", "1", {"E", "E", "E"}}, {"2", "gemini-ultra", "2", {"4", "4", "10"}},
    {"2", "gemini-ultra", "3", {"4", "4", "E"}}, {"2", "cogvlm", "1", {"20", "E", "9"}},
    {"2", "cogvlm", "2", {"15", "E", "25"}},     {"2", "cogvlm", "3", {"E", "E", "E"}},

    {"3", "gpt-4v", "1", {"10", "7", "10"}},     {"3", "gpt-4v", "2", {"14", "10", "18"}},
    {"3", "gpt-4v", "3", {"14", "8", "11"}},     {"3", "gemini-pro", "1", {"16", "17", "17"}},
    {"3", "gemini-pro", "2", {"E", "25", "21"}}, {"3", "gemini-pro", "3", {"E", "24", "26"}},
    {"3", "gemini-ultra", "1", {"18", "E", "E"}}, {"3", "gemini-ultra", "2", {"E", "24", "E"}},
    {"3", "gemini-ultra", "3", {"E", "E", "23"}}, {"3", "cogvlm", "1", {"23", "E", "E"}},
    {"3", "cogvlm", "2", {"26", "26", "E"}},     {"3", "cogvlm", "3", {"27", "E", "E"}},

    {"4", "gpt-4v", "1", {"4", "3", "4"}},       {"4", "gpt-4v", "2", {"5", "5", "5"}},
    {"4", "gpt-4v", "3", {"6", "5", "6"}},       {"4", "gemini-pro", "1", {"/", "/", "/"}},
    {"4", "gemini-pro", "2", {"E", "E", "/"}},   {"4", "gemini-pro", "3", {"13", "22", "E"}},
    {"4", "gemini-ultra", "1", {"/", "/", "/"}}, {"4", "gemini-ultra", "2", {"/", "/", "/"}},
    {"4", "gemini-ultra", "3", {"/", "/", "/"}}, {"4", "cogvlm", "1", {"22", "20", "E"}},
    {"4", "cogvlm", "2", {"E", "E", "24"}},      {"4", "cogvlm", "3", {"E", "E", "E"}},
};

inline AttemptRecord study_record(const StudyRow& row, int attempt) {
  AttemptRecord r;
  r.image_id = std::string("level") + row.level;
  r.level = row.level;
  r.provider_id = row.model;
  r.prompt_id = row.prompt;
  r.attempt_index = attempt;
  const std::string cell = row.attempts[static_cast<std::size_t>(attempt - 1)];
  if (cell == "E") {
    r.outcome = RecordOutcome::SyntaxError;
  } else if (cell == "/") {
    r.outcome = RecordOutcome::Refusal;
  } else {
    r.outcome = RecordOutcome::Ok;
    r.mistake_count = std::stoi(cell);
  }
  return r;
}

inline std::vector<AttemptRecord> study_records() {
  std::vector<AttemptRecord> out;
  for (const auto& row : kStudyGrid) {
    for (int a = 1; a <= 3; ++a) {
      out.push_back(study_record(row, a));
    }
  }
  return out;
}

/// `total` records for one provider with the given syntax-error and refusal
/// counts; the rest are ok with one mistake.
inline std::vector<AttemptRecord> syntax_records(const std::string& provider, int total, int syntax_errors,
                                                 int refusals) {
  std::vector<AttemptRecord> out;
  for (int i = 0; i < total; ++i) {
    AttemptRecord r;
    r.image_id = "level" + std::to_string(i / 9 + 1);
    r.provider_id = provider;
    r.prompt_id = std::to_string(i / 3 % 3 + 1);
    r.attempt_index = i % 3 + 1;
    if (i < syntax_errors) {
      r.outcome = RecordOutcome::SyntaxError;
    } else if (i < syntax_errors + refusals) {
      r.outcome = RecordOutcome::Refusal;
    } else {
      r.outcome = RecordOutcome::Ok;
      r.mistake_count = 1;
    }
    out.push_back(r);
  }
  return out;
}

}  // namespace img2uml::testing
