#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"

namespace img2uml {

namespace {

struct GridRow {
  std::string image_id;
  std::string level;
  std::string provider_id;
  std::string prompt_id;
  std::map<int, std::string> cells;
};

std::string cell_text(const AttemptRecord& r) {
  switch (r.outcome) {
    case RecordOutcome::Ok: return std::to_string(*r.mistake_count);
    case RecordOutcome::SyntaxError: return "Error";
    case RecordOutcome::Refusal: return "/";
    case RecordOutcome::FailedInfrastructure: return "failed";
  }
  return "?";
}

struct Tables {
  std::vector<std::pair<std::string, std::string>> metadata;
  int attempt_columns = 3;
  std::vector<GridRow> grid;
  SyntaxSummary syntax;
  PromptRanking ranking;
};

Tables build_tables(const std::vector<AttemptRecord>& input) {
  const std::vector<AttemptRecord> records = latest_records(input);
  Tables t;

  std::set<std::string> digests;
  std::string first;
  std::string last;
  int failed = 0;
  for (const auto& r : records) {
    if (!r.config_digest.empty()) {
      digests.insert(r.config_digest);
    }
    if (!r.timestamp.empty()) {
      first = first.empty() ? r.timestamp : std::min(first, r.timestamp);
      last = std::max(last, r.timestamp);
    }
    failed += r.outcome == RecordOutcome::FailedInfrastructure;
  }
  std::string digest_text;
  for (const auto& d : digests) {
    digest_text += (digest_text.empty() ? "" : " ") + d;
  }
  t.metadata = {
      {"records", std::to_string(records.size())},
      {"failed_infrastructure", std::to_string(failed)},
      {"config_digest", digest_text.empty() ? "-" : digest_text},
      {"first_attempt", first.empty() ? "-" : first},
      {"last_attempt", last.empty() ? "-" : last},
  };

  std::map<std::tuple<std::string, std::string, std::string>, GridRow> grid;
  int max_attempt = 0;
  for (const auto& r : records) {
    GridRow& row = grid[{r.image_id, r.provider_id, r.prompt_id}];
    row.image_id = r.image_id;
    row.level = r.level;
    row.provider_id = r.provider_id;
    row.prompt_id = r.prompt_id;
    row.cells[r.attempt_index] = cell_text(r);
    max_attempt = std::max(max_attempt, r.attempt_index);
  }
  if (max_attempt > 0) {
    t.attempt_columns = max_attempt;
  }
  for (auto& [key, row] : grid) {
    t.grid.push_back(std::move(row));
  }
  t.syntax = summarize_syntax(records);
  t.ranking = rank_prompts(records);
  return t;
}

std::string md_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    if (c == '|') {
      out += "\\|";
    } else if (c == '\n' || c == '\r') {
      out += ' ';
    } else {
      out += c;
    }
  }
  return out;
}

void md_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  out << '|';
  for (const auto& c : cells) {
    out << ' ' << md_escape(c) << " |";
  }
  out << '\n';
}

void md_header(std::ostringstream& out, const std::vector<std::string>& cells) {
  md_row(out, cells);
  out << '|';
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << "---|";
  }
  out << '\n';
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) {
    return s;
  }
  std::string out = "\"";
  for (char c : s) {
    out += c;
    if (c == '"') {
      out += '"';
    }
  }
  return out + "\"";
}

void csv_row(std::ostringstream& out, const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    out << (i ? "," : "") << csv_field(cells[i]);
  }
  out << '\n';
}

std::string one_decimal(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

std::vector<std::string> grid_cells(const GridRow& row, int columns) {
  std::vector<std::string> cells = {row.image_id, row.level, row.provider_id, row.prompt_id};
  for (int a = 1; a <= columns; ++a) {
    auto it = row.cells.find(a);
    cells.push_back(it == row.cells.end() ? "" : it->second);
  }
  return cells;
}

std::string render_markdown(const Tables& t) {
  std::ostringstream out;
  out << "# Experiment report\n\n";
  md_header(out, {"Run", "Value"});
  for (const auto& [k, v] : t.metadata) {
    md_row(out, {k, v});
  }

  out << "\n## Mistakes per attempt\n\n";
  std::vector<std::string> header = {"Image", "Level", "Provider", "Prompt"};
  for (int a = 1; a <= t.attempt_columns; ++a) {
    header.push_back("Attempt " + std::to_string(a));
  }
  md_header(out, header);
  for (const auto& row : t.grid) {
    md_row(out, grid_cells(row, t.attempt_columns));
  }
  out << "\nError: wrong PlantUML syntax. /: no PlantUML code. failed: infrastructure failure, not graded.\n";

  out << "\n## Wrong syntax and missing code\n\n";
  md_header(out, {"Provider", "Attempts", "Wrong syntax", "No PlantUML code"});
  for (const auto& r : t.syntax.rows) {
    md_row(out, {r.provider_id, std::to_string(r.attempts_total), format_count_pct(r.wrong_syntax_count, r.wrong_syntax_pct),
                 format_count_pct(r.no_code_count, r.no_code_pct)});
  }

  out << "\n## Prompt ranking (cells considered: " << t.ranking.cells_considered << ")\n\n";
  md_header(out, {"Prompt", "Best score attained", "Worst score attained"});
  for (const auto& [prompt, score] : t.ranking.by_prompt) {
    md_row(out, {prompt, std::to_string(score.best_count), std::to_string(score.worst_count)});
  }
  return out.str();
}

std::string render_csv(const Tables& t) {
  std::ostringstream out;
  csv_row(out, {"key", "value"});
  for (const auto& [k, v] : t.metadata) {
    csv_row(out, {k, v});
  }

  out << '\n';
  std::vector<std::string> header = {"image_id", "level", "provider_id", "prompt_id"};
  for (int a = 1; a <= t.attempt_columns; ++a) {
    header.push_back("attempt_" + std::to_string(a));
  }
  csv_row(out, header);
  for (const auto& row : t.grid) {
    csv_row(out, grid_cells(row, t.attempt_columns));
  }

  out << '\n';
  csv_row(out, {"provider_id", "attempts_total", "wrong_syntax_count", "wrong_syntax_pct", "no_code_count",
                "no_code_pct"});
  for (const auto& r : t.syntax.rows) {
    csv_row(out, {r.provider_id, std::to_string(r.attempts_total), std::to_string(r.wrong_syntax_count),
                  one_decimal(r.wrong_syntax_pct), std::to_string(r.no_code_count), one_decimal(r.no_code_pct)});
  }

  out << '\n';
  csv_row(out, {"prompt_id", "best_count", "worst_count", "cells_considered"});
  for (const auto& [prompt, score] : t.ranking.by_prompt) {
    csv_row(out, {prompt, std::to_string(score.best_count), std::to_string(score.worst_count),
                  std::to_string(t.ranking.cells_considered)});
  }
  return out.str();
}

}  // namespace

ReportFormat parse_report_format(std::string_view s) {
  if (s == "markdown" || s == "md") {
    return ReportFormat::Markdown;
  }
  if (s == "csv") {
    return ReportFormat::Csv;
  }
  throw UsageError("unknown report format '" + std::string(s) + "' (expected markdown or csv)");
}

std::string render_report(const std::vector<AttemptRecord>& records, ReportFormat format) {
  const Tables t = build_tables(records);
  return format == ReportFormat::Markdown ? render_markdown(t) : render_csv(t);
}

}  // namespace img2uml
