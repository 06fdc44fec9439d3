#include <algorithm>
#include <cstdio>
#include <map>

#include "img2uml/experiment.hpp"

namespace img2uml {

double percent_1dp(int count, int total) {
  if (total <= 0) {
    return 0.0;
  }
  // Integer tenths, rounded half up, so 20/36 gives 55.6 exactly as printed.
  const long long tenths = (2000LL * count + total) / (2LL * total);
  return static_cast<double>(tenths) / 10.0;
}

std::string format_count_pct(int count, double pct) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d (%.1f%%)", count, pct);
  return buf;
}

SyntaxSummary summarize_syntax(const std::vector<AttemptRecord>& records) {
  std::map<std::string, SyntaxRow> rows;
  for (const auto& r : records) {
    SyntaxRow& row = rows[r.provider_id];
    row.provider_id = r.provider_id;
    if (r.outcome == RecordOutcome::FailedInfrastructure) {
      continue;
    }
    ++row.attempts_total;
    row.wrong_syntax_count += r.outcome == RecordOutcome::SyntaxError;
    row.no_code_count += r.outcome == RecordOutcome::Refusal;
  }
  SyntaxSummary out;
  for (auto& [id, row] : rows) {
    row.wrong_syntax_pct = percent_1dp(row.wrong_syntax_count, row.attempts_total);
    row.no_code_pct = percent_1dp(row.no_code_count, row.attempts_total);
    out.rows.push_back(row);
  }
  return out;
}

PromptRanking rank_prompts(const std::vector<AttemptRecord>& records) {
  PromptRanking ranking;
  // (provider, image) -> prompt -> best mistake count among ok attempts
  std::map<std::pair<std::string, std::string>, std::map<std::string, int>> cells;
  for (const auto& r : records) {
    ranking.by_prompt.try_emplace(r.prompt_id);
    if (r.outcome != RecordOutcome::Ok || !r.mistake_count) {
      continue;
    }
    auto& scores = cells[{r.provider_id, r.image_id}];
    auto [it, inserted] = scores.try_emplace(r.prompt_id, *r.mistake_count);
    if (!inserted) {
      it->second = std::min(it->second, *r.mistake_count);
    }
  }
  for (const auto& [cell, scores] : cells) {
    ++ranking.cells_considered;
    int lo = scores.begin()->second;
    int hi = lo;
    for (const auto& [prompt, score] : scores) {
      lo = std::min(lo, score);
      hi = std::max(hi, score);
    }
    for (const auto& [prompt, score] : scores) {
      ranking.by_prompt[prompt].best_count += score == lo;
      ranking.by_prompt[prompt].worst_count += score == hi;
    }
  }
  return ranking;
}

}  // namespace img2uml
