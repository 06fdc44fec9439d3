#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "img2uml/gateway.hpp"
#include "img2uml/pipeline.hpp"

namespace img2uml {

struct ImageSpec {
  std::string image_id;
  std::filesystem::path image_path;
  std::filesystem::path gold_path;
  std::string level;

  bool operator==(const ImageSpec&) const = default;
};

struct ExperimentConfig {
  std::vector<ImageSpec> images;
  std::vector<PromptTemplate> prompts;
  std::vector<ProviderConfig> providers;
  int attempts_per_cell = 3;
  int max_repairs = 0;
  std::filesystem::path output_dir = "runs";

  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses the TOML experiment file. Relative paths resolve against base_dir.
/// Throws FormatError for malformed TOML and ConfigurationError for schema
/// violations. Does not touch the referenced files.
ExperimentConfig parse_experiment_config(std::string_view toml_text, const std::filesystem::path& base_dir);

/// Reads, parses and validates the file (see validate_experiment_config).
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Only the [[providers]] entries of a TOML file; other keys are ignored.
std::vector<ProviderConfig> load_providers(const std::filesystem::path& path);

/// Unique ids, non-empty grid, valid providers, and every image and gold model
/// file present and loadable. Throws ConfigurationError.
void validate_experiment_config(const ExperimentConfig& config);

/// Hex digest of the normalized configuration.
std::string config_digest(const ExperimentConfig& config);

enum class RecordOutcome { Ok, SyntaxError, Refusal, FailedInfrastructure };

std::string_view to_string(RecordOutcome o);
std::optional<RecordOutcome> parse_record_outcome(std::string_view s);

inline constexpr int kRunLogSchema = 1;

struct AttemptRecord {
  std::string image_id;
  std::string level;
  std::string provider_id;
  std::string prompt_id;
  int attempt_index = 1;
  RecordOutcome outcome = RecordOutcome::Ok;
  std::optional<int> mistake_count;  // present iff outcome is Ok
  int repairs_used = 0;
  std::optional<std::string> artifact_dir;
  std::optional<std::string> error;  // failed-infrastructure only
  std::string timestamp;             // UTC, ISO 8601
  std::string config_digest;

  bool operator==(const AttemptRecord&) const = default;
};

nlohmann::json record_to_json(const AttemptRecord& record);
/// Throws FormatError for missing fields, unknown outcomes or schema versions.
AttemptRecord record_from_json(const nlohmann::json& j);

/// One record per line. A missing file is an empty log. A final line without
/// a newline that does not parse is treated as an interrupted write and
/// dropped; any other bad line throws FormatError naming the line.
std::vector<AttemptRecord> read_run_log(const std::filesystem::path& path);

/// Appends complete lines; safe to call from several threads. Opening drops
/// an unterminated final line that does not parse.
class RunLogWriter {
 public:
  explicit RunLogWriter(std::filesystem::path path);
  void append(const AttemptRecord& record);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

/// Last record per (image, provider, prompt, attempt), ordered by image,
/// provider, prompt and attempt.
std::vector<AttemptRecord> latest_records(const std::vector<AttemptRecord>& records);

/// `<output_dir>/runlog.jsonl`
std::filesystem::path run_log_path(const ExperimentConfig& config);

/// Runs every missing or previously failed attempt of the grid, appending one
/// record per attempt to the run log, and returns the latest record for every
/// grid position. ConfigurationError aborts the run (records already written
/// stay in the log).
std::vector<AttemptRecord> run_experiment(const ExperimentConfig& config, Gateway& gateway);

struct SyntaxRow {
  std::string provider_id;
  int attempts_total = 0;
  int wrong_syntax_count = 0;
  double wrong_syntax_pct = 0;
  int no_code_count = 0;
  double no_code_pct = 0;

  bool operator==(const SyntaxRow&) const = default;
};

/// Rows ordered by provider id.
struct SyntaxSummary {
  std::vector<SyntaxRow> rows;
};

/// 100 * count / total rounded half up to one decimal; 0 when total is 0.
double percent_1dp(int count, int total);

/// "16 (44.4%)"
std::string format_count_pct(int count, double pct);

/// Per provider, over its graded (not failed-infrastructure) attempts.
SyntaxSummary summarize_syntax(const std::vector<AttemptRecord>& records);

struct PromptScore {
  int best_count = 0;
  int worst_count = 0;

  bool operator==(const PromptScore&) const = default;
};

struct PromptRanking {
  std::map<std::string, PromptScore> by_prompt;  // every prompt id seen in the records
  int cells_considered = 0;
};

/// Per (provider, image) cell, a prompt scores the minimum mistake count of
/// its ok attempts; prompts without one are left out and cells without any
/// scorable prompt are skipped. Every prompt tied for the cell minimum gets a
/// best credit and every prompt tied for the maximum a worst credit.
PromptRanking rank_prompts(const std::vector<AttemptRecord>& records);

enum class ReportFormat { Markdown, Csv };

/// Throws UsageError for anything but "markdown"/"md" and "csv".
ReportFormat parse_report_format(std::string_view s);

/// Attempts grid, syntax summary and prompt ranking plus run metadata. Uses
/// latest_records internally; output depends only on the record values.
std::string render_report(const std::vector<AttemptRecord>& records, ReportFormat format);

}  // namespace img2uml
