#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <tuple>

#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"

namespace img2uml {

namespace fs = std::filesystem;
using nlohmann::json;

std::string_view to_string(RecordOutcome o) {
  switch (o) {
    case RecordOutcome::Ok: return "ok";
    case RecordOutcome::SyntaxError: return "syntax-error";
    case RecordOutcome::Refusal: return "refusal";
    case RecordOutcome::FailedInfrastructure: return "failed-infrastructure";
  }
  return "?";
}

std::optional<RecordOutcome> parse_record_outcome(std::string_view s) {
  for (auto o : {RecordOutcome::Ok, RecordOutcome::SyntaxError, RecordOutcome::Refusal,
                 RecordOutcome::FailedInfrastructure}) {
    if (s == to_string(o)) {
      return o;
    }
  }
  return std::nullopt;
}

json record_to_json(const AttemptRecord& r) {
  auto opt = [](const auto& v) { return v ? json(*v) : json(nullptr); };
  return {
      {"schema", kRunLogSchema},
      {"image_id", r.image_id},
      {"level", r.level},
      {"provider_id", r.provider_id},
      {"prompt_id", r.prompt_id},
      {"attempt_index", r.attempt_index},
      {"outcome", to_string(r.outcome)},
      {"mistake_count", opt(r.mistake_count)},
      {"repairs_used", r.repairs_used},
      {"artifact_dir", opt(r.artifact_dir)},
      {"error", opt(r.error)},
      {"timestamp", r.timestamp},
      {"config_digest", r.config_digest},
  };
}

AttemptRecord record_from_json(const json& j) {
  try {
    if (!j.is_object()) {
      throw FormatError("record is not an object");
    }
    if (j.at("schema").get<int>() != kRunLogSchema) {
      throw FormatError("unsupported record schema " + j.at("schema").dump());
    }
    AttemptRecord r;
    r.image_id = j.at("image_id").get<std::string>();
    r.level = j.value("level", "");
    r.provider_id = j.at("provider_id").get<std::string>();
    r.prompt_id = j.at("prompt_id").get<std::string>();
    r.attempt_index = j.at("attempt_index").get<int>();
    const auto outcome = parse_record_outcome(j.at("outcome").get<std::string>());
    if (!outcome) {
      throw FormatError("unknown outcome " + j.at("outcome").dump());
    }
    r.outcome = *outcome;
    if (j.contains("mistake_count") && !j["mistake_count"].is_null()) {
      r.mistake_count = j["mistake_count"].get<int>();
    }
    if ((r.outcome == RecordOutcome::Ok) != r.mistake_count.has_value()) {
      throw FormatError("mistake_count must be present exactly for ok records");
    }
    r.repairs_used = j.value("repairs_used", 0);
    if (j.contains("artifact_dir") && !j["artifact_dir"].is_null()) {
      r.artifact_dir = j["artifact_dir"].get<std::string>();
    }
    if (j.contains("error") && !j["error"].is_null()) {
      r.error = j["error"].get<std::string>();
    }
    r.timestamp = j.value("timestamp", "");
    r.config_digest = j.value("config_digest", "");
    return r;
  } catch (const json::exception& e) {
    throw FormatError(std::string("malformed record: ") + e.what());
  }
}

std::vector<AttemptRecord> read_run_log(const fs::path& path) {
  std::vector<AttemptRecord> out;
  std::ifstream f(path, std::ios::binary);
  if (!f) {
    if (fs::exists(path)) {
      throw FormatError("cannot read run log " + path.string());
    }
    return out;
  }
  std::ostringstream buf;
  buf << f.rdbuf();
  const std::string text = buf.str();

  std::size_t start = 0;
  int line_no = 0;
  while (start < text.size()) {
    ++line_no;
    const auto nl = text.find('\n', start);
    const bool complete = nl != std::string::npos;
    const std::string line = text.substr(start, complete ? nl - start : std::string::npos);
    start = complete ? nl + 1 : text.size();
    if (line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    try {
      out.push_back(record_from_json(json::parse(line)));
    } catch (const std::exception& e) {
      if (!complete) {
        break;  // interrupted final write
      }
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

RunLogWriter::RunLogWriter(fs::path path) : path_(std::move(path)) {
  if (path_.has_parent_path()) {
    fs::create_directories(path_.parent_path());
  }
  // A final line without a newline comes from an interrupted run. Keep it if
  // it is a complete record, otherwise cut it off as read_run_log would.
  std::ifstream in(path_, std::ios::binary);
  if (!in) {
    return;
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  in.close();
  const std::string text = buf.str();
  if (text.empty() || text.back() == '\n') {
    return;
  }
  const auto nl = text.rfind('\n');
  const std::size_t tail = nl == std::string::npos ? 0 : nl + 1;
  bool complete = false;
  try {
    record_from_json(json::parse(text.substr(tail)));
    complete = true;
  } catch (const std::exception&) {
  }
  if (complete) {
    std::ofstream(path_, std::ios::binary | std::ios::app) << '\n';
  } else {
    fs::resize_file(path_, tail);
  }
}

void RunLogWriter::append(const AttemptRecord& record) {
  const std::string line = record_to_json(record).dump(-1, ' ', false, json::error_handler_t::replace) + "\n";
  std::lock_guard lock(mutex_);
  std::ofstream f(path_, std::ios::binary | std::ios::app);
  f.write(line.data(), static_cast<std::streamsize>(line.size()));
  f.flush();
  if (!f) {
    throw Error("cannot append to run log " + path_.string());
  }
}

std::vector<AttemptRecord> latest_records(const std::vector<AttemptRecord>& records) {
  using Key = std::tuple<std::string, std::string, std::string, int>;
  std::map<Key, const AttemptRecord*> last;
  for (const auto& r : records) {
    last[Key{r.image_id, r.provider_id, r.prompt_id, r.attempt_index}] = &r;
  }
  std::vector<AttemptRecord> out;
  out.reserve(last.size());
  for (const auto& [key, r] : last) {
    out.push_back(*r);
  }
  return out;
}

}  // namespace img2uml
