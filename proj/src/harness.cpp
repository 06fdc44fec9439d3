#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <exception>
#include <map>
#include <thread>
#include <tuple>

#include "img2uml/errors.hpp"
#include "img2uml/experiment.hpp"
#include "img2uml/model_diff.hpp"
#include "img2uml/model_json.hpp"

namespace img2uml {

namespace fs = std::filesystem;

namespace {

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string path_segment(std::string_view id) {
  std::string out;
  for (unsigned char c : id) {
    out.push_back(std::isalnum(c) || c == '-' || c == '_' || c == '.' ? static_cast<char>(c) : '_');
  }
  return out.empty() || out == "." || out == ".." ? "_" + out : out;
}

struct Task {
  const ImageSpec* image;
  const std::shared_ptr<const Image>* pixels;
  const UmlModel* gold;
  const ProviderConfig* provider;
  const PromptTemplate* prompt;
  int attempt;
};

}  // namespace

fs::path run_log_path(const ExperimentConfig& config) { return config.output_dir / "runlog.jsonl"; }

std::vector<AttemptRecord> run_experiment(const ExperimentConfig& config, Gateway& gateway) {
  validate_experiment_config(config);
  const std::string digest = config_digest(config);

  std::vector<std::shared_ptr<const Image>> images;
  std::vector<UmlModel> golds;
  for (const auto& spec : config.images) {
    images.push_back(std::make_shared<const Image>(Image::load(spec.image_path)));
    golds.push_back(load_model_file(spec.gold_path));
  }

  using Key = std::tuple<std::string, std::string, std::string, int>;
  std::map<Key, AttemptRecord> done;
  for (auto& r : latest_records(read_run_log(run_log_path(config)))) {
    if (r.outcome != RecordOutcome::FailedInfrastructure) {
      done.emplace(Key{r.image_id, r.provider_id, r.prompt_id, r.attempt_index}, std::move(r));
    }
  }

  std::vector<Task> tasks;
  std::vector<AttemptRecord> all;
  for (std::size_t i = 0; i < config.images.size(); ++i) {
    for (const auto& provider : config.providers) {
      for (const auto& prompt : config.prompts) {
        for (int a = 1; a <= config.attempts_per_cell; ++a) {
          auto it = done.find(Key{config.images[i].image_id, provider.provider_id, prompt.prompt_id, a});
          if (it != done.end()) {
            all.push_back(std::move(it->second));
          } else {
            tasks.push_back(Task{&config.images[i], &images[i], &golds[i], &provider, &prompt, a});
          }
        }
      }
    }
  }

  RunLogWriter log(run_log_path(config));
  std::mutex results_mutex;
  std::vector<AttemptRecord> fresh;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr fatal;

  auto run_one = [&](const Task& t) {
    AttemptRecord r;
    r.image_id = t.image->image_id;
    r.level = t.image->level;
    r.provider_id = t.provider->provider_id;
    r.prompt_id = t.prompt->prompt_id;
    r.attempt_index = t.attempt;
    r.config_digest = digest;
    const fs::path dir = config.output_dir / "attempts" / path_segment(r.image_id) / path_segment(r.provider_id) /
                         ("prompt-" + path_segment(r.prompt_id)) / ("attempt-" + std::to_string(t.attempt));
    try {
      const AttemptOutcome outcome =
          convert(gateway, *t.pixels, *t.prompt, *t.provider, ConvertOptions{config.max_repairs, t.attempt});
      r.repairs_used = outcome.repairs_used;
      switch (outcome.outcome_class()) {
        case OutcomeClass::Ok:
          r.outcome = RecordOutcome::Ok;
          r.mistake_count = diff_models(*t.gold, outcome.success()->model).total;
          break;
        case OutcomeClass::SyntaxError: r.outcome = RecordOutcome::SyntaxError; break;
        case OutcomeClass::Refusal: r.outcome = RecordOutcome::Refusal; break;
      }
      write_attempt_artifacts(dir, outcome);
      r.artifact_dir = fs::relative(dir, config.output_dir).generic_string();
    } catch (const TransportError& e) {
      r.outcome = RecordOutcome::FailedInfrastructure;
      r.error = e.what();
    } catch (const FixtureMissingError& e) {
      r.outcome = RecordOutcome::FailedInfrastructure;
      r.error = e.what();
    }
    r.timestamp = utc_timestamp();
    log.append(r);
    std::lock_guard lock(results_mutex);
    fresh.push_back(std::move(r));
  };

  auto worker = [&] {
    while (!abort) {
      const std::size_t i = next++;
      if (i >= tasks.size()) {
        return;
      }
      try {
        run_one(tasks[i]);
      } catch (...) {
        std::lock_guard lock(results_mutex);
        if (!fatal) {
          fatal = std::current_exception();
        }
        abort = true;
      }
    }
  };

  std::size_t width = 0;
  for (const auto& p : config.providers) {
    width += static_cast<std::size_t>(p.max_parallel_requests);
  }
  width = std::clamp<std::size_t>(std::min(width, tasks.size()), 1, 64);
  if (width == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < width; ++i) {
      pool.emplace_back(worker);
    }
  }
  if (fatal) {
    std::rethrow_exception(fatal);
  }

  all.insert(all.end(), fresh.begin(), fresh.end());
  return latest_records(all);
}

}  // namespace img2uml
