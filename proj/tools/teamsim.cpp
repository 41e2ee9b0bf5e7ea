#include <csignal>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "teamsim/engine.hpp"
#include "teamsim/error.hpp"
#include "teamsim/http_api.hpp"
#include "teamsim/llm.hpp"
#include "teamsim/metrics.hpp"
#include "teamsim/runlog.hpp"
#include "teamsim/scenario.hpp"
#include "teamsim/service.hpp"
#include "teamsim/snapshot.hpp"
#include "teamsim/survey.hpp"

using namespace teamsim;

namespace {

constexpr int kOk = 0;
constexpr int kScenarioError = 1;
constexpr int kRunFailure = 2;

// Parse + validate; prints diagnostics to stderr. nullopt on errors.
std::optional<Scenario> load_checked(const std::string& path) {
  Scenario s;
  try {
    s = load_scenario_file(path);
  } catch (const Error& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return std::nullopt;
  }
  const auto diags = validate_scenario(s);
  for (const auto& d : diags) std::cerr << path << ": " << to_string(d) << "\n";
  if (has_errors(diags)) return std::nullopt;
  return s;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw NotFound("cannot write " + path);
  out << text;
}

struct RunArgs {
  std::string scenario;
  std::optional<std::uint64_t> seed;
  std::string policy = "scripted";
  std::string backend = "template";
  std::optional<std::string> config;
  std::optional<std::string> cassette;
  std::optional<std::string> record;
  std::optional<long> max_steps;
  std::optional<std::string> out;
  int repeat = 1;
  std::uint64_t seed_base = 0;
  bool survey = false;
  bool require_success = false;
};

std::shared_ptr<llm::CompletionBackend> live_backend(const RunArgs& a) {
  if (a.backend == "http") {
    auto cfg = llm::load_backend_config(a.config);
    llm::RetryOptions retry;
    retry.retries = cfg.retries;
    retry.max_concurrency = cfg.max_concurrency;
    return std::make_shared<llm::ResilientBackend>(std::make_shared<llm::HttpChatBackend>(cfg), retry);
  }
  return std::make_shared<llm::TemplateBackend>();
}

struct OneRun {
  RunLog log;
  Outcome outcome;
};

OneRun run_once(const Scenario& base, const RunArgs& a, std::uint64_t seed, std::shared_ptr<llm::CompletionBackend> backend) {
  Scenario s = base;
  s.seed = seed;
  EngineOptions options;
  options.max_steps = a.max_steps;
  PolicyBinding policies = a.policy == "llm" ? uniform_policies(s, std::make_shared<LlmPolicy>(backend))
                                             : scripted_policies(s);
  Engine engine(s, std::move(policies), options);
  engine.run();
  if (a.survey) engine.administer_survey(*backend, default_survey_items());
  return {engine.log(), *engine.outcome()};
}

int cmd_run(const RunArgs& a) {
  auto scenario = load_checked(a.scenario);
  if (!scenario) return kScenarioError;
  if (a.cassette && a.record) {
    std::cerr << "error: --cassette and --record are exclusive\n";
    return kScenarioError;
  }

  std::shared_ptr<llm::CompletionBackend> backend;
  std::shared_ptr<llm::RecordingBackend> recorder;
  try {
    if (a.cassette) {
      backend = std::make_shared<llm::ReplayBackend>(llm::Cassette::load(*a.cassette));
    } else if (a.record) {
      recorder = std::make_shared<llm::RecordingBackend>(live_backend(a));
      backend = recorder;
    } else {
      backend = live_backend(a);
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }

  const bool batch = a.repeat > 1;
  if (batch && a.out) std::filesystem::create_directories(*a.out);
  if (batch) std::cout << "seed\toutcome\tsteps\trescued\tmessages\tconversations\n";
  int status = kOk;
  for (int i = 0; i < a.repeat; ++i) {
    const std::uint64_t seed = batch ? a.seed_base + static_cast<std::uint64_t>(i) : a.seed.value_or(scenario->seed);
    OneRun r;
    try {
      r = run_once(*scenario, a, seed, backend);
    } catch (const Error& e) {
      std::cerr << "seed " << seed << ": run failed: " << e.what() << "\n";
      status = kRunFailure;
      continue;
    }
    const auto& m = r.log.metrics;
    if (a.out) {
      const std::string path = batch ? *a.out + "/seed-" + std::to_string(seed) + ".log.json" : *a.out;
      save_log(r.log, path);
    }
    if (batch) {
      std::cout << seed << "\t" << to_string(r.outcome.kind) << "\t" << r.outcome.step << "\t" << m["entities_rescued"]
                << "\t" << m["messages_sent"] << "\t" << m["conversations"] << "\n";
    } else {
      std::cout << "outcome " << to_string(r.outcome.kind) << " at step " << r.outcome.step << "\n";
      if (!a.out) std::cout << m.dump(1) << "\n";
    }
    if (a.require_success && r.outcome.kind != Outcome::Kind::Success) status = kRunFailure;
  }
  if (recorder) recorder->cassette().save(*a.record);
  return status;
}

int cmd_validate(const std::string& path) {
  auto s = load_checked(path);
  if (!s) return kScenarioError;
  std::cout << path << ": ok\n";
  return kOk;
}

int cmd_genmap(const std::string& path, std::optional<std::uint64_t> seed, std::optional<std::string> out) {
  auto s = load_checked(path);
  if (!s) return kScenarioError;
  if (seed) s->seed = *seed;
  try {
    const auto text = world_to_json(build_world(*s)).dump(1) + "\n";
    if (out) {
      write_text(*out, text);
    } else {
      std::cout << text;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kScenarioError;
  }
  return kOk;
}

int cmd_metrics(const std::string& path) {
  try {
    std::cout << metrics_to_json(compute_metrics(load_log(path))).dump(1) << "\n";
  } catch (const Error& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kScenarioError;
  }
  return kOk;
}

int cmd_replay(const std::string& path) {
  RunLog log;
  try {
    log = load_log(path);
  } catch (const Error& e) {
    std::cerr << path << ": error: " << e.what() << "\n";
    return kScenarioError;
  }
  try {
    const auto r = verify_replay(log);
    std::cout << (r.ok ? "replay ok" : "replay mismatch") << ": " << r.deltas << " deltas";
    if (!r.message.empty()) std::cout << ", " << r.message;
    std::cout << "\n";
    return r.ok ? kOk : kRunFailure;
  } catch (const Error& e) {
    std::cerr << path << ": replay failed: " << e.what() << "\n";
    return kRunFailure;
  }
}

HttpApi* g_api = nullptr;

int cmd_serve(const std::string& host, int port, const ServiceConfig& config) {
  SessionManager manager(config);
  HttpApi api(manager);
  g_api = &api;
  std::signal(SIGINT, [](int) {
    if (g_api) g_api->stop();
  });
  std::cerr << "serving on " << host << ":" << port << "\n";
  const bool ok = api.serve(host, port);
  g_api = nullptr;
  return ok ? kOk : kRunFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Team simulation engine: scenarios, runs, logs and the studio service."};
  app.require_subcommand(1);

  std::string path;
  auto* validate = app.add_subcommand("validate", "check a scenario file");
  validate->add_option("scenario", path, "scenario file")->required();

  std::optional<std::uint64_t> map_seed;
  std::optional<std::string> map_out;
  auto* genmap = app.add_subcommand("genmap", "export the generated world snapshot");
  genmap->add_option("scenario", path, "scenario file")->required();
  genmap->add_option("--seed", map_seed, "override the scenario seed");
  genmap->add_option("--out", map_out, "output file (default stdout)");

  RunArgs run_args;
  auto* run = app.add_subcommand("run", "run a scenario");
  run->add_option("scenario", run_args.scenario, "scenario file")->required();
  run->add_option("--seed", run_args.seed, "override the scenario seed");
  run->add_option("--policy", run_args.policy, "decision policy")->check(CLI::IsMember({"scripted", "llm"}));
  run->add_option("--backend", run_args.backend, "live completion backend")->check(CLI::IsMember({"template", "http"}));
  run->add_option("--config", run_args.config, "backend config file (JSON)");
  run->add_option("--cassette", run_args.cassette, "replay completions from a cassette (strict)");
  run->add_option("--record", run_args.record, "record completions to a cassette");
  run->add_option("--max-steps", run_args.max_steps, "override max_steps")->check(CLI::PositiveNumber);
  run->add_option("--out", run_args.out, "run log file (a directory with --repeat)");
  run->add_option("--repeat", run_args.repeat, "number of runs")->check(CLI::PositiveNumber);
  run->add_option("--seed-base", run_args.seed_base, "first seed of a batch");
  run->add_flag("--survey", run_args.survey, "administer the post-run survey");
  run->add_flag("--require-success", run_args.require_success, "exit 2 unless every run succeeds");

  auto* metrics = app.add_subcommand("metrics", "summarize a run log");
  metrics->add_option("log", path, "run log file")->required();

  auto* replay = app.add_subcommand("replay", "verify snapshot + delta replay of a run log");
  replay->add_option("log", path, "run log file")->required();

  std::string host = "127.0.0.1";
  int port = 8080;
  ServiceConfig config;
  auto* serve = app.add_subcommand("serve", "run the studio service");
  serve->add_option("--host", host, "bind address");
  serve->add_option("--port", port, "port");
  serve->add_option("--max-sessions", config.max_sessions, "concurrent session limit");
  serve->add_option("--log-dir", config.log_dir, "directory for finished run logs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kScenarioError;
  }

  try {
    if (*validate) return cmd_validate(path);
    if (*genmap) return cmd_genmap(path, map_seed, map_out);
    if (*run) return cmd_run(run_args);
    if (*metrics) return cmd_metrics(path);
    if (*replay) return cmd_replay(path);
    if (*serve) return cmd_serve(host, port, config);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRunFailure;
  }
  return kOk;
}
