#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "teamsim/memory.hpp"

// The only boundary to external model backends. Nothing outside this module
// opens connections to a model service.
namespace teamsim::llm {

enum class Purpose { Decision, Speaker, Interview, Survey, Generator };

std::string to_string(Purpose p);
std::optional<Purpose> purpose_from_string(std::string_view s);

struct CompletionRequest {
  std::string system;
  std::string user;
  std::size_t max_reply_chars = 2000;
  double temperature = 0.0;
  Purpose tag = Purpose::Decision;
};

struct CompletionReply {
  std::string text;
  long latency_ms = 0;
  std::string backend;
};

// SHA-256 (hex) over the canonical JSON form of the request.
std::string request_digest(const CompletionRequest& req);

class CompletionBackend {
 public:
  virtual ~CompletionBackend() = default;
  virtual CompletionReply complete(const CompletionRequest& req) = 0;
  virtual std::string id() const = 0;
};

class EmbeddingBackend {
 public:
  virtual ~EmbeddingBackend() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) = 0;
};

// Reply = user text truncated to max_reply_chars.
class EchoBackend final : public CompletionBackend {
 public:
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return "echo"; }
};

class FunctionBackend final : public CompletionBackend {
 public:
  using Handler = std::function<std::string(const CompletionRequest&)>;
  explicit FunctionBackend(Handler handler, std::string id = "function") : handler_(std::move(handler)), id_(std::move(id)) {}
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return id_; }

 private:
  Handler handler_;
  std::string id_;
};

// Deterministic templated replies per purpose, for offline runs and tests:
//   interview  "Answer to '<question>' drawing on m<id>, m<id>."
//   survey     "5 Mid-scale rating drawing on m<id>, ..."
//   decision   one line of the prompt's [allowed actions] section, chosen by request digest
//   speaker    the first name listed under "candidates:"
//   generator  a scenario document built from counts in the prompt ("two searchers")
class TemplateBackend final : public CompletionBackend {
 public:
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return "template"; }
};

// Extracts memory ids cited as "[m<id>]" or "m<id>" tokens.
std::vector<long> cited_memory_ids(std::string_view text);

// Recorded replies keyed by (purpose, request digest). Versioned JSON file.
struct CassetteEntry {
  Purpose tag = Purpose::Decision;
  std::string digest;
  std::string reply;
  long latency_ms = 0;
  std::string backend;
  bool operator==(const CassetteEntry&) const = default;
};

inline constexpr int kCassetteFormatVersion = 1;

class Cassette {
 public:
  void append(CassetteEntry entry);
  const std::vector<CassetteEntry>& entries() const { return entries_; }

  nlohmann::json to_json() const;
  static Cassette from_json(const nlohmann::json& j);
  void save(const std::string& path) const;
  static Cassette load(const std::string& path);

 private:
  std::vector<CassetteEntry> entries_;
};

// Serves recorded replies in recording order per key. In strict mode a miss
// throws CassetteMiss; otherwise the fallback backend answers.
class ReplayBackend final : public CompletionBackend {
 public:
  explicit ReplayBackend(const Cassette& cassette, std::shared_ptr<CompletionBackend> fallback = nullptr);
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return "replay"; }
  std::size_t remaining() const;

 private:
  std::map<std::pair<Purpose, std::string>, std::deque<CassetteEntry>> queue_;
  std::shared_ptr<CompletionBackend> fallback_;
  mutable std::mutex mu_;
};

// Wraps a live backend and appends every interaction to a cassette.
class RecordingBackend final : public CompletionBackend {
 public:
  explicit RecordingBackend(std::shared_ptr<CompletionBackend> live) : live_(std::move(live)) {}
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return "recording:" + live_->id(); }
  Cassette cassette() const;

 private:
  std::shared_ptr<CompletionBackend> live_;
  Cassette cassette_;
  mutable std::mutex mu_;
};

struct RetryOptions {
  int retries = 2;
  std::chrono::milliseconds backoff{200};  // doubled per retry
  int breaker_threshold = 5;               // consecutive failures that open the circuit
  std::chrono::milliseconds breaker_cooldown{30'000};
  int max_concurrency = 4;
};

// Bounded retries with exponential backoff, a consecutive-failure circuit
// breaker, and a per-backend concurrency limit.
class ResilientBackend final : public CompletionBackend {
 public:
  using Clock = std::chrono::steady_clock;
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  ResilientBackend(std::shared_ptr<CompletionBackend> inner, RetryOptions options, Sleeper sleeper = {});
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return inner_->id(); }
  bool circuit_open() const;

 private:
  std::shared_ptr<CompletionBackend> inner_;
  RetryOptions options_;
  Sleeper sleeper_;
  std::counting_semaphore<1024> slots_;
  mutable std::mutex mu_;
  int consecutive_failures_ = 0;
  std::optional<Clock::time_point> open_until_;
};

struct BackendConfig {
  std::string endpoint;  // base URL of an OpenAI-compatible API, e.g. http://localhost:8000/v1
  std::string api_key;
  std::string model;
  std::string embedding_model;
  long timeout_ms = 30'000;
  int retries = 2;
  int max_concurrency = 4;
};

// Reads an optional JSON config file, then applies TEAMSIM_LLM_ENDPOINT,
// TEAMSIM_LLM_API_KEY, TEAMSIM_LLM_MODEL, TEAMSIM_LLM_EMBEDDING_MODEL and
// TEAMSIM_LLM_TIMEOUT_MS overrides.
BackendConfig load_backend_config(const std::optional<std::string>& path);

// Chat-completions over HTTP(S). Timeouts map to AdapterTimeout, transport or
// status failures to AdapterError.
class HttpChatBackend final : public CompletionBackend {
 public:
  explicit HttpChatBackend(BackendConfig config) : config_(std::move(config)) {}
  CompletionReply complete(const CompletionRequest& req) override;
  std::string id() const override { return "http:" + config_.model; }

 private:
  BackendConfig config_;
};

class HttpEmbeddingBackend final : public EmbeddingBackend {
 public:
  HttpEmbeddingBackend(BackendConfig config, std::size_t dimension)
      : config_(std::move(config)), dimension_(dimension) {}
  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) override;

 private:
  BackendConfig config_;
  std::size_t dimension_;
};

// Adapts an embedding backend to the memory store's embedder interface.
class BackendEmbedder final : public Embedder {
 public:
  explicit BackendEmbedder(std::shared_ptr<EmbeddingBackend> backend) : backend_(std::move(backend)) {}
  std::size_t dimension() const override { return backend_->dimension(); }
  std::vector<double> embed(std::string_view text) const override { return backend_->embed(text); }

 private:
  std::shared_ptr<EmbeddingBackend> backend_;
};

}  // namespace teamsim::llm
