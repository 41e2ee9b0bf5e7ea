#include "teamsim/llm.hpp"

#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>
#include <thread>

#include <openssl/evp.h>

#include <httplib.h>

#include "teamsim/error.hpp"

namespace teamsim::llm {

using json = nlohmann::json;

std::string to_string(Purpose p) {
  switch (p) {
    case Purpose::Decision:
      return "decision";
    case Purpose::Speaker:
      return "speaker";
    case Purpose::Interview:
      return "interview";
    case Purpose::Survey:
      return "survey";
    case Purpose::Generator:
      return "generator";
  }
  return "decision";
}

std::optional<Purpose> purpose_from_string(std::string_view s) {
  for (auto p : {Purpose::Decision, Purpose::Speaker, Purpose::Interview, Purpose::Survey, Purpose::Generator}) {
    if (to_string(p) == s) return p;
  }
  return std::nullopt;
}

namespace {

std::string sha256_hex(const std::string& data) {
  unsigned char out[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(data.data(), data.size(), out, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned i = 0; i < len; ++i) {
    s += hex[out[i] >> 4];
    s += hex[out[i] & 0xf];
  }
  return s;
}

std::string fixed6(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

}  // namespace

std::string request_digest(const CompletionRequest& req) {
  const json canonical = {{"max_reply_chars", req.max_reply_chars},
                          {"system", req.system},
                          {"tag", to_string(req.tag)},
                          {"temperature", fixed6(req.temperature)},
                          {"user", req.user}};
  return sha256_hex(canonical.dump());
}

CompletionReply EchoBackend::complete(const CompletionRequest& req) {
  return {req.user.substr(0, req.max_reply_chars), 0, id()};
}

CompletionReply FunctionBackend::complete(const CompletionRequest& req) {
  auto text = handler_(req);
  if (text.size() > req.max_reply_chars) text.resize(req.max_reply_chars);
  return {std::move(text), 0, id_};
}

std::vector<long> cited_memory_ids(std::string_view text) {
  static const std::regex re(R"(\bm(\d+)\b)");
  std::vector<long> ids;
  const std::string s(text);
  for (auto it = std::sregex_iterator(s.begin(), s.end(), re); it != std::sregex_iterator(); ++it) {
    const long id = std::stol((*it)[1].str());
    if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
  }
  return ids;
}

// ---------------------------------------------------------------------------
// Template backend

namespace {

std::vector<std::string> section_lines(const std::string& text, const std::string& header) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  bool inside = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.front() == '[') {
      inside = line == header;
      continue;
    }
    if (inside && !line.empty()) lines.push_back(line);
  }
  return lines;
}

// Ids of the "[m<id>] ..." lines of the prompt's memory listing.
std::string cite_list(const std::string& prompt) {
  std::string out;
  std::istringstream in(prompt);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("[m", 0) != 0) continue;
    const auto close = line.find(']');
    if (close == std::string::npos || close == 2) continue;
    const auto digits = line.substr(2, close - 2);
    if (!std::all_of(digits.begin(), digits.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
      continue;
    }
    if (!out.empty()) out += ", ";
    out += "m" + digits;
  }
  return out.empty() ? "no memories" : out;
}

std::string prompt_field(const std::string& prompt, const std::string& key) {
  std::istringstream in(prompt);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind(key, 0) == 0) return line.substr(key.size());
  }
  return {};
}

int number_word(const std::string& w) {
  static const std::vector<std::string> words{"zero", "one", "two", "three", "four", "five",
                                              "six",  "seven", "eight", "nine", "ten"};
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (w == words[i]) return static_cast<int>(i);
  }
  if (!w.empty() && std::all_of(w.begin(), w.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
    return std::stoi(w);
  }
  return -1;
}

bool is_victim_noun(const std::string& w) {
  return w == "missing" || w == "people" || w == "persons" || w == "individuals" || w == "victims" || w == "victim" ||
         w == "survivors" || w == "hikers";
}

std::string singular_title(std::string w) {
  if (w.size() > 1 && w.back() == 's') w.pop_back();
  if (!w.empty()) w[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(w[0])));
  return w;
}

std::string template_scenario(const std::string& prompt) {
  std::vector<std::string> words;
  std::string cur;
  for (char ch : prompt) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);

  int members = -1;
  int victims = -1;
  std::string role = "Searcher";
  for (std::size_t i = 0; i + 1 < words.size(); ++i) {
    const int n = number_word(words[i]);
    if (n < 0) continue;
    if (is_victim_noun(words[i + 1])) {
      if (victims < 0) victims = n;
    } else if (members < 0) {
      members = n;
      role = singular_title(words[i + 1]);
    }
  }
  if (members < 1) members = 2;
  if (victims < 0) victims = 1;

  std::ostringstream doc;
  doc << "format_version: 1\n"
      << "id: generated-draft\n"
      << "title: \"Generated draft\"\n"
      << "description: " << json(prompt).dump() << "\n"
      << "seed: 1\n"
      << "max_steps: 1000\n"
      << "start_region: Base\n"
      << "env_spec:\n  width: 24\n  height: 24\n  num_regions: 4\n  region_name_hints: [Base]\n"
      << "members:\n";
  for (int i = 1; i <= members; ++i) {
    doc << "  - name: " << role << "-" << i << "\n    role: " << role << "\n    skills: [carry]\n";
  }
  doc << "entities:\n";
  for (int i = 1; i <= victims; ++i) {
    doc << "  - name: missing-person-" << i << "\n    kind: victim\n    interactive: true\n";
  }
  doc << "goal:\n  statement: \"Bring every missing person back to Base.\"\n";
  if (victims > 0) {
    doc << "  predicate:\n    all_entities_in_region: {kind: victim, region: Base}\n";
  } else {
    doc << "  predicate: always_false\n";
  }
  return doc.str();
}

}  // namespace

CompletionReply TemplateBackend::complete(const CompletionRequest& req) {
  std::string text;
  switch (req.tag) {
    case Purpose::Interview:
      text = "Answer to '" + prompt_field(req.user, "question: ") + "' drawing on " + cite_list(req.user) + ".";
      break;
    case Purpose::Survey:
      text = "5 Mid-scale rating drawing on " + cite_list(req.user) + ".";
      break;
    case Purpose::Decision: {
      const auto options = section_lines(req.user, "[allowed actions]");
      if (options.empty()) {
        text = "IDLE 1";
      } else {
        const auto digest = request_digest(req);
        const auto pick = std::stoull(digest.substr(0, 12), nullptr, 16) % options.size();
        text = options[pick] + "\nRATIONALE: option " + std::to_string(pick + 1) + " of " +
               std::to_string(options.size());
      }
      break;
    }
    case Purpose::Speaker: {
      auto candidates = prompt_field(req.user, "candidates: ");
      text = candidates.substr(0, candidates.find(','));
      break;
    }
    case Purpose::Generator:
      text = template_scenario(req.user);
      break;
  }
  if (text.size() > req.max_reply_chars) text.resize(req.max_reply_chars);
  return {std::move(text), 0, id()};
}

// ---------------------------------------------------------------------------
// Cassettes

void Cassette::append(CassetteEntry entry) { entries_.push_back(std::move(entry)); }

json Cassette::to_json() const {
  json interactions = json::array();
  for (const auto& e : entries_) {
    interactions.push_back({{"tag", to_string(e.tag)},
                            {"digest", e.digest},
                            {"reply", e.reply},
                            {"latency_ms", e.latency_ms},
                            {"backend", e.backend}});
  }
  return {{"format_version", kCassetteFormatVersion}, {"interactions", interactions}};
}

Cassette Cassette::from_json(const json& j) {
  try {
    const int version = j.at("format_version").get<int>();
    if (version != kCassetteFormatVersion) {
      throw VersionMismatch("cassette format_version " + std::to_string(version) + " is not supported");
    }
    Cassette c;
    for (const auto& e : j.at("interactions")) {
      auto tag = purpose_from_string(e.at("tag").get<std::string>());
      if (!tag) throw SyntaxError("cassette entry has unknown tag");
      c.append({*tag, e.at("digest").get<std::string>(), e.at("reply").get<std::string>(),
                e.value("latency_ms", 0L), e.value("backend", std::string{})});
    }
    return c;
  } catch (const json::exception& e) {
    throw SyntaxError(std::string("malformed cassette: ") + e.what());
  }
}

void Cassette::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw AdapterError("cannot write cassette " + path);
  out << to_json().dump(1) << "\n";
}

Cassette Cassette::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFound("cannot open cassette " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SyntaxError(std::string("malformed cassette: ") + e.what());
  }
  return from_json(j);
}

ReplayBackend::ReplayBackend(const Cassette& cassette, std::shared_ptr<CompletionBackend> fallback)
    : fallback_(std::move(fallback)) {
  for (const auto& e : cassette.entries()) queue_[{e.tag, e.digest}].push_back(e);
}

CompletionReply ReplayBackend::complete(const CompletionRequest& req) {
  {
    std::lock_guard lock(mu_);
    auto it = queue_.find({req.tag, request_digest(req)});
    if (it != queue_.end() && !it->second.empty()) {
      auto entry = std::move(it->second.front());
      it->second.pop_front();
      return {std::move(entry.reply), 0, id()};
    }
  }
  if (fallback_) return fallback_->complete(req);
  throw CassetteMiss("no recorded reply for " + to_string(req.tag) + " request " + request_digest(req).substr(0, 16));
}

std::size_t ReplayBackend::remaining() const {
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (const auto& [key, q] : queue_) n += q.size();
  return n;
}

CompletionReply RecordingBackend::complete(const CompletionRequest& req) {
  auto reply = live_->complete(req);
  std::lock_guard lock(mu_);
  cassette_.append({req.tag, request_digest(req), reply.text, reply.latency_ms, reply.backend});
  return reply;
}

Cassette RecordingBackend::cassette() const {
  std::lock_guard lock(mu_);
  return cassette_;
}

// ---------------------------------------------------------------------------
// Retries and circuit breaking

ResilientBackend::ResilientBackend(std::shared_ptr<CompletionBackend> inner, RetryOptions options, Sleeper sleeper)
    : inner_(std::move(inner)),
      options_(options),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper([](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); })),
      slots_(std::max(1, options.max_concurrency)) {}

bool ResilientBackend::circuit_open() const {
  std::lock_guard lock(mu_);
  return open_until_ && Clock::now() < *open_until_;
}

CompletionReply ResilientBackend::complete(const CompletionRequest& req) {
  if (req.max_reply_chars < 1) throw AdapterError("max_reply_chars must be >= 1");
  if (circuit_open()) throw AdapterUnavailable("circuit open for backend " + inner_->id());

  slots_.acquire();
  struct Release {
    std::counting_semaphore<1024>& s;
    ~Release() { s.release(); }
  } release{slots_};

  auto delay = options_.backoff;
  for (int attempt = 0;; ++attempt) {
    try {
      const auto started = Clock::now();
      auto reply = inner_->complete(req);
      if (reply.latency_ms == 0) {
        reply.latency_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - started).count();
      }
      std::lock_guard lock(mu_);
      consecutive_failures_ = 0;
      open_until_.reset();
      return reply;
    } catch (const AdapterError&) {
      {
        std::lock_guard lock(mu_);
        if (++consecutive_failures_ >= options_.breaker_threshold) {
          open_until_ = Clock::now() + options_.breaker_cooldown;
        }
      }
      if (attempt >= options_.retries || circuit_open()) throw;
      sleeper_(delay);
      delay *= 2;
    }
  }
}

// ---------------------------------------------------------------------------
// HTTP transport

BackendConfig load_backend_config(const std::optional<std::string>& path) {
  BackendConfig cfg;
  if (path) {
    std::ifstream in(*path);
    if (!in) throw NotFound("cannot open backend config " + *path);
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw SyntaxError(std::string("malformed backend config: ") + e.what());
    }
    cfg.endpoint = j.value("endpoint", cfg.endpoint);
    cfg.api_key = j.value("api_key", cfg.api_key);
    cfg.model = j.value("model", cfg.model);
    cfg.embedding_model = j.value("embedding_model", cfg.embedding_model);
    cfg.timeout_ms = j.value("timeout_ms", cfg.timeout_ms);
    cfg.retries = j.value("retries", cfg.retries);
    cfg.max_concurrency = j.value("max_concurrency", cfg.max_concurrency);
  }
  auto env = [](const char* name) -> std::optional<std::string> {
    if (const char* v = std::getenv(name); v && *v) return std::string(v);
    return std::nullopt;
  };
  if (auto v = env("TEAMSIM_LLM_ENDPOINT")) cfg.endpoint = *v;
  if (auto v = env("TEAMSIM_LLM_API_KEY")) cfg.api_key = *v;
  if (auto v = env("TEAMSIM_LLM_MODEL")) cfg.model = *v;
  if (auto v = env("TEAMSIM_LLM_EMBEDDING_MODEL")) cfg.embedding_model = *v;
  if (auto v = env("TEAMSIM_LLM_TIMEOUT_MS")) cfg.timeout_ms = std::stol(*v);
  return cfg;
}

namespace {

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string prefix;  // path prefix, no trailing slash
};

Endpoint split_endpoint(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw AdapterError("endpoint must include a scheme: " + url);
  const auto path = url.find('/', scheme + 3);
  Endpoint e{url.substr(0, path), path == std::string::npos ? "" : url.substr(path)};
  while (!e.prefix.empty() && e.prefix.back() == '/') e.prefix.pop_back();
  return e;
}

json post_json(const BackendConfig& cfg, const std::string& route, const json& body) {
  if (cfg.endpoint.empty()) throw AdapterUnavailable("no model endpoint configured");
  const auto ep = split_endpoint(cfg.endpoint);
  httplib::Client client(ep.origin);
  const auto timeout = std::chrono::milliseconds(cfg.timeout_ms);
  client.set_connection_timeout(timeout);
  client.set_read_timeout(timeout);
  client.set_write_timeout(timeout);
  httplib::Headers headers;
  if (!cfg.api_key.empty()) headers.emplace("Authorization", "Bearer " + cfg.api_key);
  auto res = client.Post(ep.prefix + route, headers, body.dump(), "application/json");
  if (!res) {
    const auto err = res.error();
    if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read) {
      throw AdapterTimeout("model backend timed out: " + httplib::to_string(err));
    }
    throw AdapterError("model backend unreachable: " + httplib::to_string(err));
  }
  if (res->status != 200) throw AdapterError("model backend returned HTTP " + std::to_string(res->status));
  try {
    return json::parse(res->body);
  } catch (const json::parse_error& e) {
    throw AdapterError(std::string("model backend sent malformed JSON: ") + e.what());
  }
}

}  // namespace

CompletionReply HttpChatBackend::complete(const CompletionRequest& req) {
  const json body = {{"model", config_.model},
                     {"temperature", req.temperature},
                     {"max_tokens", std::max<std::size_t>(1, req.max_reply_chars / 3)},
                     {"messages", json::array({{{"role", "system"}, {"content", req.system}},
                                               {{"role", "user"}, {"content", req.user}}})}};
  const auto started = std::chrono::steady_clock::now();
  const json reply = post_json(config_, "/chat/completions", body);
  std::string text;
  try {
    text = reply.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const json::exception&) {
    throw AdapterError("model backend reply has no message content");
  }
  if (text.size() > req.max_reply_chars) text.resize(req.max_reply_chars);
  const auto latency =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - started).count();
  return {std::move(text), static_cast<long>(latency), id()};
}

std::vector<double> HttpEmbeddingBackend::embed(std::string_view text) {
  const json reply =
      post_json(config_, "/embeddings", {{"model", config_.embedding_model}, {"input", std::string(text)}});
  std::vector<double> v;
  try {
    v = reply.at("data").at(0).at("embedding").get<std::vector<double>>();
  } catch (const json::exception&) {
    throw AdapterError("embedding reply has no vector");
  }
  if (v.size() != dimension_) {
    throw AdapterError("embedding has dimension " + std::to_string(v.size()) + ", expected " +
                       std::to_string(dimension_));
  }
  return v;
}

}  // namespace teamsim::llm
