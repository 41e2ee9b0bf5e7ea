#include "teamsim/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace teamsim {

std::string to_string(MemoryKind k) {
  switch (k) {
    case MemoryKind::Seed:
      return "seed";
    case MemoryKind::Observation:
      return "observation";
    case MemoryKind::Outcome:
      return "outcome";
    case MemoryKind::Message:
      return "message";
    case MemoryKind::Reflection:
      return "reflection";
  }
  return "observation";
}

std::optional<MemoryKind> memory_kind_from_string(std::string_view s) {
  for (auto k : {MemoryKind::Seed, MemoryKind::Observation, MemoryKind::Outcome, MemoryKind::Message,
                 MemoryKind::Reflection}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

std::vector<double> HashEmbedder::embed(std::string_view text) const {
  std::vector<double> v(dimension_, 0.0);
  for (const auto& token : tokenize(text)) {
    std::uint64_t h = 1469598103934665603ULL;
    for (char c : token) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ULL;
    }
    v[h % dimension_] += 1.0;
  }
  double norm = 0.0;
  for (double x : v) norm += x * x;
  if (norm > 0.0) {
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
  }
  return v;
}

double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

void FlatIndex::add(long id, std::vector<double> vector) {
  ids_.push_back(id);
  vectors_.push_back(std::move(vector));
}

std::vector<ScoredId> FlatIndex::top_k(const std::vector<double>& query, std::size_t k) const {
  std::vector<ScoredId> scored;
  scored.reserve(ids_.size());
  for (std::size_t i = 0; i < ids_.size(); ++i) scored.push_back({ids_[i], cosine_similarity(query, vectors_[i])});
  k = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + static_cast<long>(k), scored.end(),
                    [](const ScoredId& a, const ScoredId& b) {
                      // scores equal up to rounding count as ties
                      const auto qa = std::llround(a.score * 1e12);
                      const auto qb = std::llround(b.score * 1e12);
                      if (qa != qb) return qa > qb;
                      return a.id < b.id;
                    });
  scored.resize(k);
  return scored;
}

MemoryStore::MemoryStore(std::shared_ptr<const Embedder> embedder)
    : embedder_(std::move(embedder)), index_(std::make_unique<FlatIndex>()) {}

MemoryStore::MemoryStore(const MemoryStore& other)
    : embedder_(other.embedder_), index_(other.index_->clone()), records_(other.records_), next_id_(other.next_id_) {}

MemoryStore& MemoryStore::operator=(const MemoryStore& other) {
  if (this != &other) {
    embedder_ = other.embedder_;
    index_ = other.index_->clone();
    records_ = other.records_;
    next_id_ = other.next_id_;
  }
  return *this;
}

const MemoryRecord& MemoryStore::add(long step, std::string text, MemoryKind kind) {
  MemoryRecord r;
  r.step = step;
  r.text = std::move(text);
  r.kind = kind;
  return add(std::move(r));
}

const MemoryRecord& MemoryStore::add(MemoryRecord record) {
  if (record.embedding.empty()) record.embedding = embedder_->embed(record.text);
  if (record.embedding.size() != embedder_->dimension()) {
    throw std::invalid_argument("memory embedding has dimension " + std::to_string(record.embedding.size()) +
                                ", store expects " + std::to_string(embedder_->dimension()));
  }
  record.id = next_id_++;
  index_->add(record.id, record.embedding);
  records_.push_back(std::move(record));
  return records_.back();
}

std::vector<ScoredId> MemoryStore::retrieve_scored(std::string_view query, std::size_t k) const {
  if (k == 0 || records_.empty()) return {};
  return index_->top_k(embedder_->embed(query), k);
}

std::vector<MemoryRecord> MemoryStore::retrieve(std::string_view query, std::size_t k) const {
  std::vector<MemoryRecord> out;
  for (const auto& s : retrieve_scored(query, k)) out.push_back(*find(s.id));
  return out;
}

const MemoryRecord* MemoryStore::find(long id) const {
  // ids are dense and ordered, so the position equals the id.
  if (id < 0 || id >= static_cast<long>(records_.size())) return nullptr;
  return &records_[static_cast<std::size_t>(id)];
}

}  // namespace teamsim
