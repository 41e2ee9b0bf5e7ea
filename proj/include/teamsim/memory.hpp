#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace teamsim {

enum class MemoryKind { Seed, Observation, Outcome, Message, Reflection };

std::string to_string(MemoryKind k);
std::optional<MemoryKind> memory_kind_from_string(std::string_view s);

struct MemoryRecord {
  long id = -1;
  long step = 0;
  std::string text;
  MemoryKind kind = MemoryKind::Observation;
  std::vector<double> embedding;
  bool operator==(const MemoryRecord&) const = default;
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  virtual std::size_t dimension() const = 0;
  virtual std::vector<double> embed(std::string_view text) const = 0;
};

// Bag of lower-cased alphanumeric tokens hashed (FNV-1a) into a fixed number
// of buckets, then L2-normalised. Deterministic and dependency-free.
class HashEmbedder final : public Embedder {
 public:
  explicit HashEmbedder(std::size_t dimension = 64) : dimension_(dimension) {}
  std::size_t dimension() const override { return dimension_; }
  std::vector<double> embed(std::string_view text) const override;

 private:
  std::size_t dimension_;
};

std::vector<std::string> tokenize(std::string_view text);

// 0 when either vector has zero norm.
double cosine_similarity(const std::vector<double>& a, const std::vector<double>& b);

struct ScoredId {
  long id = -1;
  double score = 0.0;
};

class VectorIndex {
 public:
  virtual ~VectorIndex() = default;
  virtual void add(long id, std::vector<double> vector) = 0;
  // Highest cosine first; scores equal to 1e-12 by ascending id.
  virtual std::vector<ScoredId> top_k(const std::vector<double>& query, std::size_t k) const = 0;
  virtual std::unique_ptr<VectorIndex> clone() const = 0;
};

// Exhaustive scan. Exact and deterministic at scenario scale.
class FlatIndex final : public VectorIndex {
 public:
  void add(long id, std::vector<double> vector) override;
  std::vector<ScoredId> top_k(const std::vector<double>& query, std::size_t k) const override;
  std::unique_ptr<VectorIndex> clone() const override { return std::make_unique<FlatIndex>(*this); }

 private:
  std::vector<long> ids_;
  std::vector<std::vector<double>> vectors_;
};

// Append-only record store. Ids are assigned by the store and strictly increase.
class MemoryStore {
 public:
  explicit MemoryStore(std::shared_ptr<const Embedder> embedder = std::make_shared<HashEmbedder>());
  MemoryStore(const MemoryStore& other);
  MemoryStore& operator=(const MemoryStore& other);
  MemoryStore(MemoryStore&&) noexcept = default;
  MemoryStore& operator=(MemoryStore&&) noexcept = default;

  // Embeds `text` with the store's embedder.
  const MemoryRecord& add(long step, std::string text, MemoryKind kind);
  // Takes a pre-built record; an empty embedding is filled in. Throws
  // std::invalid_argument on a dimension mismatch.
  const MemoryRecord& add(MemoryRecord record);

  std::vector<MemoryRecord> retrieve(std::string_view query, std::size_t k) const;
  std::vector<ScoredId> retrieve_scored(std::string_view query, std::size_t k) const;

  const std::vector<MemoryRecord>& records() const { return records_; }
  const MemoryRecord* find(long id) const;
  std::size_t size() const { return records_.size(); }
  std::size_t dimension() const { return embedder_->dimension(); }
  const Embedder& embedder() const { return *embedder_; }

 private:
  std::shared_ptr<const Embedder> embedder_;
  std::unique_ptr<VectorIndex> index_;
  std::vector<MemoryRecord> records_;
  long next_id_ = 0;
};

}  // namespace teamsim
