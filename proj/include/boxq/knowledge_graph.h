/*
 * Copyright 2026 The boxq Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef BOXQ_KNOWLEDGE_GRAPH_H_
#define BOXQ_KNOWLEDGE_GRAPH_H_

#include <array>
#include <compare>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "boxq/types.h"

namespace boxq {

// Suffix appended to a relation name to name its inverse. Input relation
// names may not contain it.
inline constexpr std::string_view kInverseMarker = "^-1";

struct Triple {
  EntityId head = 0;
  RelationId relation = 0;
  EntityId tail = 0;

  friend auto operator<=>(const Triple&, const Triple&) = default;
};

using NamedTriple = std::array<std::string, 3>;

// Dense id <-> name maps for entities and relations. Ids are assigned in
// first-appearance order.
class Vocabulary {
 public:
  EntityId AddEntity(const std::string& name);
  RelationId AddRelation(const std::string& name);

  std::optional<EntityId> FindEntity(const std::string& name) const;
  std::optional<RelationId> FindRelation(const std::string& name) const;

  const std::string& EntityName(EntityId id) const { return entities_.at(id); }
  const std::string& RelationName(RelationId id) const {
    return relations_.at(id);
  }

  std::size_t num_entities() const { return entities_.size(); }
  std::size_t num_relations() const { return relations_.size(); }

  // Number of relations before inverse augmentation; relation r and
  // r + base are inverses of each other. Empty when not augmented.
  std::optional<std::size_t> base_relations() const { return base_relations_; }
  void set_base_relations(std::size_t n) { base_relations_ = n; }

  // FNV-1a over all names, used to pair checkpoints with graphs.
  std::uint64_t Hash() const;

  friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
    return a.entities_ == b.entities_ && a.relations_ == b.relations_ &&
           a.base_relations_ == b.base_relations_;
  }

 private:
  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, EntityId> entity_ids_;
  std::unordered_map<std::string, RelationId> relation_ids_;
  std::optional<std::size_t> base_relations_;
};

// Immutable directed labelled multigraph-free edge set with CSR adjacency in
// both directions.
class KnowledgeGraph {
 public:
  KnowledgeGraph() : KnowledgeGraph(std::make_shared<Vocabulary>(), {}) {}
  // Deduplicates `edges`; throws VocabularyError on ids outside `vocab`.
  KnowledgeGraph(std::shared_ptr<const Vocabulary> vocab,
                 std::vector<Triple> edges);

  const Vocabulary& vocab() const { return *vocab_; }
  const std::shared_ptr<const Vocabulary>& shared_vocab() const {
    return vocab_;
  }
  std::size_t num_entities() const { return vocab_->num_entities(); }
  std::size_t num_relations() const { return vocab_->num_relations(); }

  // Sorted by (head, relation, tail), no duplicates.
  std::span<const Triple> edges() const { return edges_; }
  std::size_t num_edges() const { return edges_.size(); }

  // Tails of (entity, relation, *), sorted. Empty for unknown pairs.
  std::span<const EntityId> Neighbors(EntityId entity,
                                      RelationId relation) const;
  // Heads of (*, relation, entity), sorted.
  std::span<const EntityId> InNeighbors(EntityId entity,
                                        RelationId relation) const;
  // Distinct relations leaving / entering an entity, sorted.
  std::span<const RelationId> OutRelations(EntityId entity) const;
  std::span<const RelationId> InRelations(EntityId entity) const;

  bool HasEdge(const Triple& t) const;

  bool augmented() const { return vocab_->base_relations().has_value(); }
  // Inverse relation id; requires an augmented vocabulary.
  RelationId Inverse(RelationId relation) const;

 private:
  struct Index {
    std::vector<std::size_t> entity_offsets;  // size |V|+1, into relations
    std::vector<RelationId> relations;
    std::vector<std::size_t> node_offsets;  // size relations+1, into nodes
    std::vector<EntityId> nodes;

    void Build(std::size_t num_entities,
               const std::vector<std::array<std::int32_t, 3>>& sorted);
    std::span<const EntityId> Lookup(EntityId entity,
                                     RelationId relation) const;
    std::span<const RelationId> Relations(EntityId entity) const;
  };

  std::shared_ptr<const Vocabulary> vocab_;
  std::vector<Triple> edges_;
  Index out_;
  Index in_;
};

// Nested snapshots train <= valid <= test over one shared vocabulary.
struct SplitStats {
  std::size_t entities = 0;
  std::size_t relations = 0;  // before inverse augmentation
  std::size_t train_edges = 0;
  std::size_t valid_edges = 0;  // edges added by the validation file
  std::size_t test_edges = 0;   // edges added by the test file

  std::size_t total_edges() const {
    return train_edges + valid_edges + test_edges;
  }
  friend bool operator==(const SplitStats&, const SplitStats&) = default;
};

struct GraphSplits {
  KnowledgeGraph train;
  KnowledgeGraph valid;
  KnowledgeGraph test;
  SplitStats stats;
};

// Reads a tab-separated triple file. Blank lines, comment lines and lines
// with a field count other than three raise ParseError with the line number.
std::vector<NamedTriple> ReadTripleFile(const std::filesystem::path& path);
void WriteTripleFile(const std::filesystem::path& path,
                     std::span<const NamedTriple> triples);

// Loads a triple file into a graph. When `vocab` is given it is extended in
// place, or, if `frozen`, only used for lookups (unknown names throw
// VocabularyError).
KnowledgeGraph LoadTriples(const std::filesystem::path& path,
                           std::shared_ptr<Vocabulary> vocab = nullptr,
                           bool frozen = false);

// Adds (t, r^-1, h) for every (h, r, t). Throws ArgumentError if the graph
// already carries inverse relations.
KnowledgeGraph AugmentInverses(const KnowledgeGraph& kg);

struct SplitOptions {
  // Reject entities that never occur in the training file.
  bool require_train_coverage = false;
};

GraphSplits BuildSplitGraphs(std::span<const NamedTriple> train,
                             std::span<const NamedTriple> valid,
                             std::span<const NamedTriple> test,
                             const SplitOptions& options = {});
GraphSplits BuildSplitGraphs(const std::filesystem::path& train_file,
                             const std::filesystem::path& valid_file,
                             const std::filesystem::path& test_file,
                             const SplitOptions& options = {});

struct TripleSplit {
  std::vector<NamedTriple> train;
  std::vector<NamedTriple> valid;
  std::vector<NamedTriple> test;
};

// Pools all triples, samples validation and test triples without
// replacement, then drops held-out triples touching an entity that no longer
// occurs in the training triples.
TripleSplit Resplit(std::span<const NamedTriple> pooled, std::size_t valid_size,
                    std::size_t test_size, std::uint64_t seed);
TripleSplit PrepareNell(std::span<const std::filesystem::path> files,
                        std::size_t valid_size, std::size_t test_size,
                        std::uint64_t seed);

// Versioned line-based snapshot of vocabulary, all three edge sets and the
// split statistics.
void WriteSplits(std::ostream& out, const GraphSplits& splits);
GraphSplits ReadSplits(std::istream& in);
void SaveSplits(const std::filesystem::path& path, const GraphSplits& splits);
GraphSplits LoadSplits(const std::filesystem::path& path);

}  // namespace boxq

#endif  // BOXQ_KNOWLEDGE_GRAPH_H_
