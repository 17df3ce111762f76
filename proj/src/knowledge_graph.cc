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

#include "boxq/knowledge_graph.h"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "boxq/random.h"

namespace boxq {
namespace {

constexpr std::string_view kSnapshotMagic = "BOXQ-SPLITS";
constexpr int kSnapshotVersion = 1;

std::uint64_t Fnv1a(std::uint64_t hash, std::string_view bytes) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

void CheckRelationName(const std::string& name) {
  if (name.find(kInverseMarker) != std::string::npos) {
    throw VocabularyError("relation name '" + name +
                          "' contains the reserved inverse marker '" +
                          std::string(kInverseMarker) + "'");
  }
}

std::string TripleKey(const NamedTriple& t) {
  return t[0] + '\t' + t[1] + '\t' + t[2];
}

}  // namespace

EntityId Vocabulary::AddEntity(const std::string& name) {
  auto [it, inserted] =
      entity_ids_.emplace(name, static_cast<EntityId>(entities_.size()));
  if (inserted) entities_.push_back(name);
  return it->second;
}

RelationId Vocabulary::AddRelation(const std::string& name) {
  auto [it, inserted] =
      relation_ids_.emplace(name, static_cast<RelationId>(relations_.size()));
  if (inserted) relations_.push_back(name);
  return it->second;
}

std::optional<EntityId> Vocabulary::FindEntity(const std::string& name) const {
  auto it = entity_ids_.find(name);
  if (it == entity_ids_.end()) return std::nullopt;
  return it->second;
}

std::optional<RelationId> Vocabulary::FindRelation(
    const std::string& name) const {
  auto it = relation_ids_.find(name);
  if (it == relation_ids_.end()) return std::nullopt;
  return it->second;
}

std::uint64_t Vocabulary::Hash() const {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (const auto& e : entities_) h = Fnv1a(Fnv1a(h, e), "\n");
  h = Fnv1a(h, "\x1e");
  for (const auto& r : relations_) h = Fnv1a(Fnv1a(h, r), "\n");
  return h;
}

void KnowledgeGraph::Index::Build(
    std::size_t num_entities,
    const std::vector<std::array<std::int32_t, 3>>& sorted) {
  entity_offsets.assign(num_entities + 1, 0);
  relations.clear();
  node_offsets.clear();
  nodes.clear();
  nodes.reserve(sorted.size());
  std::size_t i = 0;
  for (std::size_t e = 0; e < num_entities; ++e) {
    entity_offsets[e] = relations.size();
    while (i < sorted.size() && sorted[i][0] == static_cast<EntityId>(e)) {
      const RelationId r = sorted[i][1];
      relations.push_back(r);
      node_offsets.push_back(nodes.size());
      while (i < sorted.size() && sorted[i][0] == static_cast<EntityId>(e) &&
             sorted[i][1] == r) {
        nodes.push_back(sorted[i][2]);
        ++i;
      }
    }
  }
  entity_offsets[num_entities] = relations.size();
  node_offsets.push_back(nodes.size());
}

std::span<const EntityId> KnowledgeGraph::Index::Lookup(
    EntityId entity, RelationId relation) const {
  if (entity < 0 ||
      static_cast<std::size_t>(entity) + 1 >= entity_offsets.size()) {
    return {};
  }
  const auto begin = relations.begin() + entity_offsets[entity];
  const auto end = relations.begin() + entity_offsets[entity + 1];
  const auto it = std::lower_bound(begin, end, relation);
  if (it == end || *it != relation) return {};
  const std::size_t slot = it - relations.begin();
  return std::span<const EntityId>(nodes).subspan(
      node_offsets[slot], node_offsets[slot + 1] - node_offsets[slot]);
}

std::span<const RelationId> KnowledgeGraph::Index::Relations(
    EntityId entity) const {
  if (entity < 0 ||
      static_cast<std::size_t>(entity) + 1 >= entity_offsets.size()) {
    return {};
  }
  return std::span<const RelationId>(relations).subspan(
      entity_offsets[entity],
      entity_offsets[entity + 1] - entity_offsets[entity]);
}

KnowledgeGraph::KnowledgeGraph(std::shared_ptr<const Vocabulary> vocab,
                               std::vector<Triple> edges)
    : vocab_(std::move(vocab)), edges_(std::move(edges)) {
  const auto ne = static_cast<EntityId>(vocab_->num_entities());
  const auto nr = static_cast<RelationId>(vocab_->num_relations());
  for (const Triple& t : edges_) {
    if (t.head < 0 || t.head >= ne || t.tail < 0 || t.tail >= ne ||
        t.relation < 0 || t.relation >= nr) {
      throw VocabularyError("edge (" + std::to_string(t.head) + ", " +
                            std::to_string(t.relation) + ", " +
                            std::to_string(t.tail) +
                            ") references an id outside the vocabulary");
    }
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  std::vector<std::array<std::int32_t, 3>> rows;
  rows.reserve(edges_.size());
  for (const Triple& t : edges_) rows.push_back({t.head, t.relation, t.tail});
  out_.Build(ne, rows);
  for (auto& row : rows) std::swap(row[0], row[2]);
  std::sort(rows.begin(), rows.end());
  in_.Build(ne, rows);
}

std::span<const EntityId> KnowledgeGraph::Neighbors(EntityId entity,
                                                    RelationId relation) const {
  return out_.Lookup(entity, relation);
}

std::span<const EntityId> KnowledgeGraph::InNeighbors(
    EntityId entity, RelationId relation) const {
  return in_.Lookup(entity, relation);
}

std::span<const RelationId> KnowledgeGraph::OutRelations(
    EntityId entity) const {
  return out_.Relations(entity);
}

std::span<const RelationId> KnowledgeGraph::InRelations(EntityId entity) const {
  return in_.Relations(entity);
}

bool KnowledgeGraph::HasEdge(const Triple& t) const {
  return std::binary_search(edges_.begin(), edges_.end(), t);
}

RelationId KnowledgeGraph::Inverse(RelationId relation) const {
  const auto base = vocab_->base_relations();
  if (!base) throw ArgumentError("graph has no inverse relations");
  const auto b = static_cast<RelationId>(*base);
  return relation < b ? relation + b : relation - b;
}

std::vector<NamedTriple> ReadTripleFile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open triple file " + path.string());
  std::vector<NamedTriple> triples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    NamedTriple t;
    std::size_t field = 0;
    std::size_t start = 0;
    bool ok = !line.empty();
    while (ok) {
      const std::size_t tab = line.find('\t', start);
      if (field >= 3) {
        ok = false;
        break;
      }
      t[field++] = line.substr(
          start, tab == std::string::npos ? std::string::npos : tab - start);
      if (tab == std::string::npos) break;
      start = tab + 1;
    }
    ok = ok && field == 3;
    for (std::size_t f = 0; ok && f < 3; ++f) ok = !t[f].empty();
    if (ok && t[0][0] == '#') ok = false;
    if (!ok) {
      throw ParseError(path.string() + ":" + std::to_string(line_no) +
                       ": expected three non-empty tab-separated fields");
    }
    triples.push_back(std::move(t));
  }
  return triples;
}

void WriteTripleFile(const std::filesystem::path& path,
                     std::span<const NamedTriple> triples) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : triples)
    out << t[0] << '\t' << t[1] << '\t' << t[2] << '\n';
}

KnowledgeGraph LoadTriples(const std::filesystem::path& path,
                           std::shared_ptr<Vocabulary> vocab, bool frozen) {
  if (!vocab) {
    vocab = std::make_shared<Vocabulary>();
    frozen = false;
  }
  std::vector<Triple> edges;
  for (const NamedTriple& t : ReadTripleFile(path)) {
    CheckRelationName(t[1]);
    if (frozen) {
      auto h = vocab->FindEntity(t[0]);
      auto r = vocab->FindRelation(t[1]);
      auto tl = vocab->FindEntity(t[2]);
      if (!h || !r || !tl) {
        throw VocabularyError(path.string() + ": triple '" + TripleKey(t) +
                              "' uses a name outside the frozen vocabulary");
      }
      edges.push_back({*h, *r, *tl});
    } else {
      const EntityId h = vocab->AddEntity(t[0]);
      const RelationId r = vocab->AddRelation(t[1]);
      const EntityId tl = vocab->AddEntity(t[2]);
      edges.push_back({h, r, tl});
    }
  }
  return KnowledgeGraph(std::move(vocab), std::move(edges));
}

namespace {

std::shared_ptr<Vocabulary> AugmentVocabulary(const Vocabulary& base) {
  if (base.base_relations()) {
    throw ArgumentError("graph is already augmented with inverse relations");
  }
  for (std::size_t r = 0; r < base.num_relations(); ++r) {
    if (base.RelationName(r).find(kInverseMarker) != std::string::npos) {
      throw ArgumentError("relation '" + base.RelationName(r) +
                          "' already names an inverse; refusing to re-augment");
    }
  }
  auto vocab = std::make_shared<Vocabulary>(base);
  const std::size_t n = base.num_relations();
  for (std::size_t r = 0; r < n; ++r) {
    vocab->AddRelation(base.RelationName(r) + std::string(kInverseMarker));
  }
  vocab->set_base_relations(n);
  return vocab;
}

std::vector<Triple> WithInverses(std::span<const Triple> edges,
                                 RelationId base) {
  std::vector<Triple> out(edges.begin(), edges.end());
  out.reserve(edges.size() * 2);
  for (const Triple& t : edges)
    out.push_back({t.tail, t.relation + base, t.head});
  return out;
}

}  // namespace

KnowledgeGraph AugmentInverses(const KnowledgeGraph& kg) {
  auto vocab = AugmentVocabulary(kg.vocab());
  const auto base = static_cast<RelationId>(kg.num_relations());
  return KnowledgeGraph(std::move(vocab), WithInverses(kg.edges(), base));
}

GraphSplits BuildSplitGraphs(std::span<const NamedTriple> train,
                             std::span<const NamedTriple> valid,
                             std::span<const NamedTriple> test,
                             const SplitOptions& options) {
  Vocabulary vocab;
  auto intern = [&vocab](std::span<const NamedTriple> triples) {
    std::vector<Triple> edges;
    edges.reserve(triples.size());
    for (const NamedTriple& t : triples) {
      CheckRelationName(t[1]);
      const EntityId h = vocab.AddEntity(t[0]);
      const RelationId r = vocab.AddRelation(t[1]);
      const EntityId tl = vocab.AddEntity(t[2]);
      edges.push_back({h, r, tl});
    }
    return edges;
  };
  std::vector<Triple> train_edges = intern(train);
  const std::size_t train_entities = vocab.num_entities();
  std::vector<Triple> valid_edges = intern(valid);
  std::vector<Triple> test_edges = intern(test);
  if (options.require_train_coverage &&
      vocab.num_entities() != train_entities) {
    throw VocabularyError(
        "entity '" + vocab.EntityName(static_cast<EntityId>(train_entities)) +
        "' appears in the validation/test triples but not in training");
  }

  auto full = AugmentVocabulary(vocab);
  const auto base = static_cast<RelationId>(vocab.num_relations());

  auto merged = [](std::vector<Triple> a, const std::vector<Triple>& b) {
    a.insert(a.end(), b.begin(), b.end());
    std::sort(a.begin(), a.end());
    a.erase(std::unique(a.begin(), a.end()), a.end());
    return a;
  };
  std::vector<Triple> train_set = merged(std::move(train_edges), {});
  std::vector<Triple> valid_set = merged(train_set, valid_edges);
  std::vector<Triple> test_set = merged(valid_set, test_edges);

  GraphSplits splits;
  splits.stats.entities = vocab.num_entities();
  splits.stats.relations = vocab.num_relations();
  splits.stats.train_edges = train_set.size();
  splits.stats.valid_edges = valid_set.size() - train_set.size();
  splits.stats.test_edges = test_set.size() - valid_set.size();
  splits.train = KnowledgeGraph(full, WithInverses(train_set, base));
  splits.valid = KnowledgeGraph(full, WithInverses(valid_set, base));
  splits.test = KnowledgeGraph(full, WithInverses(test_set, base));
  return splits;
}

GraphSplits BuildSplitGraphs(const std::filesystem::path& train_file,
                             const std::filesystem::path& valid_file,
                             const std::filesystem::path& test_file,
                             const SplitOptions& options) {
  const auto train = ReadTripleFile(train_file);
  const auto valid = ReadTripleFile(valid_file);
  const auto test = ReadTripleFile(test_file);
  return BuildSplitGraphs(train, valid, test, options);
}

TripleSplit Resplit(std::span<const NamedTriple> pooled, std::size_t valid_size,
                    std::size_t test_size, std::uint64_t seed) {
  std::vector<NamedTriple> all;
  std::unordered_set<std::string> seen;
  for (const NamedTriple& t : pooled) {
    if (seen.insert(TripleKey(t)).second) all.push_back(t);
  }
  if (valid_size + test_size > 0 && valid_size + test_size >= all.size()) {
    throw ArgumentError("requested " + std::to_string(valid_size) + " + " +
                        std::to_string(test_size) +
                        " held-out triples from a pool of " +
                        std::to_string(all.size()));
  }
  std::vector<std::size_t> order(all.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  Rng rng(seed);
  // Partial Fisher-Yates: the first valid_size + test_size slots are a
  // uniform sample without replacement.
  const std::size_t held = valid_size + test_size;
  for (std::size_t i = 0; i < held; ++i) {
    std::swap(order[i], order[i + rng.Index(order.size() - i)]);
  }
  std::vector<int> role(all.size(), 0);  // 0 train, 1 valid, 2 test
  for (std::size_t i = 0; i < valid_size; ++i) role[order[i]] = 1;
  for (std::size_t i = valid_size; i < held; ++i) role[order[i]] = 2;

  TripleSplit split;
  std::unordered_set<std::string> train_entities;
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (role[i] != 0) continue;
    split.train.push_back(all[i]);
    train_entities.insert(all[i][0]);
    train_entities.insert(all[i][2]);
  }
  for (std::size_t i = 0; i < all.size(); ++i) {
    if (role[i] == 0) continue;
    if (!train_entities.contains(all[i][0]) ||
        !train_entities.contains(all[i][2])) {
      continue;
    }
    (role[i] == 1 ? split.valid : split.test).push_back(all[i]);
  }
  return split;
}

TripleSplit PrepareNell(std::span<const std::filesystem::path> files,
                        std::size_t valid_size, std::size_t test_size,
                        std::uint64_t seed) {
  std::vector<NamedTriple> pooled;
  for (const auto& f : files) {
    auto part = ReadTripleFile(f);
    pooled.insert(pooled.end(), part.begin(), part.end());
  }
  if (pooled.empty()) throw ArgumentError("no triples to re-split");
  return Resplit(pooled, valid_size, test_size, seed);
}

void WriteSplits(std::ostream& out, const GraphSplits& splits) {
  const Vocabulary& v = splits.train.vocab();
  out << kSnapshotMagic << ' ' << kSnapshotVersion << '\n';
  out << "entities " << v.num_entities() << '\n';
  for (std::size_t e = 0; e < v.num_entities(); ++e) {
    out << v.EntityName(static_cast<EntityId>(e)) << '\n';
  }
  out << "relations " << v.num_relations() << " base "
      << v.base_relations().value_or(0) << '\n';
  for (std::size_t r = 0; r < v.num_relations(); ++r) {
    out << v.RelationName(static_cast<RelationId>(r)) << '\n';
  }
  const SplitStats& s = splits.stats;
  out << "stats " << s.entities << ' ' << s.relations << ' ' << s.train_edges
      << ' ' << s.valid_edges << ' ' << s.test_edges << '\n';
  auto edges = [&out](const char* name, const KnowledgeGraph& kg) {
    out << name << ' ' << kg.num_edges() << '\n';
    for (const Triple& t : kg.edges()) {
      out << t.head << ' ' << t.relation << ' ' << t.tail << '\n';
    }
  };
  edges("train", splits.train);
  edges("valid", splits.valid);
  edges("test", splits.test);
}

GraphSplits ReadSplits(std::istream& in) {
  auto fail = [](const std::string& what) -> ParseError {
    return ParseError("split snapshot: " + what);
  };
  std::string line;
  if (!std::getline(in, line)) throw fail("empty input");
  {
    std::istringstream head(line);
    std::string magic;
    int version = 0;
    head >> magic >> version;
    if (magic != kSnapshotMagic) throw fail("bad magic header");
    if (version != kSnapshotVersion) {
      throw fail("unsupported version " + std::to_string(version));
    }
  }
  auto header = [&](const std::string& key, std::size_t& count,
                    std::size_t* extra = nullptr) {
    if (!std::getline(in, line)) throw fail("missing '" + key + "' section");
    std::istringstream s(line);
    std::string k;
    s >> k >> count;
    if (k != key || !s) throw fail("expected '" + key + "' section");
    if (extra) {
      std::string b;
      s >> b >> *extra;
      if (b != "base" || !s) throw fail("expected relation base count");
    }
  };
  auto vocab = std::make_shared<Vocabulary>();
  std::size_t n = 0;
  header("entities", n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw fail("truncated entity list");
    vocab->AddEntity(line);
  }
  std::size_t base = 0;
  header("relations", n, &base);
  for (std::size_t i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw fail("truncated relation list");
    vocab->AddRelation(line);
  }
  if (base > 0) vocab->set_base_relations(base);
  GraphSplits splits;
  {
    if (!std::getline(in, line)) throw fail("missing stats");
    std::istringstream s(line);
    std::string k;
    SplitStats& st = splits.stats;
    s >> k >> st.entities >> st.relations >> st.train_edges >> st.valid_edges >>
        st.test_edges;
    if (k != "stats" || !s) throw fail("malformed stats line");
  }
  auto edges = [&](const std::string& key) {
    std::size_t m = 0;
    header(key, m);
    std::vector<Triple> out;
    out.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
      Triple t;
      if (!(in >> t.head >> t.relation >> t.tail)) {
        throw fail("truncated '" + key + "' edges");
      }
      out.push_back(t);
    }
    std::getline(in, line);  // rest of last edge line
    return KnowledgeGraph(vocab, std::move(out));
  };
  splits.train = edges("train");
  splits.valid = edges("valid");
  splits.test = edges("test");
  return splits;
}

void SaveSplits(const std::filesystem::path& path, const GraphSplits& splits) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  WriteSplits(out, splits);
}

GraphSplits LoadSplits(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open split snapshot " + path.string());
  return ReadSplits(in);
}

}  // namespace boxq
