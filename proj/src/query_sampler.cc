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

#include "boxq/query_sampler.h"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <functional>
#include <istream>
#include <iterator>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

namespace boxq {
namespace {

using EntitySet = std::vector<EntityId>;

EntitySet Project(const KnowledgeGraph& kg, const EntitySet& from,
                  RelationId r) {
  EntitySet out;
  for (EntityId e : from) {
    const auto next = kg.Neighbors(e, r);
    out.insert(out.end(), next.begin(), next.end());
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

EntitySet Intersect(const EntitySet& a, const EntitySet& b) {
  EntitySet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                        std::back_inserter(out));
  return out;
}

EntitySet Unite(const EntitySet& a, const EntitySet& b) {
  EntitySet out;
  std::set_union(a.begin(), a.end(), b.begin(), b.end(),
                 std::back_inserter(out));
  return out;
}

bool HasExtra(const EntitySet& larger, const EntitySet& smaller) {
  for (EntityId e : larger) {
    if (!std::binary_search(smaller.begin(), smaller.end(), e)) return true;
  }
  return false;
}

// Canonical text for the sub-DAG ending at `id`.
std::string Signature(const ComputationGraph& g, int id) {
  const Node* node = g.FindNode(id);
  if (node->kind == NodeKind::kAnchor) {
    return "a" + std::to_string(g.AnchorEntity(*node));
  }
  std::vector<std::string> inputs;
  for (const Edge* e : g.InEdges(id)) {
    inputs.push_back(e->op == EdgeOp::kUnion
                         ? "u(" + Signature(g, e->src) + ")"
                         : "p" + std::to_string(g.EdgeRelation(*e)) + "(" +
                               Signature(g, e->src) + ")");
  }
  std::sort(inputs.begin(), inputs.end());
  std::string out = "[";
  for (const auto& s : inputs) out += s + ";";
  return out + "]";
}

}  // namespace

std::vector<EntityId> AnswerExact(const KnowledgeGraph& kg,
                                  const ComputationGraph& g) {
  std::map<int, EntitySet> sets;
  for (int id : g.TopologicalOrder()) {
    const Node& node = *g.FindNode(id);
    const auto in = g.InEdges(id);
    if (in.empty()) {
      const EntityId e = g.AnchorEntity(node);
      sets[id] = {e};
      continue;
    }
    EntitySet acc;
    bool first = true;
    for (const Edge* e : in) {
      if (e->op == EdgeOp::kUnion) {
        acc = Unite(acc, sets.at(e->src));
      } else {
        EntitySet projected = Project(kg, sets.at(e->src), g.EdgeRelation(*e));
        acc = first ? std::move(projected) : Intersect(acc, projected);
      }
      first = false;
    }
    sets[id] = std::move(acc);
  }
  const int target = g.Target();
  if (target < 0) throw ContractViolation("query graph has no target");
  return sets.at(target);
}

std::vector<std::string> DegeneracyViolations(const KnowledgeGraph& kg,
                                              const ComputationGraph& g) {
  std::vector<std::string> hits;
  for (const Edge& first : g.edges) {
    if (first.op != EdgeOp::kProjection) continue;
    const RelationId back = kg.Inverse(g.EdgeRelation(first));
    std::vector<int> frontier = {first.dst};
    std::set<int> seen;
    while (!frontier.empty()) {
      const int at = frontier.back();
      frontier.pop_back();
      if (!seen.insert(at).second) continue;
      for (const Edge* next : g.OutEdges(at)) {
        if (next->op == EdgeOp::kUnion) {
          frontier.push_back(next->dst);
        } else if (g.EdgeRelation(*next) == back) {
          hits.push_back(
              "inverse backtrack at edge " + std::to_string(first.src) + "->" +
              std::to_string(first.dst) + "->" + std::to_string(next->dst));
        }
      }
    }
  }
  for (const Node& n : g.nodes) {
    const auto in = g.InEdges(n.id);
    if (in.size() < 2) continue;
    std::set<std::string> branches;
    for (const Edge* e : in) {
      const std::string sig =
          (e->op == EdgeOp::kUnion ? "u"
                                   : "p" + std::to_string(g.EdgeRelation(*e))) +
          "(" + Signature(g, e->src) + ")";
      if (!branches.insert(sig).second) {
        hits.push_back("duplicate branch into node " + std::to_string(n.id));
      }
    }
  }
  return hits;
}

std::optional<GroundedQuery> Instantiate(const QueryStructure& structure,
                                         const KnowledgeGraph& kg, Rng& rng,
                                         std::optional<EntityId> root) {
  if (kg.num_entities() == 0) {
    throw ArgumentError("cannot instantiate queries on an empty graph");
  }
  GroundedQuery q{structure.name, structure.graph};
  ComputationGraph& g = q.graph;
  const int target = g.Target();
  const EntityId start =
      root ? *root : static_cast<EntityId>(rng.Index(kg.num_entities()));

  std::map<int, EntityId> bound;
  // Pre-order walk from the target towards the anchors.
  std::vector<std::pair<int, EntityId>> stack = {{target, start}};
  while (!stack.empty()) {
    const auto [id, entity] = stack.back();
    stack.pop_back();
    if (auto it = bound.find(id); it != bound.end()) {
      if (it->second != entity) return std::nullopt;
      continue;
    }
    bound[id] = entity;
    const Node& node = *g.FindNode(id);
    if (node.kind == NodeKind::kAnchor) {
      g.anchors[node.anchor_slot] = entity;
      continue;
    }
    std::vector<std::pair<int, EntityId>> children;
    for (const Edge* e : g.InEdges(id)) {
      if (e->op == EdgeOp::kUnion) {
        children.emplace_back(e->src, entity);
        continue;
      }
      const auto rels = kg.InRelations(entity);
      if (rels.empty()) return std::nullopt;
      const RelationId r = rels[rng.Index(rels.size())];
      const auto heads = kg.InNeighbors(entity, r);
      const EntityId h = heads[rng.Index(heads.size())];
      g.relations[e->relation_slot] = r;
      children.emplace_back(e->src, h);
    }
    // Pushed in reverse: the first in-edge is expanded first.
    stack.insert(stack.end(), children.rbegin(), children.rend());
  }
  if (!g.Grounded()) return std::nullopt;
  if (!DegeneracyViolations(kg, g).empty()) return std::nullopt;
  return q;
}

std::string_view StageName(QueryStage stage) {
  switch (stage) {
    case QueryStage::kTrain:
      return "train";
    case QueryStage::kValid:
      return "valid";
    case QueryStage::kTest:
      return "test";
    case QueryStage::kHeldIn:
      return "heldin";
  }
  return "?";
}

QueryStage ParseStage(std::string_view name) {
  for (QueryStage s : {QueryStage::kTrain, QueryStage::kValid,
                       QueryStage::kTest, QueryStage::kHeldIn}) {
    if (StageName(s) == name) return s;
  }
  if (name == "validation") return QueryStage::kValid;
  throw ArgumentError("unknown stage '" + std::string(name) + "'");
}

QuerySet& QueryDataset::Stage(QueryStage stage) {
  switch (stage) {
    case QueryStage::kTrain:
      return train;
    case QueryStage::kValid:
      return valid;
    case QueryStage::kTest:
      return test;
    case QueryStage::kHeldIn:
      return heldin;
  }
  return train;
}

const QuerySet& QueryDataset::Stage(QueryStage stage) const {
  return const_cast<QueryDataset*>(this)->Stage(stage);
}

namespace {

struct Job {
  QueryStage stage;
  const QueryStructure* structure;
  std::size_t count;
  std::uint64_t seed;
  std::vector<QueryRecord> out;
  std::string warning;
};

void RunJob(const GraphSplits& splits, std::size_t budget, Job& job) {
  const KnowledgeGraph& sample_graph =
      job.stage == QueryStage::kValid  ? splits.valid
      : job.stage == QueryStage::kTest ? splits.test
                                       : splits.train;
  Rng rng(job.seed);
  std::unordered_set<std::string> seen;
  while (job.out.size() < job.count) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < budget && !accepted; ++attempt) {
      auto q = Instantiate(*job.structure, sample_graph, rng);
      if (!q) continue;
      const std::string key = Serialize(q->graph);
      if (seen.contains(key)) continue;
      QueryRecord rec{std::move(*q), {}};
      rec.answers.train = AnswerExact(splits.train, rec.query.graph);
      if (job.stage != QueryStage::kTrain) {
        rec.answers.valid = AnswerExact(splits.valid, rec.query.graph);
        rec.answers.test = AnswerExact(splits.test, rec.query.graph);
      }
      if (job.stage == QueryStage::kTrain && rec.answers.train.empty())
        continue;
      if (job.stage == QueryStage::kValid &&
          !HasExtra(rec.answers.valid, rec.answers.train)) {
        continue;
      }
      if (job.stage == QueryStage::kTest &&
          !HasExtra(rec.answers.test, rec.answers.valid)) {
        continue;
      }
      seen.insert(key);
      job.out.push_back(std::move(rec));
      accepted = true;
    }
    if (!accepted) {
      job.warning =
          std::string(StageName(job.stage)) + " " + job.structure->name +
          ": generated " + std::to_string(job.out.size()) + " of " +
          std::to_string(job.count) + " queries within the retry budget";
      break;
    }
  }
}

}  // namespace

QueryDataset GenerateDataset(const GraphSplits& splits,
                             const GenerationOptions& options) {
  std::vector<Job> jobs;
  auto add = [&](QueryStage stage, const QueryCounts& counts) {
    for (const auto& [name, count] : counts) {
      const QueryStructure& s = StructureTemplate(name);
      if (stage == QueryStage::kTrain && !s.trainable) {
        throw ArgumentError("structure " + name +
                            " is not a training structure");
      }
      if (count == 0) continue;
      std::size_t index = 0;
      while (StructureTemplates()[index].name != name) ++index;
      const std::uint64_t stream =
          static_cast<std::uint64_t>(stage) * 16 + index;
      jobs.push_back(
          {stage, &s, count, Rng::DeriveSeed(options.seed, stream), {}, {}});
    }
  };
  add(QueryStage::kTrain, options.train_counts);
  add(QueryStage::kValid, options.eval_counts);
  add(QueryStage::kTest, options.eval_counts);
  add(QueryStage::kHeldIn, options.heldin_counts);

  const std::size_t workers = std::clamp<std::size_t>(
      options.workers, 1, std::max<std::size_t>(1, jobs.size()));
  if (workers == 1) {
    for (Job& job : jobs) RunJob(splits, options.retry_budget, job);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t j = w; j < jobs.size(); j += workers) {
          RunJob(splits, options.retry_budget, jobs[j]);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  QueryDataset data;
  for (Job& job : jobs) {
    if (!job.warning.empty()) data.warnings.push_back(job.warning);
    data.Stage(job.stage)[job.structure->name] = std::move(job.out);
  }
  return data;
}

std::map<std::string, double> AnswerCountReport(const QuerySet& queries) {
  std::map<std::string, double> report;
  for (const auto& [name, records] : queries) {
    if (records.empty()) continue;
    double total = 0;
    for (const QueryRecord& r : records) {
      total +=
          static_cast<double>(r.answers.test.empty() ? r.answers.train.size()
                                                     : r.answers.test.size());
    }
    report[name] = total / static_cast<double>(records.size());
  }
  return report;
}

namespace {

constexpr std::string_view kQueryMagic = "#boxq-queries";

std::string IdList(const std::vector<EntityId>& ids) {
  if (ids.empty()) return "-";
  std::string out;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) out += ',';
    out += std::to_string(ids[i]);
  }
  return out;
}

std::vector<EntityId> ParseIds(std::string_view s) {
  std::vector<EntityId> ids;
  if (s == "-") return ids;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = std::min(s.find(',', start), s.size());
    EntityId v = 0;
    const auto [ptr, ec] =
        std::from_chars(s.data() + start, s.data() + comma, v);
    if (ec != std::errc() || ptr != s.data() + comma) {
      throw ParseError("query file: bad id list '" + std::string(s) + "'");
    }
    ids.push_back(v);
    start = comma + 1;
  }
  return ids;
}

}  // namespace

void WriteQueries(std::ostream& out, QueryStage stage,
                  const QuerySet& queries) {
  out << kQueryMagic << " 1 " << StageName(stage) << '\n';
  for (const QueryStructure& s : StructureTemplates()) {
    auto it = queries.find(s.name);
    if (it == queries.end()) continue;
    for (const QueryRecord& r : it->second) {
      out << r.query.structure << '\t' << Serialize(r.query.graph) << '\t'
          << IdList(r.answers.train) << '\t' << IdList(r.answers.valid) << '\t'
          << IdList(r.answers.test) << '\n';
    }
  }
}

QuerySet ReadQueries(std::istream& in, QueryStage* stage) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("query file: empty input");
  {
    std::istringstream head(line);
    std::string magic, stage_name;
    int version = 0;
    head >> magic >> version >> stage_name;
    if (magic != kQueryMagic || version != 1) {
      throw ParseError("query file: bad header '" + line + "'");
    }
    const QueryStage parsed = ParseStage(stage_name);
    if (stage) *stage = parsed;
  }
  QuerySet set;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    std::vector<std::string_view> f;
    std::string_view rest = line;
    for (std::size_t tab; (tab = rest.find('\t')) != std::string_view::npos;) {
      f.push_back(rest.substr(0, tab));
      rest.remove_prefix(tab + 1);
    }
    f.push_back(rest);
    if (f.size() != 5) {
      throw ParseError("query file line " + std::to_string(line_no) +
                       ": expected 5 fields");
    }
    QueryRecord r;
    r.query.structure = std::string(f[0]);
    StructureTemplate(r.query.structure);
    r.query.graph = ParseGraph(f[1]);
    r.answers.train = ParseIds(f[2]);
    r.answers.valid = ParseIds(f[3]);
    r.answers.test = ParseIds(f[4]);
    set[r.query.structure].push_back(std::move(r));
  }
  return set;
}

std::filesystem::path QueryFilePath(const std::filesystem::path& dir,
                                    QueryStage stage) {
  return dir / (std::string(StageName(stage)) + ".queries");
}

void SaveDataset(const std::filesystem::path& dir, const QueryDataset& data) {
  std::filesystem::create_directories(dir);
  for (QueryStage s : {QueryStage::kTrain, QueryStage::kValid,
                       QueryStage::kTest, QueryStage::kHeldIn}) {
    std::ofstream out(QueryFilePath(dir, s), std::ios::binary);
    if (!out) throw Error("cannot write " + QueryFilePath(dir, s).string());
    WriteQueries(out, s, data.Stage(s));
  }
}

QuerySet LoadQueries(const std::filesystem::path& dir, QueryStage stage) {
  const auto path = QueryFilePath(dir, stage);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open query file " + path.string());
  QueryStage found;
  QuerySet set = ReadQueries(in, &found);
  if (found != stage) {
    throw ParseError(path.string() + ": holds " +
                     std::string(StageName(found)) + " queries");
  }
  return set;
}

QueryCounts ParseCounts(std::string_view text) {
  QueryCounts counts;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t comma = std::min(text.find(',', start), text.size());
    const std::string_view item = text.substr(start, comma - start);
    const std::size_t eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw ArgumentError("bad count '" + std::string(item) + "', want name=N");
    }
    const std::string name(item.substr(0, eq));
    std::size_t n = 0;
    const std::string_view num = item.substr(eq + 1);
    const auto [ptr, ec] =
        std::from_chars(num.data(), num.data() + num.size(), n);
    if (ec != std::errc() || ptr != num.data() + num.size()) {
      throw ArgumentError("bad count '" + std::string(item) + "'");
    }
    if (name == "*") {
      for (const auto& s : StructureNames()) counts[s] = n;
    } else {
      StructureTemplate(name);
      counts[name] = n;
    }
    start = comma + 1;
  }
  return counts;
}

}  // namespace boxq
