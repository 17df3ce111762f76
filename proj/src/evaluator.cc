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

#include "boxq/evaluator.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <thread>

#include "boxq/query_structures.h"
#include "json.hpp"

namespace boxq {
namespace {

std::vector<EntityId> Difference(const std::vector<EntityId>& a,
                                 const std::vector<EntityId>& b) {
  std::vector<EntityId> out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(),
                      std::back_inserter(out));
  return out;
}

std::vector<double> AverageRanks(std::span<const double> x) {
  std::vector<std::size_t> order(x.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> ranks(x.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && x[order[j + 1]] == x[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

std::string Fixed(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

std::size_t RankEntity(std::span<const Real> distances, EntityId v,
                       std::span<const EntityId> filtered) {
  if (v < 0 || static_cast<std::size_t>(v) >= distances.size()) {
    throw ContractViolation("rank: entity out of range");
  }
  const Real dv = distances[v];
  std::size_t rank = 1;
  std::size_t f = 0;
  for (std::size_t u = 0; u < distances.size(); ++u) {
    while (f < filtered.size() && static_cast<std::size_t>(filtered[f]) < u)
      ++f;
    if (f < filtered.size() && static_cast<std::size_t>(filtered[f]) == u)
      continue;
    if (distances[u] < dv) ++rank;
  }
  return rank;
}

Metrics MetricsFromRanks(std::span<const std::size_t> ranks) {
  if (ranks.empty()) throw ContractViolation("no answers to rank");
  Metrics m;
  for (std::size_t r : ranks) {
    m.mrr += 1.0 / static_cast<double>(r);
    m.h1 += r <= 1;
    m.h3 += r <= 3;
    m.h10 += r <= 10;
  }
  const double n = static_cast<double>(ranks.size());
  m.mrr /= n;
  m.h1 /= n;
  m.h3 /= n;
  m.h10 /= n;
  return m;
}

RankingTargets TargetsFor(const AnswerSet& answers, QueryStage stage) {
  switch (stage) {
    case QueryStage::kValid:
      return {Difference(answers.valid, answers.train), answers.valid};
    case QueryStage::kTest:
      return {Difference(answers.test, answers.valid), answers.test};
    case QueryStage::kTrain:
    case QueryStage::kHeldIn:
      break;
  }
  return {answers.train, answers.train};
}

std::vector<Real> EntityDistances(const ModelParams& params,
                                  const ComputationGraph& g) {
  const std::vector<Box> boxes = EmbedEpfo(g, params);
  std::vector<Real> out(params.num_entities());
  for (std::size_t e = 0; e < out.size(); ++e) {
    out[e] = Score(params, boxes, static_cast<EntityId>(e));
  }
  return out;
}

Metrics MetricsForQuery(const ModelParams& params, const QueryRecord& record,
                        QueryStage stage) {
  const RankingTargets t = TargetsFor(record.answers, stage);
  if (t.ranked.empty()) {
    throw ContractViolation("query has no answers to evaluate: " +
                            Serialize(record.query.graph));
  }
  const std::vector<Real> dist = EntityDistances(params, record.query.graph);
  std::vector<std::size_t> ranks;
  ranks.reserve(t.ranked.size());
  for (EntityId v : t.ranked) ranks.push_back(RankEntity(dist, v, t.filtered));
  return MetricsFromRanks(ranks);
}

EvalReport Evaluate(const ModelParams& params, const QuerySet& queries,
                    QueryStage stage, int workers, std::string checkpoint) {
  EvalReport report;
  report.stage = std::string(StageName(stage));
  report.checkpoint = std::move(checkpoint);

  std::vector<const QueryRecord*> flat;
  std::vector<std::pair<std::string, std::size_t>> groups;
  for (const std::string& name : StructureNames()) {
    const auto it = queries.find(name);
    if (it == queries.end() || it->second.empty()) continue;
    groups.emplace_back(name, it->second.size());
    for (const QueryRecord& r : it->second) flat.push_back(&r);
  }
  std::vector<Metrics> per_query(flat.size());
  const std::size_t n_workers = std::clamp<std::size_t>(
      workers < 1 ? 1 : workers, 1, std::max<std::size_t>(flat.size(), 1));
  auto run = [&](std::size_t w) {
    for (std::size_t i = w; i < flat.size(); i += n_workers) {
      per_query[i] = MetricsForQuery(params, *flat[i], stage);
    }
  };
  if (n_workers == 1) {
    run(0);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          run(w);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  std::size_t offset = 0;
  for (const auto& [name, count] : groups) {
    StructureMetrics s;
    s.structure = name;
    s.queries = count;
    for (std::size_t i = offset; i < offset + count; ++i) {
      s.metrics.mrr += per_query[i].mrr;
      s.metrics.h1 += per_query[i].h1;
      s.metrics.h3 += per_query[i].h3;
      s.metrics.h10 += per_query[i].h10;
    }
    const double n = static_cast<double>(count);
    s.metrics.mrr /= n;
    s.metrics.h1 /= n;
    s.metrics.h3 /= n;
    s.metrics.h10 /= n;
    offset += count;
    report.overall.mrr += s.metrics.mrr;
    report.overall.h1 += s.metrics.h1;
    report.overall.h3 += s.metrics.h3;
    report.overall.h10 += s.metrics.h10;
    report.structures.push_back(std::move(s));
  }
  if (!report.structures.empty()) {
    const double n = static_cast<double>(report.structures.size());
    report.overall.mrr /= n;
    report.overall.h1 /= n;
    report.overall.h3 /= n;
    report.overall.h10 /= n;
  }
  return report;
}

std::string FormatReportTable(const EvalReport& report) {
  std::ostringstream out;
  out << "# stage: " << report.stage;
  if (!report.checkpoint.empty()) out << "  checkpoint: " << report.checkpoint;
  out << "\n# ranks are optimistic: ties with the answer do not count\n";
  char line[128];
  std::snprintf(line, sizeof(line), "%-9s %8s %8s %8s %8s %8s\n", "structure",
                "queries", "MRR", "H@1", "H@3", "H@10");
  out << line;
  auto row = [&](const std::string& name, const std::string& count,
                 const Metrics& m) {
    std::snprintf(line, sizeof(line), "%-9s %8s %8s %8s %8s %8s\n",
                  name.c_str(), count.c_str(), Fixed(m.mrr).c_str(),
                  Fixed(m.h1).c_str(), Fixed(m.h3).c_str(),
                  Fixed(m.h10).c_str());
    out << line;
  };
  for (const StructureMetrics& s : report.structures) {
    row(s.structure, std::to_string(s.queries), s.metrics);
  }
  row("avg", "", report.overall);
  return out.str();
}

std::string FormatReportJson(const EvalReport& report) {
  nlohmann::ordered_json records = nlohmann::ordered_json::array();
  auto add = [&](const std::string& structure, std::size_t queries,
                 const Metrics& m) {
    const std::pair<const char*, double> values[] = {
        {"MRR", m.mrr}, {"H@1", m.h1}, {"H@3", m.h3}, {"H@10", m.h10}};
    for (const auto& [metric, value] : values) {
      records.push_back({{"structure", structure},
                         {"metric", metric},
                         {"value", value},
                         {"queries", queries}});
    }
  };
  std::size_t total = 0;
  for (const StructureMetrics& s : report.structures) {
    add(s.structure, s.queries, s.metrics);
    total += s.queries;
  }
  add("avg", total, report.overall);
  nlohmann::ordered_json doc = {{"stage", report.stage},
                                {"checkpoint", report.checkpoint},
                                {"tie_rule", "optimistic"},
                                {"records", records}};
  return doc.dump(2) + "\n";
}

double SpearmanCorrelation(std::span<const double> x,
                           std::span<const double> y) {
  if (x.size() != y.size()) throw ArgumentError("spearman: length mismatch");
  if (x.size() < 2) return 0;
  const std::vector<double> rx = AverageRanks(x);
  const std::vector<double> ry = AverageRanks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0;
  return sxy / std::sqrt(sxx * syy);
}

OffsetReport ComputeOffsetReport(const ModelParams& params,
                                 const KnowledgeGraph& kg) {
  const Vocabulary& vocab = kg.vocab();
  std::vector<std::size_t> heads(vocab.num_relations(), 0);
  std::vector<std::size_t> edges(vocab.num_relations(), 0);
  for (std::size_t e = 0; e < vocab.num_entities(); ++e) {
    for (RelationId r : kg.OutRelations(static_cast<EntityId>(e))) {
      ++heads[r];
      edges[r] += kg.Neighbors(static_cast<EntityId>(e), r).size();
    }
  }
  const std::vector<Real> shared = params.SharedOffset();
  OffsetReport report;
  for (std::size_t r = 0; r < heads.size(); ++r) {
    if (heads[r] == 0) continue;
    RelationOffsetRow row;
    row.relation = static_cast<RelationId>(r);
    row.name = vocab.RelationName(row.relation);
    if (params.config().offset == OffsetMode::kShared &&
        params.config().geometry == Geometry::kBox) {
      for (Real v : shared) row.box_size += std::fabs(static_cast<double>(v));
    } else {
      for (Real v : params.Relation(row.relation).offset) {
        row.box_size += static_cast<double>(v);
      }
    }
    row.mean_answers =
        static_cast<double>(edges[r]) / static_cast<double>(heads[r]);
    report.rows.push_back(std::move(row));
  }
  std::stable_sort(report.rows.begin(), report.rows.end(),
                   [](const RelationOffsetRow& a, const RelationOffsetRow& b) {
                     return a.box_size < b.box_size;
                   });
  std::vector<double> x, y;
  for (const auto& row : report.rows) {
    x.push_back(row.box_size);
    y.push_back(row.mean_answers);
  }
  report.spearman = SpearmanCorrelation(x, y);
  return report;
}

std::string FormatOffsetReport(const OffsetReport& report) {
  std::ostringstream out;
  std::size_t width = 8;
  for (const auto& row : report.rows) width = std::max(width, row.name.size());
  char buf[64];
  out << std::string(width - 8, ' ') << "relation    box_size  mean_answers\n";
  for (const auto& row : report.rows) {
    out << std::string(width - row.name.size(), ' ') << row.name;
    std::snprintf(buf, sizeof(buf), " %11.4f %13.2f\n", row.box_size,
                  row.mean_answers);
    out << buf;
  }
  std::snprintf(buf, sizeof(buf), "spearman %.4f\n", report.spearman);
  out << buf;
  return out.str();
}

DisjointCount CountDisjointQueries(const KnowledgeGraph& kg, Rng& rng,
                                   std::size_t pair_factor) {
  DisjointCount count;
  const std::size_t n = kg.vocab().num_entities();
  std::vector<bool> seen(n, false);
  auto try_add = [&](std::span<const EntityId> answers) {
    for (EntityId e : answers) {
      if (seen[e]) return;
    }
    for (EntityId e : answers) seen[e] = true;
    ++count.m_total;
  };

  std::vector<std::pair<EntityId, RelationId>> multi;
  for (std::size_t e = 0; e < n; ++e) {
    const auto h = static_cast<EntityId>(e);
    for (RelationId r : kg.OutRelations(h)) {
      const auto answers = kg.Neighbors(h, r);
      if (answers.empty()) continue;
      ++count.s_1p;
      if (answers.size() > 1) multi.emplace_back(h, r);
      try_add(answers);
    }
  }
  count.s_1p_multi = multi.size();
  count.m_1p = count.m_total;
  if (multi.empty()) return count;

  const std::size_t draws = pair_factor * multi.size();
  std::vector<EntityId> both;
  for (std::size_t i = 0; i < draws; ++i) {
    const auto [h1, r1] = multi[rng.Index(multi.size())];
    const auto [h2, r2] = multi[rng.Index(multi.size())];
    const auto a = kg.Neighbors(h1, r1);
    const auto b = kg.Neighbors(h2, r2);
    both.clear();
    std::set_intersection(a.begin(), a.end(), b.begin(), b.end(),
                          std::back_inserter(both));
    if (!both.empty()) try_add(both);
  }
  return count;
}

}  // namespace boxq
