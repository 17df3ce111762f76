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

#include "boxq/cli.h"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "boxq/checkpoint.h"
#include "boxq/config.h"
#include "boxq/evaluator.h"
#include "boxq/knowledge_graph.h"
#include "boxq/query_sampler.h"
#include "boxq/synthetic.h"
#include "boxq/trainer.h"
#include "boxq/types.h"

namespace boxq {
namespace {

namespace fs = std::filesystem;

// Bad invocation: missing inputs, unparsable config. Maps to kExitUsage.
class UsageError : public Error {
 public:
  using Error::Error;
};

using Settings = std::vector<std::pair<std::string, std::string>>;

void RequireFile(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("no such file: " + path);
}

void MakeParent(const std::string& path) {
  const fs::path parent = fs::path(path).parent_path();
  if (!parent.empty()) fs::create_directories(parent);
}

void PrintSettings(std::ostream& out, const std::string& command,
                   const Settings& settings) {
  out << "# boxq " << command << "\n";
  for (const auto& [key, value] : settings) {
    out << "#   " << key << " = " << value << "\n";
  }
}

void PrintWorkerNotice(std::ostream& out, int workers) {
  if (workers > 1) {
    out << "# workers = " << workers
        << ": results may differ in the last bits between runs\n";
  }
}

std::string Grouped(std::size_t n) {
  std::string digits = std::to_string(n);
  std::string result;
  for (std::size_t i = 0; i < digits.size(); ++i) {
    if (i > 0 && (digits.size() - i) % 3 == 0) result += ',';
    result += digits[i];
  }
  return result;
}

std::string FormatStats(const SplitStats& s) {
  return Grouped(s.entities) + " entities, " + Grouped(s.relations) +
         " relations, " + Grouped(s.train_edges) + "/" +
         Grouped(s.valid_edges) + "/" + Grouped(s.test_edges) +
         " edges (train/valid/test)";
}

std::string CountsText(const QueryCounts& counts) {
  std::string text;
  for (const auto& [name, n] : counts) {
    if (!text.empty()) text += ',';
    text += name + "=" + std::to_string(n);
  }
  return text.empty() ? "-" : text;
}

GraphSplits LoadGraphs(const std::string& path) {
  RequireFile(path);
  return LoadSplits(path);
}

struct PrepareArgs {
  std::string train, valid, test, out, stats, triples_out;
  std::vector<std::string> synthetic;
  bool nell_resplit = false;
  bool strict_vocab = false;
  std::size_t valid_size = 0;
  std::size_t test_size = 0;
  std::uint64_t seed = 0;
};

void RunPrepare(const PrepareArgs& a, std::ostream& out) {
  Settings settings = {{"out", a.out}};
  if (!a.synthetic.empty()) {
    settings.push_back({"synthetic", a.synthetic[0] + " " + a.synthetic[1]});
  } else {
    settings.push_back({"train", a.train.empty() ? "-" : a.train});
    settings.push_back({"valid", a.valid.empty() ? "-" : a.valid});
    settings.push_back({"test", a.test.empty() ? "-" : a.test});
  }
  settings.push_back({"nell_resplit", a.nell_resplit ? "true" : "false"});
  if (a.nell_resplit) {
    settings.push_back({"valid_size", std::to_string(a.valid_size)});
    settings.push_back({"test_size", std::to_string(a.test_size)});
    settings.push_back({"seed", std::to_string(a.seed)});
    settings.push_back(
        {"triples_out", a.triples_out.empty() ? "-" : a.triples_out});
  }
  settings.push_back({"strict_vocab", a.strict_vocab ? "true" : "false"});
  PrintSettings(out, "prepare-data", settings);

  SplitOptions options;
  options.require_train_coverage = a.strict_vocab;
  GraphSplits splits;
  if (!a.synthetic.empty()) {
    std::size_t n = 0;
    try {
      n = std::stoul(a.synthetic[1]);
    } catch (const std::exception&) {
      throw ArgumentError("bad synthetic size '" + a.synthetic[1] + "'");
    }
    const auto triples = SynthesizeKg(ParseSyntheticKind(a.synthetic[0]), n);
    splits = BuildSplitGraphs(triples, {}, {}, options);
  } else if (a.nell_resplit) {
    std::vector<fs::path> files;
    for (const auto* p : {&a.train, &a.valid, &a.test}) {
      if (p->empty()) continue;
      RequireFile(*p);
      files.emplace_back(*p);
    }
    if (files.empty())
      throw UsageError("--nell-resplit needs at least one input file");
    const TripleSplit t = PrepareNell(files, a.valid_size, a.test_size, a.seed);
    if (!a.triples_out.empty()) {
      fs::create_directories(a.triples_out);
      WriteTripleFile(fs::path(a.triples_out) / "train.txt", t.train);
      WriteTripleFile(fs::path(a.triples_out) / "valid.txt", t.valid);
      WriteTripleFile(fs::path(a.triples_out) / "test.txt", t.test);
    }
    splits = BuildSplitGraphs(t.train, t.valid, t.test, options);
  } else {
    if (a.train.empty()) throw UsageError("--train is required");
    for (const auto* p : {&a.train, &a.valid, &a.test}) {
      if (!p->empty()) RequireFile(*p);
    }
    const std::vector<NamedTriple> none;
    splits = BuildSplitGraphs(ReadTripleFile(a.train),
                              a.valid.empty() ? none : ReadTripleFile(a.valid),
                              a.test.empty() ? none : ReadTripleFile(a.test),
                              options);
  }
  MakeParent(a.out);
  SaveSplits(a.out, splits);
  const std::string stats = FormatStats(splits.stats);
  out << stats << "\n";
  if (!a.stats.empty()) {
    MakeParent(a.stats);
    std::ofstream file(a.stats, std::ios::binary);
    if (!file) throw Error("cannot write " + a.stats);
    file << stats << "\n";
  }
}

struct GenerateArgs {
  std::string graphs, out;
  std::string counts = "1p=1000,2p=1000,3p=1000,2i=1000,3i=1000";
  std::string eval_counts;
  std::string heldin_counts;
  std::uint64_t seed = 0;
  std::size_t retry_budget = 1000;
  int workers = 1;
};

void RunGenerate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  GenerationOptions o;
  o.train_counts = ParseCounts(a.counts);
  o.eval_counts = ParseCounts(a.eval_counts);
  o.heldin_counts = ParseCounts(a.heldin_counts);
  const auto trainable = TrainableStructureNames();
  for (const auto& [name, n] : o.train_counts) {
    if (std::find(trainable.begin(), trainable.end(), name) ==
        trainable.end()) {
      throw ArgumentError("structure " + name + " cannot be used for training");
    }
  }
  o.seed = a.seed;
  o.retry_budget = a.retry_budget;
  o.workers = a.workers;
  PrintSettings(out, "generate-queries",
                {{"graphs", a.graphs},
                 {"out", a.out},
                 {"counts", CountsText(o.train_counts)},
                 {"eval_counts", CountsText(o.eval_counts)},
                 {"heldin_counts", CountsText(o.heldin_counts)},
                 {"seed", std::to_string(a.seed)},
                 {"retry_budget", std::to_string(a.retry_budget)},
                 {"workers", std::to_string(a.workers)}});
  PrintWorkerNotice(out, a.workers);
  const GraphSplits splits = LoadGraphs(a.graphs);
  const QueryDataset data = GenerateDataset(splits, o);
  for (const auto& w : data.warnings) err << "warning: " << w << "\n";
  SaveDataset(a.out, data);
  for (QueryStage s : {QueryStage::kTrain, QueryStage::kValid,
                       QueryStage::kTest, QueryStage::kHeldIn}) {
    const QuerySet& set = data.Stage(s);
    const auto means = AnswerCountReport(set);
    for (const auto& [name, records] : set) {
      const auto mean = means.find(name);
      std::ostringstream line;
      line << StageName(s) << " " << name << " queries=" << records.size()
           << " mean_answers=" << std::fixed << std::setprecision(2)
           << (mean == means.end() ? 0.0 : mean->second);
      out << line.str() << "\n";
    }
  }
}

struct TrainArgs {
  std::string config, graphs, queries, out, variant;
  std::string validation = "valid";
  std::vector<std::string> set;
  bool dry_run = false;
  int workers = 1;
};

ModelConfig ResolveConfig(const std::string& file, const std::string& variant,
                          const std::vector<std::string>& overrides) {
  ModelConfig c;
  if (!file.empty()) {
    RequireFile(file);
    KeyValues pairs;
    try {
      pairs = LoadKeyValues(file);
    } catch (const ParseError& e) {
      throw UsageError(e.what());
    }
    // The variant preset is applied before the remaining keys.
    for (const auto& [key, value] : pairs) {
      if (key == "variant") c.Set(key, value);
    }
    for (const auto& [key, value] : pairs) {
      if (key != "variant") c.Set(key, value);
    }
  }
  if (!variant.empty()) ApplyVariant(variant, c);
  for (const auto& kv : overrides) {
    const std::size_t eq = kv.find('=');
    if (eq == std::string::npos)
      throw ArgumentError("--set wants key=value, got " + kv);
    std::string key = kv.substr(0, eq);
    std::replace(key.begin(), key.end(), '-', '_');
    c.Set(key, kv.substr(eq + 1));
  }
  c.Validate();
  return c;
}

void RunTrain(const TrainArgs& a, std::ostream& out) {
  const ModelConfig config = ResolveConfig(a.config, a.variant, a.set);
  Settings settings = {{"config", a.config.empty() ? "-" : a.config},
                       {"graphs", a.graphs},
                       {"queries", a.queries},
                       {"out", a.out},
                       {"validation", a.validation},
                       {"dry_run", a.dry_run ? "true" : "false"},
                       {"workers", std::to_string(a.workers)}};
  for (auto& kv : config.ToKeyValues()) settings.push_back(std::move(kv));
  PrintSettings(out, "train", settings);
  PrintWorkerNotice(out, a.workers);

  const GraphSplits splits = LoadGraphs(a.graphs);
  RequireFile(QueryFilePath(a.queries, QueryStage::kTrain).string());
  const QuerySet train = LoadQueries(a.queries, QueryStage::kTrain);
  QuerySet validation;
  TrainOptions options;
  options.workers = a.workers;
  options.dry_run = a.dry_run;
  if (a.validation != "none") {
    const QueryStage stage = ParseStage(a.validation);
    RequireFile(QueryFilePath(a.queries, stage).string());
    validation = LoadQueries(a.queries, stage);
    if (!validation.empty()) {
      options.validation = &validation;
      options.validation_stage = stage;
    }
  }
  options.diagnostic_path = a.out + ".diverged";
  options.on_epoch = [&out](const EpochLog& log) {
    out << FormatEpochLog(log) << "\n";
    out.flush();
  };
  const TrainResult result =
      Train(config, splits.train.num_entities(), splits.train.num_relations(),
            train, options);
  MakeParent(a.out);
  SaveCheckpoint(a.out, result.best, splits.train.vocab().Hash());
  out << "saved " << a.out << " from epoch " << result.best_epoch << "\n";
}

struct EvalArgs {
  std::string checkpoint, graphs, queries, json;
  std::string stage = "test";
  int workers = 1;
};

Checkpoint LoadCompatible(const std::string& path, const GraphSplits& splits) {
  RequireFile(path);
  Checkpoint ckpt = LoadCheckpoint(path);
  CheckCompatible(ckpt, splits.train.vocab());
  return ckpt;
}

void RunEval(const EvalArgs& a, std::ostream& out) {
  const QueryStage stage = ParseStage(a.stage);
  PrintSettings(out, "eval",
                {{"checkpoint", a.checkpoint},
                 {"graphs", a.graphs},
                 {"queries", a.queries},
                 {"stage", std::string(StageName(stage))},
                 {"json", a.json.empty() ? "-" : a.json},
                 {"workers", std::to_string(a.workers)}});
  PrintWorkerNotice(out, a.workers);
  const GraphSplits splits = LoadGraphs(a.graphs);
  const Checkpoint ckpt = LoadCompatible(a.checkpoint, splits);
  RequireFile(QueryFilePath(a.queries, stage).string());
  const QuerySet queries = LoadQueries(a.queries, stage);
  const EvalReport report =
      Evaluate(ckpt.params, queries, stage, a.workers,
               fs::path(a.checkpoint).filename().string());
  out << FormatReportTable(report);
  if (!a.json.empty()) {
    MakeParent(a.json);
    std::ofstream file(a.json, std::ios::binary);
    if (!file) throw Error("cannot write " + a.json);
    file << FormatReportJson(report) << "\n";
  }
}

const KnowledgeGraph& SplitGraph(const GraphSplits& splits,
                                 const std::string& name) {
  if (name == "train") return splits.train;
  if (name == "valid") return splits.valid;
  if (name == "test") return splits.test;
  throw ArgumentError("unknown split '" + name + "'");
}

struct OffsetsArgs {
  std::string checkpoint, graphs;
  std::string split = "test";
};

void RunOffsets(const OffsetsArgs& a, std::ostream& out) {
  PrintSettings(
      out, "analyze offsets",
      {{"checkpoint", a.checkpoint}, {"graphs", a.graphs}, {"split", a.split}});
  const GraphSplits splits = LoadGraphs(a.graphs);
  const KnowledgeGraph& kg = SplitGraph(splits, a.split);
  const Checkpoint ckpt = LoadCompatible(a.checkpoint, splits);
  out << FormatOffsetReport(ComputeOffsetReport(ckpt.params, kg));
}

struct DisjointArgs {
  std::string graphs;
  std::string split = "test";
  std::uint64_t seed = 0;
  std::size_t pair_factor = 10;
};

void RunDisjoint(const DisjointArgs& a, std::ostream& out) {
  PrintSettings(out, "analyze disjoint-m",
                {{"graphs", a.graphs},
                 {"split", a.split},
                 {"seed", std::to_string(a.seed)},
                 {"pair_factor", std::to_string(a.pair_factor)}});
  const GraphSplits splits = LoadGraphs(a.graphs);
  Rng rng(a.seed);
  const DisjointCount c =
      CountDisjointQueries(SplitGraph(splits, a.split), rng, a.pair_factor);
  out << "S_1p = " << c.s_1p << "\n"
      << "S_1p(>1 answer) = " << c.s_1p_multi << "\n"
      << "M_1p = " << c.m_1p << "\n"
      << "M_total = " << c.m_total << "\n";
}

struct SynthesizeArgs {
  std::string kind, out;
  std::size_t n = 30;
};

void RunSynthesize(const SynthesizeArgs& a, std::ostream& out) {
  PrintSettings(out, "synthesize-kg",
                {{"kind", a.kind}, {"n", std::to_string(a.n)}, {"out", a.out}});
  const auto triples = SynthesizeKg(ParseSyntheticKind(a.kind), a.n);
  fs::create_directories(a.out);
  WriteTripleFile(fs::path(a.out) / "train.txt", triples);
  WriteTripleFile(fs::path(a.out) / "valid.txt", {});
  WriteTripleFile(fs::path(a.out) / "test.txt", {});
  out << "wrote " << triples.size() << " triples to " << a.out << "\n";
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Box embeddings for logical queries over knowledge graphs",
               "boxq"};
  app.require_subcommand(1);

  PrepareArgs prepare;
  auto* prep =
      app.add_subcommand("prepare-data", "Build graph snapshots from triples");
  prep->add_option("--train", prepare.train, "Training triples");
  prep->add_option("--valid", prepare.valid, "Validation triples");
  prep->add_option("--test", prepare.test, "Test triples");
  prep->add_option("--synthetic", prepare.synthetic, "Synthetic graph: KIND N")
      ->expected(2);
  prep->add_flag("--nell-resplit", prepare.nell_resplit,
                 "Pool the inputs and draw fresh validation/test splits");
  prep->add_option("--valid-size", prepare.valid_size,
                   "Validation edges to draw");
  prep->add_option("--test-size", prepare.test_size, "Test edges to draw");
  prep->add_option("--seed", prepare.seed, "Resplit seed");
  prep->add_option("--triples-out", prepare.triples_out,
                   "Write the resplit triple files to this directory");
  prep->add_flag("--strict-vocab", prepare.strict_vocab,
                 "Reject entities that never occur in training");
  prep->add_option("--out", prepare.out, "Snapshot path")->required();
  prep->add_option("--stats", prepare.stats, "Also write the stats line here");

  GenerateArgs generate;
  auto* gen = app.add_subcommand("generate-queries", "Sample grounded queries");
  gen->add_option("--graphs", generate.graphs, "Graph snapshot")->required();
  gen->add_option("--out", generate.out, "Query directory")->required();
  gen->add_option("--counts", generate.counts,
                  "Training counts, e.g. 1p=100,2p=100")
      ->capture_default_str();
  gen->add_option("--eval-counts", generate.eval_counts,
                  "Validation and test counts per structure ('*=N' for all)");
  gen->add_option(
      "--heldin-counts", generate.heldin_counts,
      "Held-in counts per structure, sampled on the training graph");
  gen->add_option("--seed", generate.seed, "Master seed")
      ->capture_default_str();
  gen->add_option("--retry-budget", generate.retry_budget, "Attempts per query")
      ->capture_default_str();
  gen->add_option("--workers", generate.workers, "Worker threads")
      ->check(CLI::PositiveNumber);

  TrainArgs train;
  auto* tr = app.add_subcommand("train", "Train a model");
  tr->add_option("--config", train.config, "Key-value config file");
  tr->add_option("--variant", train.variant, "Model preset");
  tr->add_option("--set", train.set, "Override one config key (key=value)");
  tr->add_option("--graphs", train.graphs, "Graph snapshot")->required();
  tr->add_option("--queries", train.queries, "Query directory")->required();
  tr->add_option("--out", train.out, "Checkpoint path")->required();
  tr->add_option("--validation", train.validation,
                 "Stage used for model selection: valid, heldin or none")
      ->capture_default_str();
  tr->add_flag("--dry-run", train.dry_run,
               "Validate inputs and run one iteration");
  tr->add_option("--workers", train.workers, "Worker threads")
      ->check(CLI::PositiveNumber);

  EvalArgs eval;
  auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint");
  ev->add_option("--checkpoint", eval.checkpoint, "Checkpoint path")
      ->required();
  ev->add_option("--graphs", eval.graphs, "Graph snapshot")->required();
  ev->add_option("--queries", eval.queries, "Query directory")->required();
  ev->add_option("--stage", eval.stage, "train, valid, test or heldin")
      ->capture_default_str();
  ev->add_option("--json", eval.json, "Write the structured report here");
  ev->add_option("--workers", eval.workers, "Worker threads")
      ->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Diagnostics");
  analyze->require_subcommand(1);
  OffsetsArgs offsets;
  auto* off =
      analyze->add_subcommand("offsets", "Relation box size vs fan-out");
  off->add_option("--checkpoint", offsets.checkpoint, "Checkpoint path")
      ->required();
  off->add_option("--graphs", offsets.graphs, "Graph snapshot")->required();
  off->add_option("--split", offsets.split, "Graph to measure fan-out on")
      ->capture_default_str();
  DisjointArgs disjoint;
  auto* dis =
      analyze->add_subcommand("disjoint-m", "Count disjoint-answer queries");
  dis->add_option("--graphs", disjoint.graphs, "Graph snapshot")->required();
  dis->add_option("--split", disjoint.split, "Graph to count on")
      ->capture_default_str();
  dis->add_option("--seed", disjoint.seed, "Seed for the 2i pass")
      ->capture_default_str();
  dis->add_option("--pair-factor", disjoint.pair_factor,
                  "2i pairs per 1p query")
      ->capture_default_str();

  SynthesizeArgs synth;
  auto* syn =
      app.add_subcommand("synthesize-kg", "Write a small synthetic graph");
  syn->add_option("kind", synth.kind, "chain, tree or bipartite")->required();
  syn->add_option("n", synth.n, "Number of entities")->required();
  syn->add_option("--out", synth.out, "Output directory")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*prep) {
      RunPrepare(prepare, out);
    } else if (*gen) {
      RunGenerate(generate, out, err);
    } else if (*tr) {
      RunTrain(train, out);
    } else if (*ev) {
      RunEval(eval, out);
    } else if (*off) {
      RunOffsets(offsets, out);
    } else if (*dis) {
      RunDisjoint(disjoint, out);
    } else if (*syn) {
      RunSynthesize(synth, out);
    }
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ArgumentError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CompatibilityError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace boxq
