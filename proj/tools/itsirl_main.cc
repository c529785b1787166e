/*
 * Copyright 2026 The ItsIRL Authors.
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

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "itsirl/counterfactual.h"
#include "itsirl/diagnostics.h"
#include "itsirl/errors.h"
#include "itsirl/model.h"
#include "itsirl/prototypes.h"
#include "itsirl/service.h"
#include "itsirl/store.h"
#include "itsirl/synthetic.h"
#include "itsirl/tasks.h"
#include "itsirl/type_system.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace itsirl;

namespace {

constexpr double kSparsityThresholds[] = {0.01, 0.05, 0.1, 0.25, 0.5};

struct Globals {
  std::uint64_t seed = 0;
  std::string config;
  std::vector<std::string> argv;  // without the program name
};

std::shared_ptr<spdlog::logger> make_logger() {
  auto log = spdlog::stderr_logger_mt("itsirl");
  log->set_pattern("[%l] %v");
  log->set_level(spdlog::level::info);
  if (const char* env = std::getenv("ITSIRL_LOG")) {
    const std::string level = env;
    if (level == "error") {
      log->set_level(spdlog::level::err);
    } else if (level == "debug") {
      log->set_level(spdlog::level::debug);
    } else if (level != "info") {
      log->warn("ignoring ITSIRL_LOG={}, expected error, info or debug",
                level);
    }
  }
  return log;
}

RunConfig run_config(const Globals& g) {
  return g.config.empty() ? RunConfig{} : load_config(g.config);
}

std::vector<fs::path> with_config(std::vector<fs::path> inputs,
                                  const Globals& g) {
  if (!g.config.empty()) inputs.emplace_back(g.config);
  return inputs;
}

// The recorded argv makes the run repeatable from the manifest alone.
void manifest(const fs::path& output, std::string_view command,
              const Globals& g, json config,
              std::span<const fs::path> inputs) {
  config["argv"] = g.argv;
  write_manifest(output, command, g.seed, config, inputs);
}

void write_json(const fs::path& path, const json& doc) {
  write_file(path, doc.dump(2) + "\n");
}

std::optional<ExternalVectorStore> maybe_vectors(const std::string& path) {
  if (path.empty()) return std::nullopt;
  return load_external_vectors(path);
}

const ExternalVectorStore* ptr(const std::optional<ExternalVectorStore>& v) {
  return v ? &*v : nullptr;
}

void check_vectors(const Checkpoint& ckpt,
                   const std::optional<ExternalVectorStore>& vectors) {
  if (ckpt.params.config.external_encoder && !vectors) {
    throw ValidationError("model uses external vectors; pass --vectors");
  }
}

TaskHead require_head(const Checkpoint& ckpt, const std::string& path) {
  if (!ckpt.head) throw ValidationError(path + " has no task head");
  return *ckpt.head;
}

// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string out;
  SyntheticConfig config;
  SyntheticSizes sizes;
};

int cmd_synth(const SynthArgs& a, const Globals& g, spdlog::logger& log) {
  SyntheticConfig config = a.config;
  config.seed = g.seed;
  fs::create_directories(a.out);
  const auto files = write_synthetic_dataset(config, a.sizes, a.out);
  json options = {{"classes", config.classes},
                  {"pairs", config.pairs},
                  {"teacher_dim", config.teacher_dim},
                  {"noise", config.teacher_noise},
                  {"corpus", a.sizes.corpus},
                  {"train", a.sizes.train},
                  {"dev", a.sizes.dev},
                  {"test", a.sizes.test},
                  {"pairs_train", a.sizes.pairs_train},
                  {"pairs_dev", a.sizes.pairs_dev},
                  {"pairs_test", a.sizes.pairs_test}};
  manifest(fs::path(a.out) / "synth", "synth", g, options, {});
  for (const auto& f : files) log.info("wrote {}", f.string());
  return 0;
}

struct TypesArgs {
  std::string types;
  std::string query;
  std::size_t limit = 20;
};

int cmd_types(const TypesArgs& a) {
  const TypeSystem types = load_type_system(a.types);
  for (const auto& [index, name] : search_types(types, a.query, a.limit)) {
    std::cout << index << '\t' << name << '\n';
  }
  return 0;
}

struct PretrainArgs {
  std::string corpus, types, mode, ier, vectors, out, report;
  std::optional<int> epochs, decoder_depth;
  std::optional<std::size_t> batch_size, dim, embed_dim;
  std::optional<double> lr, lambda;
};

int cmd_pretrain(const PretrainArgs& a, const Globals& g,
                 spdlog::logger& log) {
  RunConfig cfg = run_config(g);
  if (a.epochs) cfg.pretrain.epochs = *a.epochs;
  if (a.batch_size) cfg.pretrain.batch_size = *a.batch_size;
  if (a.lr) cfg.pretrain.adam.learning_rate = *a.lr;
  if (a.dim) cfg.model.dim = *a.dim;
  if (a.embed_dim) cfg.model.embed_dim = *a.embed_dim;
  if (a.decoder_depth) cfg.model.decoder_depth = *a.decoder_depth;
  if (a.lambda) cfg.model.lambda = *a.lambda;
  if (cfg.pretrain.batch_size == 0) {
    throw ValidationError("--batch-size must be positive");
  }
  const PretrainMode mode = parse_pretrain_mode(a.mode);
  if (mode == PretrainMode::kDecoderOnly && a.ier.empty()) {
    throw ValidationError("--mode decoder-only needs --ier");
  }

  const TypeSystem types = load_type_system(a.types);
  const auto records = load_corpus(a.corpus, types);
  const auto vectors = maybe_vectors(a.vectors);
  std::vector<fs::path> inputs{a.corpus, a.types};
  if (vectors) inputs.emplace_back(a.vectors);

  Checkpoint out;
  PretrainResult result;
  if (mode == PretrainMode::kDecoderOnly) {
    inputs.emplace_back(a.ier);
    Checkpoint ier = load_checkpoint(a.ier, &types);
    check_vectors(ier, vectors);
    ItsIRLParams frozen = ier.params;
    if (a.decoder_depth) frozen.config.decoder_depth = *a.decoder_depth;
    if (a.lambda) frozen.config.lambda = *a.lambda;
    frozen.config.validate();
    const auto corpus =
        make_pretrain_examples(records, frozen, ier.vocab, ptr(vectors));
    result = pretrain_decoder_only(corpus, frozen, cfg.pretrain, g.seed);
    out.vocab = ier.vocab;
  } else {
    ModelConfig model = cfg.model;
    model.num_types = types.size();
    if (vectors) {
      model.external_encoder = true;
      model.dim = vectors->dim();
      out.vocab = TokenVocab();
    } else {
      std::vector<std::string> texts;
      for (const auto& r : records) {
        texts.push_back(r.mention);
        texts.push_back(r.context);
      }
      out.vocab = TokenVocab::build(texts);
    }
    model.vocab_size = out.vocab.size();
    model.validate();
    const ItsIRLParams init = initialize_params(model, g.seed);
    const auto corpus =
        make_pretrain_examples(records, init, out.vocab, ptr(vectors));
    result = mode == PretrainMode::kIer
                 ? pretrain_ier(corpus, init, cfg.pretrain, g.seed)
                 : pretrain_end_to_end(corpus, init, cfg.pretrain, g.seed);
  }
  for (const auto& e : result.trace.epochs) {
    log.debug("epoch {} objective {:.6g}", e.epoch, e.mean.objective);
  }
  log.info("{}: objective {:.6g} -> {:.6g}", to_string(mode),
           result.trace.initial.objective, result.trace.final.objective);

  out.params = std::move(result.params);
  out.seed = g.seed;
  out.creation_mode = to_string(mode);
  save_checkpoint(out, a.out);
  json options = {{"mode", a.mode}, {"external_vectors", vectors.has_value()}};
  const json config = {{"run", to_json(cfg)}, {"options", options}};
  inputs = with_config(inputs, g);
  manifest(a.out, "pretrain", g, config, inputs);
  if (!a.report.empty()) {
    write_json(a.report, to_json(result.trace));
    manifest(a.report, "pretrain", g, config, inputs);
  }
  return 0;
}

struct FinetuneArgs {
  std::string model, train, dev, task = "classification", vectors, mode, out,
      report;
  bool reinit_decoder = false;
  std::optional<int> epochs, patience;
  std::optional<std::size_t> batch_size;
  std::optional<double> lr;
};

int cmd_finetune(const FinetuneArgs& a, const Globals& g,
                 spdlog::logger& log) {
  RunConfig cfg = run_config(g);
  if (!a.mode.empty()) cfg.finetune.mode = parse_finetune_mode(a.mode);
  if (a.epochs) cfg.finetune.max_epochs = *a.epochs;
  if (a.patience) cfg.finetune.patience = *a.patience;
  if (a.batch_size) cfg.finetune.batch_size = *a.batch_size;
  if (a.lr) cfg.finetune.adam.learning_rate = *a.lr;
  if (cfg.finetune.patience < 1) throw ValidationError("--patience must be >= 1");
  if (cfg.finetune.batch_size == 0) {
    throw ValidationError("--batch-size must be positive");
  }
  cfg.finetune.seed = g.seed;
  const TaskKind kind = parse_task_kind(a.task);

  Checkpoint ckpt = load_checkpoint(a.model);
  const auto vectors = maybe_vectors(a.vectors);
  check_vectors(ckpt, vectors);
  const auto train_records = load_task_records(a.train, kind);
  const auto dev_records = load_task_records(a.dev, kind);

  ItsIRLParams start = ckpt.params;
  if (a.reinit_decoder) reinitialize_decoder(start, g.seed + 1);
  const TaskHead head =
      kind == TaskKind::kClassification
          ? TaskHead::classification(class_vocabulary(train_records),
                                     start.config.dim, g.seed)
          : TaskHead::regression(start.config.dim, g.seed);
  const auto train =
      make_task_examples(train_records, start, head, ckpt.vocab, ptr(vectors));
  const auto dev =
      make_task_examples(dev_records, start, head, ckpt.vocab, ptr(vectors));
  FinetuneResult result = finetune(train, dev, start, head, cfg.finetune);
  for (const auto& e : result.trace.epochs) {
    log.debug("epoch {} train loss {:.6g} dev {:.6g}", e.epoch, e.train_loss,
              e.dev_metric);
  }
  log.info("best epoch {} dev metric {:.6g}", result.trace.best_epoch,
           result.trace.best_dev_metric);

  Checkpoint out;
  out.params = std::move(result.params);
  out.head = std::move(result.head);
  out.vocab = ckpt.vocab;
  out.seed = g.seed;
  out.creation_mode =
      std::string("finetune-") + to_string(cfg.finetune.mode);
  save_checkpoint(out, a.out);
  std::vector<fs::path> inputs{a.model, a.train, a.dev};
  if (vectors) inputs.emplace_back(a.vectors);
  inputs = with_config(inputs, g);
  const json config = {
      {"run", to_json(cfg)},
      {"options", {{"task", a.task}, {"reinit_decoder", a.reinit_decoder}}}};
  manifest(a.out, "finetune", g, config, inputs);
  if (!a.report.empty()) {
    write_json(a.report, to_json(result.trace));
    manifest(a.report, "finetune", g, config, inputs);
  }
  return 0;
}

std::string format_eval_summary(const EvalReport& report) {
  std::ostringstream out;
  char line[160];
  if (report.kind == TaskKind::kClassification) {
    std::snprintf(line, sizeof line, "accuracy %.4f (%zu/%zu)\n",
                  report.metric, report.correct(), report.rows.size());
    out << line;
    if (!report.errors.empty()) {
      out << "errors (true -> predicted):\n";
      for (const auto& e : report.errors) {
        std::snprintf(line, sizeof line, "  %-24s %-24s %zu\n",
                      report.classes[e.truth].c_str(),
                      report.classes[e.predicted].c_str(), e.count);
        out << line;
      }
    }
  } else {
    std::snprintf(line, sizeof line, "mse %.6f over %zu pairs\n",
                  report.metric, report.rows.size());
    out << line;
  }
  std::vector<TypeVector> vectors;
  for (const auto& row : report.rows) vectors.push_back(row.types);
  const auto curve = sparsity_curve(vectors, kSparsityThresholds);
  out << "mean sparsity:";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    std::snprintf(line, sizeof line, " @%g=%.2f", kSparsityThresholds[i],
                  curve[i]);
    out << line;
  }
  out << '\n';
  return out.str();
}

struct EvalArgs {
  std::string model, data, vectors, out;
};

int cmd_eval(const EvalArgs& a, const Globals& g) {
  const Checkpoint ckpt = load_checkpoint(a.model);
  const TaskHead head = require_head(ckpt, a.model);
  const auto vectors = maybe_vectors(a.vectors);
  check_vectors(ckpt, vectors);
  const auto records = load_task_records(a.data, head.kind);
  const auto data =
      make_task_examples(records, ckpt.params, head, ckpt.vocab, ptr(vectors));
  const EvalReport report = evaluate(data, ckpt.params, head);
  std::cout << format_eval_summary(report);
  if (!a.out.empty()) {
    write_json(a.out, to_json(report));
    std::vector<fs::path> inputs{a.model, a.data};
    if (vectors) inputs.emplace_back(a.vectors);
    manifest(a.out, "eval", g, json::object(), inputs);
  }
  return 0;
}

struct ManipulateArgs {
  std::string model, eval, types, class_sets, out, table;
  std::vector<std::string> strategies;
};

int cmd_manipulate(const ManipulateArgs& a, const Globals& g) {
  const RunConfig cfg = run_config(g);
  const TypeSystem types = load_type_system(a.types);
  const Checkpoint ckpt = load_checkpoint(a.model, &types);
  const TaskHead head = require_head(ckpt, a.model);
  if (head.kind != TaskKind::kClassification) {
    throw ValidationError("manipulation needs a classification model");
  }
  const EvalReport report = load_eval_report(a.eval);
  if (report.classes != head.classes) {
    throw ValidationError(a.eval + ": classes differ from the model's");
  }
  const ClassSets sets = build_class_sets(load_class_rules(a.class_sets), types);

  std::vector<Strategy> strategies;
  for (const auto& s : a.strategies) {
    if (s == "all") {
      strategies.insert(strategies.end(),
                        {Strategy::kFix, Strategy::kPromote, Strategy::kBoth});
      continue;
    }
    const Strategy parsed = parse_strategy(s);
    if (parsed == Strategy::kManual) {
      throw ValidationError("--strategy must be fix, promote, both or all");
    }
    strategies.push_back(parsed);
  }
  if (strategies.empty()) {
    strategies = {Strategy::kFix, Strategy::kPromote, Strategy::kBoth};
  }

  const CampaignReport campaign = run_error_campaign(
      report, sets, strategies, ckpt.params, head, cfg.v_low, cfg.v_high);
  const std::string table = format_campaign_table(campaign);
  std::cout << table;

  std::vector<std::string> names;
  for (Strategy s : strategies) names.emplace_back(to_string(s));
  const json config = {{"run", to_json(cfg)}, {"strategies", names}};
  const auto inputs = with_config({a.model, a.eval, a.types, a.class_sets}, g);
  if (!a.out.empty()) {
    write_json(a.out, to_json(campaign));
    manifest(a.out, "manipulate", g, config, inputs);
  }
  if (!a.table.empty()) {
    write_file(a.table, table);
    manifest(a.table, "manipulate", g, config, inputs);
  }
  return 0;
}

struct PrototypesArgs {
  std::string eval, types, out, coords, grouping = "by_true";
  std::size_t top = 10;
};

int cmd_prototypes(const PrototypesArgs& a, const Globals& g) {
  const TypeSystem types = load_type_system(a.types);
  const EvalReport report = load_eval_report(a.eval);
  if (report.kind != TaskKind::kClassification) {
    throw ValidationError("prototypes need a classification eval report");
  }
  for (const auto& row : report.rows) {
    if (row.types.size() != types.size()) {
      throw DimensionError(a.eval + ": row " + row.id + " has " +
                           std::to_string(row.types.size()) +
                           " type weights, type system has " +
                           std::to_string(types.size()));
    }
  }
  std::vector<Prototype> all = build_positive_prototypes(report);
  const std::size_t positives = all.size();
  for (auto& p :
       build_negative_prototypes(report, parse_grouping(a.grouping))) {
    all.push_back(std::move(p));
  }

  for (const auto& p : all) {
    std::cout << to_string(p.polarity) << ' ' << p.group << " (support "
              << p.support << ")\n";
    for (const auto& t : top_types(p, a.top, types)) {
      char line[160];
      std::snprintf(line, sizeof line, "  %-40s %.4f\n", t.name.c_str(),
                    t.weight);
      std::cout << line;
    }
  }

  const json config = {{"grouping", a.grouping}};
  const std::vector<fs::path> inputs{a.eval, a.types};
  if (!a.out.empty()) {
    write_prototypes(all, a.out);
    manifest(a.out, "prototypes", g, config, inputs);
  }
  if (!a.coords.empty()) {
    if (positives < 2) {
      throw ValidationError("--coords needs at least two positive prototypes");
    }
    const std::span<const Prototype> pos(all.data(), positives);
    write_coordinates(project_2d(pos), a.coords);
    manifest(a.coords, "prototypes", g, config, inputs);
  }
  return 0;
}

struct GradcheckArgs {
  std::size_t cases = 50;
};

int cmd_gradcheck(const GradcheckArgs& a, const Globals& g,
                  spdlog::logger& log) {
  const auto checks = check_random_compositions(a.cases, g.seed);
  double worst = 0.0;
  for (const auto& c : checks) {
    log.debug("{} params={} max_rel={:.3g} ulps={:.2f}", c.description,
              c.parameters, c.max_relative_error, c.error_in_ulps);
    worst = std::max(worst, c.max_relative_error);
  }
  std::printf("max relative error %.6g over %zu compositions\n", worst,
              checks.size());
  return worst < 1e-4 ? 0 : 2;
}

struct ServeArgs {
  std::string model, types, class_sets, prototypes, host = "127.0.0.1";
  int port = 8080;
};

int cmd_serve(const ServeArgs& a, const Globals& g, spdlog::logger& log) {
  const RunConfig cfg = run_config(g);
  ServiceSnapshot snap;
  snap.types = load_type_system(a.types);
  Checkpoint ckpt = load_checkpoint(a.model, &snap.types);
  snap.head = require_head(ckpt, a.model);
  snap.params = std::move(ckpt.params);
  snap.vocab = std::move(ckpt.vocab);
  if (!a.class_sets.empty()) {
    snap.class_sets =
        build_class_sets(load_class_rules(a.class_sets), snap.types);
  }
  if (!a.prototypes.empty()) snap.prototypes = load_prototypes(a.prototypes);
  snap.display_threshold = cfg.display_threshold;
  snap.v_low = cfg.v_low;
  snap.v_high = cfg.v_high;

  Service service(make_snapshot(std::move(snap)));
  HttpServer server(service);
  const int port = server.bind(a.host, a.port);
  if (port < 0) {
    throw Error("cannot bind " + a.host + ":" + std::to_string(a.port));
  }
  log.info("listening on http://{}:{}", a.host, port);
  return server.listen() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  auto log = make_logger();

  CLI::App app{"Sparse interpretable entity-type representations"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  g.argv.assign(argv + 1, argv + argc);
  app.add_option("--seed", g.seed, "Seed for every random draw")
      ->capture_default_str();
  app.add_option("--config", g.config, "JSON configuration file")
      ->check(CLI::ExistingFile);

  SynthArgs synth;
  auto* s = app.add_subcommand("synth", "Write a synthetic dataset");
  s->add_option("--out", synth.out, "Output directory")->required();
  s->add_option("--classes", synth.config.classes)->capture_default_str();
  s->add_option("--pairs", synth.config.pairs)->capture_default_str();
  s->add_option("--teacher-dim", synth.config.teacher_dim)
      ->capture_default_str();
  s->add_option("--noise", synth.config.teacher_noise)->capture_default_str();
  s->add_option("--corpus-size", synth.sizes.corpus)->capture_default_str();
  s->add_option("--train-size", synth.sizes.train)->capture_default_str();
  s->add_option("--dev-size", synth.sizes.dev)->capture_default_str();
  s->add_option("--test-size", synth.sizes.test)->capture_default_str();

  TypesArgs types;
  auto* t = app.add_subcommand("types", "Search a type system");
  t->add_option("--types", types.types)->required()->check(CLI::ExistingFile);
  t->add_option("--query", types.query)->required();
  t->add_option("--limit", types.limit)->capture_default_str();

  PretrainArgs pre;
  auto* p = app.add_subcommand("pretrain", "Pre-train on a typed corpus");
  p->add_option("--corpus", pre.corpus)->required()->check(CLI::ExistingFile);
  p->add_option("--types", pre.types)->required()->check(CLI::ExistingFile);
  p->add_option("--mode", pre.mode, "ier, end-to-end or decoder-only")
      ->required()
      ->check(CLI::IsMember({"ier", "end-to-end", "decoder-only"}));
  p->add_option("--ier", pre.ier, "Checkpoint supplying encoder and E")
      ->check(CLI::ExistingFile);
  p->add_option("--vectors", pre.vectors, "External encoder outputs")
      ->check(CLI::ExistingFile);
  p->add_option("--out", pre.out, "Checkpoint to write")->required();
  p->add_option("--report", pre.report, "Loss trace JSON");
  p->add_option("--epochs", pre.epochs)->check(CLI::PositiveNumber);
  p->add_option("--batch-size", pre.batch_size);
  p->add_option("--lr", pre.lr)->check(CLI::PositiveNumber);
  p->add_option("--dim", pre.dim)->check(CLI::PositiveNumber);
  p->add_option("--embed-dim", pre.embed_dim)->check(CLI::PositiveNumber);
  p->add_option("--decoder-depth", pre.decoder_depth)
      ->check(CLI::PositiveNumber);
  p->add_option("--lambda", pre.lambda)->check(CLI::NonNegativeNumber);

  FinetuneArgs ft;
  auto* f = app.add_subcommand("finetune", "Train a task head");
  f->add_option("--model", ft.model)->required()->check(CLI::ExistingFile);
  f->add_option("--train", ft.train)->required()->check(CLI::ExistingFile);
  f->add_option("--dev", ft.dev)->required()->check(CLI::ExistingFile);
  f->add_option("--task", ft.task)
      ->check(CLI::IsMember({"classification", "regression"}))
      ->capture_default_str();
  f->add_option("--vectors", ft.vectors)->check(CLI::ExistingFile);
  f->add_option("--mode", ft.mode, "decoder-only or end-to-end")
      ->check(CLI::IsMember({"decoder-only", "end-to-end"}));
  f->add_flag("--reinit-decoder", ft.reinit_decoder,
              "Start from a random projection and decoder");
  f->add_option("--out", ft.out)->required();
  f->add_option("--report", ft.report, "Training trace JSON");
  f->add_option("--epochs", ft.epochs, "Maximum epochs")
      ->check(CLI::PositiveNumber);
  f->add_option("--patience", ft.patience)->check(CLI::PositiveNumber);
  f->add_option("--batch-size", ft.batch_size);
  f->add_option("--lr", ft.lr)->check(CLI::PositiveNumber);

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Score a dataset");
  e->add_option("--model", ev.model)->required()->check(CLI::ExistingFile);
  e->add_option("--data", ev.data)->required()->check(CLI::ExistingFile);
  e->add_option("--vectors", ev.vectors)->check(CLI::ExistingFile);
  e->add_option("--out", ev.out, "Report JSON");

  ManipulateArgs man;
  auto* m = app.add_subcommand("manipulate", "Counterfactual error campaign");
  m->add_option("--model", man.model)->required()->check(CLI::ExistingFile);
  m->add_option("--eval", man.eval)->required()->check(CLI::ExistingFile);
  m->add_option("--types", man.types)->required()->check(CLI::ExistingFile);
  m->add_option("--class-sets", man.class_sets)
      ->required()
      ->check(CLI::ExistingFile);
  m->add_option("--strategy", man.strategies, "fix, promote, both or all")
      ->check(CLI::IsMember({"fix", "promote", "both", "all"}));
  m->add_option("--out", man.out, "Report JSON");
  m->add_option("--table", man.table, "Text table");

  PrototypesArgs proto;
  auto* pr = app.add_subcommand("prototypes", "Build class prototypes");
  pr->add_option("--eval", proto.eval)->required()->check(CLI::ExistingFile);
  pr->add_option("--types", proto.types)->required()->check(CLI::ExistingFile);
  pr->add_option("--out", proto.out, "Prototypes JSON-lines");
  pr->add_option("--coords", proto.coords, "2D coordinates CSV");
  pr->add_option("--grouping", proto.grouping, "Negative prototype grouping")
      ->check(CLI::IsMember({"by_true", "by_pattern"}))
      ->capture_default_str();
  pr->add_option("--top", proto.top)->capture_default_str();

  GradcheckArgs gc;
  auto* gcs = app.add_subcommand("gradcheck", "Finite-difference self check");
  gcs->add_option("--cases", gc.cases)->capture_default_str();

  ServeArgs serve;
  auto* sv = app.add_subcommand("serve", "HTTP debugging service");
  sv->add_option("--model", serve.model)->required()->check(CLI::ExistingFile);
  sv->add_option("--types", serve.types)->required()->check(CLI::ExistingFile);
  sv->add_option("--class-sets", serve.class_sets)->check(CLI::ExistingFile);
  sv->add_option("--prototypes", serve.prototypes)->check(CLI::ExistingFile);
  sv->add_option("--host", serve.host)->capture_default_str();
  sv->add_option("--port", serve.port)
      ->check(CLI::Range(0, 65535))
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& err) {
    return app.exit(err);
  } catch (const CLI::CallForAllHelp& err) {
    return app.exit(err);
  } catch (const CLI::ParseError& err) {
    std::cerr << err.what() << "\n\n";
    const auto chosen = app.get_subcommands();
    std::cerr << (chosen.empty() ? app.help() : chosen.front()->help());
    return 1;
  }

  try {
    if (*s) return cmd_synth(synth, g, *log);
    if (*t) return cmd_types(types);
    if (*p) return cmd_pretrain(pre, g, *log);
    if (*f) return cmd_finetune(ft, g, *log);
    if (*e) return cmd_eval(ev, g);
    if (*m) return cmd_manipulate(man, g);
    if (*pr) return cmd_prototypes(proto, g);
    if (*gcs) return cmd_gradcheck(gc, g, *log);
    if (*sv) return cmd_serve(serve, g, *log);
  } catch (const ValidationError& err) {
    log->error("{}", err.what());
    return 1;
  } catch (const DimensionError& err) {
    log->error("{}", err.what());
    return 1;
  } catch (const std::exception& err) {
    log->error("{}", err.what());
    return 2;
  }
  return 2;
}
