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

#include "itsirl/tasks.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <tuple>

#include "itsirl/errors.h"
#include "parallel.h"
#include "trainer.h"

namespace itsirl {

const char* to_string(TaskKind kind) {
  return kind == TaskKind::kClassification ? "classification" : "regression";
}

TaskKind parse_task_kind(std::string_view text) {
  if (text == "classification") return TaskKind::kClassification;
  if (text == "regression") return TaskKind::kRegression;
  throw ValidationError("unknown task kind '" + std::string(text) + "'");
}

const char* to_string(FinetuneMode mode) {
  return mode == FinetuneMode::kDecoderOnly ? "decoder-only" : "end-to-end";
}

FinetuneMode parse_finetune_mode(std::string_view text) {
  if (text == "decoder-only") return FinetuneMode::kDecoderOnly;
  if (text == "end-to-end") return FinetuneMode::kEndToEnd;
  throw ValidationError("unknown fine-tuning mode '" + std::string(text) + "'");
}

TaskHead TaskHead::classification(std::vector<std::string> classes,
                                  std::size_t dim, std::uint64_t seed) {
  if (classes.empty()) throw DataError("classification head needs classes");
  TaskHead head;
  head.kind = TaskKind::kClassification;
  init_affine(head.linear, classes.size(), dim, seed);
  head.classes = std::move(classes);
  return head;
}

TaskHead TaskHead::regression(std::size_t dim, std::uint64_t seed) {
  TaskHead head;
  head.kind = TaskKind::kRegression;
  init_affine(head.linear, 1, dim, seed);
  return head;
}

std::optional<std::size_t> TaskHead::class_index(std::string_view label) const {
  auto it = std::find(classes.begin(), classes.end(), label);
  if (it == classes.end()) return std::nullopt;
  return static_cast<std::size_t>(it - classes.begin());
}

HeadVars bind_head(Tape& tape, const TaskHead& head, bool trainable,
                   std::vector<std::pair<std::string, Var>>* leaves) {
  HeadVars vars{tape.parameter(head.linear.weight, trainable),
                tape.parameter(head.linear.bias, trainable)};
  if (trainable && leaves != nullptr) {
    leaves->emplace_back("head.weight", vars.w);
    leaves->emplace_back("head.bias", vars.b);
  }
  return vars;
}

Var head_output(Tape& tape, const HeadVars& head, Var r) {
  return affine(tape, head.w, head.b, r);
}

std::vector<double> outputs_from_types(std::span<const double> types,
                                       const ItsIRLParams& params,
                                       const TaskHead& head) {
  if (types.size() != params.config.num_types) {
    throw DimensionError("type vector has " + std::to_string(types.size()) +
                         " entries, model expects " +
                         std::to_string(params.config.num_types));
  }
  Tape tape;
  const ModelVars vars = bind_model(tape, params, {});
  const HeadVars hv = bind_head(tape, head, false);
  const Var t =
      tape.constant(Tensor::column(std::vector<double>(types.begin(), types.end())));
  const Tensor& out = tape.value(head_output(tape, hv, decode(tape, vars, t)));
  if (head.kind == TaskKind::kRegression) return {out[0]};
  return softmax(out.values());
}

ClassPrediction predict_class(const ModelInput& input,
                              const ItsIRLParams& params,
                              const TaskHead& head) {
  const Tensor t = type_layer(params, represent(params, input));
  ClassPrediction p;
  p.types.assign(t.values().begin(), t.values().end());
  p.probabilities = outputs_from_types(p.types, params, head);
  p.label = static_cast<int>(argmax(p.probabilities));
  return p;
}

double predict_similarity(const ModelInput& input, const ItsIRLParams& params,
                          const TaskHead& head) {
  const Tensor t = type_layer(params, represent(params, input));
  return outputs_from_types(t.values(), params, head)[0];
}

double predict_similarity(std::string_view s1, std::string_view s2,
                          const TokenVocab& vocab, const ItsIRLParams& params,
                          const TaskHead& head) {
  ModelInput input;
  input.tokens = tokenize(s1, s2, vocab, params.config.max_len);
  return predict_similarity(input, params, head);
}

std::size_t EvalReport::correct() const {
  return static_cast<std::size_t>(
      std::count_if(rows.begin(), rows.end(),
                    [](const EvalRow& r) { return r.gold == r.predicted; }));
}

void summarize(EvalReport& report) {
  report.errors.clear();
  if (report.rows.empty()) {
    report.metric = 0.0;
    return;
  }
  const double n = static_cast<double>(report.rows.size());
  if (report.kind == TaskKind::kRegression) {
    double total = 0.0;
    for (const EvalRow& r : report.rows) {
      const double d = r.predicted_score - r.gold_score;
      total += d * d;
    }
    report.metric = total / n;
    return;
  }
  std::map<std::pair<int, int>, std::size_t> counts;
  for (const EvalRow& r : report.rows) {
    if (r.gold != r.predicted) ++counts[{r.gold, r.predicted}];
  }
  report.metric = static_cast<double>(report.correct()) / n;
  for (const auto& [key, count] : counts) {
    report.errors.push_back({key.first, key.second, count});
  }
  const auto& names = report.classes;
  std::stable_sort(report.errors.begin(), report.errors.end(),
                   [&](const ErrorPattern& a, const ErrorPattern& b) {
                     if (a.count != b.count) return a.count > b.count;
                     return std::tie(names[a.truth], names[a.predicted]) <
                            std::tie(names[b.truth], names[b.predicted]);
                   });
}

EvalReport evaluate(std::span<const TaskExample> data,
                    const ItsIRLParams& params, const TaskHead& head) {
  EvalReport report;
  report.kind = head.kind;
  report.classes = head.classes;
  report.rows.resize(data.size());
  const auto n = static_cast<std::int64_t>(data.size());
  internal::LoopErrors errors;
#pragma omp parallel for schedule(dynamic, 8)
  for (std::int64_t i = 0; i < n; ++i) {
    errors.run(static_cast<std::size_t>(i), [&] {
      const TaskExample& ex = data[i];
      EvalRow& row = report.rows[i];
      row.id = ex.id;
      const Tensor t = type_layer(params, represent(params, ex.input));
      row.types.assign(t.values().begin(), t.values().end());
      const std::vector<double> out =
          outputs_from_types(row.types, params, head);
      if (head.kind == TaskKind::kClassification) {
        row.gold = ex.label;
        row.probabilities = out;
        row.predicted = static_cast<int>(argmax(out));
      } else {
        row.gold_score = ex.score;
        row.predicted_score = out[0];
      }
    });
  }
  errors.rethrow();
  summarize(report);
  return report;
}

namespace {

void validate_examples(std::span<const TaskExample> data,
                       const TaskHead& head, const char* split) {
  if (data.empty()) {
    throw DataError(std::string(split) + " split is empty");
  }
  for (const TaskExample& ex : data) {
    if (head.kind == TaskKind::kClassification) {
      if (ex.label < 0 ||
          static_cast<std::size_t>(ex.label) >= head.num_outputs()) {
        throw DataError("example '" + ex.id + "' has label " +
                        std::to_string(ex.label) + " outside " +
                        std::to_string(head.num_outputs()) + " classes");
      }
    } else if (!std::isfinite(ex.score)) {
      throw DataError("example '" + ex.id + "' has a non-finite score");
    }
  }
}

double dev_metric(std::span<const TaskExample> dev, const ItsIRLParams& params,
                  const TaskHead& head) {
  const EvalReport report = evaluate(dev, params, head);
  return head.kind == TaskKind::kClassification ? report.metric
                                                : -report.metric;
}

}  // namespace

FinetuneResult finetune(std::span<const TaskExample> train,
                        std::span<const TaskExample> dev,
                        const ItsIRLParams& params, const TaskHead& head,
                        const FinetuneConfig& config) {
  validate_examples(train, head, "train");
  validate_examples(dev, head, "dev");
  if (config.patience < 1) throw ValidationError("patience must be >= 1");

  std::set<ParamGroup> groups = {ParamGroup::kProjection, ParamGroup::kDecoder,
                                 ParamGroup::kHead};
  if (config.mode == FinetuneMode::kEndToEnd) {
    groups.insert(ParamGroup::kTypeLayer);
    if (!params.config.external_encoder) groups.insert(ParamGroup::kEncoder);
  }

  ItsIRLParams current = params;
  TaskHead current_head = head;
  FinetuneResult best{current, current_head, {}};
  FinetuneTrace& trace = best.trace;
  trace.best_dev_metric = dev_metric(dev, current, current_head);
  trace.best_epoch = 0;
  trace.epochs.push_back({0, 0.0, trace.best_dev_metric});

  OptimizerState optimizer;
  optimizer.config = config.adam;
  std::vector<std::size_t> order(train.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(config.seed);
  const bool classify = head.kind == TaskKind::kClassification;

  int since_best = 0;
  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    std::shuffle(order.begin(), order.end(), rng);
    const double total = internal::train_epoch(
        current, &current_head, groups, order, config.batch_size,
        [&](Tape& tape, const internal::BoundModel& bound, std::size_t i) {
          const TaskExample& ex = train[i];
          const Var h = represent(tape, bound.model, ex.input);
          const Var r = decode(tape, bound.model, type_layer(tape, bound.model, h));
          const Var out = head_output(tape, bound.head, r);
          if (classify) return softmax_cross_entropy(tape, out, ex.label);
          return mse(tape, out, tape.constant(Tensor(1, 1, ex.score)));
        },
        optimizer, epoch);
    const double metric = dev_metric(dev, current, current_head);
    trace.epochs.push_back(
        {epoch, total / static_cast<double>(train.size()), metric});
    if (metric > trace.best_dev_metric) {
      trace.best_dev_metric = metric;
      trace.best_epoch = epoch;
      best.params = current;
      best.head = current_head;
      since_best = 0;
    } else if (++since_best >= config.patience) {
      break;
    }
  }
  return best;
}

}  // namespace itsirl
