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

#ifndef ITSIRL_TASKS_H_
#define ITSIRL_TASKS_H_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itsirl/autodiff.h"
#include "itsirl/model.h"
#include "itsirl/optimizer.h"

namespace itsirl {

enum class TaskKind { kClassification, kRegression };

const char* to_string(TaskKind kind);
TaskKind parse_task_kind(std::string_view text);

// Linear layer over the decoder output r: C x d logits, or 1 x d score.
struct TaskHead {
  TaskKind kind = TaskKind::kClassification;
  std::vector<std::string> classes;  // empty for regression
  AffineParams linear;

  static TaskHead classification(std::vector<std::string> classes,
                                 std::size_t dim, std::uint64_t seed);
  static TaskHead regression(std::size_t dim, std::uint64_t seed);

  std::size_t num_outputs() const { return linear.weight.rows(); }
  std::optional<std::size_t> class_index(std::string_view label) const;
};

struct HeadVars {
  Var w, b;
};

HeadVars bind_head(Tape& tape, const TaskHead& head, bool trainable,
                   std::vector<std::pair<std::string, Var>>* leaves = nullptr);
Var head_output(Tape& tape, const HeadVars& head, Var r);

struct TaskExample {
  std::string id;
  ModelInput input;
  int label = -1;      // classification
  double score = 0.0;  // regression
};

enum class FinetuneMode { kDecoderOnly, kEndToEnd };

const char* to_string(FinetuneMode mode);
FinetuneMode parse_finetune_mode(std::string_view text);

struct FinetuneConfig {
  FinetuneMode mode = FinetuneMode::kDecoderOnly;
  int max_epochs = 100;
  int patience = 5;
  std::size_t batch_size = 32;
  AdamConfig adam;
  std::uint64_t seed = 0;
};

struct FinetuneEpoch {
  int epoch = 0;            // 0 = before training
  double train_loss = 0.0;  // mean over the epoch; 0 for epoch 0
  double dev_metric = 0.0;  // accuracy, or negative MSE
};

struct FinetuneTrace {
  std::vector<FinetuneEpoch> epochs;
  int best_epoch = 0;
  double best_dev_metric = 0.0;
};

struct FinetuneResult {
  ItsIRLParams params;
  TaskHead head;
  FinetuneTrace trace;
};

// Trains head plus projection/decoder (and encoder/type layer in end-to-end
// mode). Dev metric is checked after every epoch; training stops once
// `patience` epochs pass without a strict improvement and the parameters of
// the best epoch are returned.
FinetuneResult finetune(std::span<const TaskExample> train,
                        std::span<const TaskExample> dev,
                        const ItsIRLParams& params, const TaskHead& head,
                        const FinetuneConfig& config);

// Head output computed from a type vector alone (no re-encoding): class
// probabilities for classification, a single score for regression.
std::vector<double> outputs_from_types(std::span<const double> types,
                                       const ItsIRLParams& params,
                                       const TaskHead& head);

struct ClassPrediction {
  std::vector<double> probabilities;
  int label = 0;  // argmax, ties to lowest index
  TypeVector types;
};

ClassPrediction predict_class(const ModelInput& input,
                              const ItsIRLParams& params,
                              const TaskHead& head);

// Pair input: s1 in the mention slot, s2 in the context slot.
double predict_similarity(const ModelInput& input, const ItsIRLParams& params,
                          const TaskHead& head);
double predict_similarity(std::string_view s1, std::string_view s2,
                          const TokenVocab& vocab, const ItsIRLParams& params,
                          const TaskHead& head);

struct EvalRow {
  std::string id;
  int gold = -1;
  int predicted = -1;
  double gold_score = 0.0;
  double predicted_score = 0.0;
  std::vector<double> probabilities;
  TypeVector types;
};

struct ErrorPattern {
  int truth = 0;
  int predicted = 0;
  std::size_t count = 0;
};

struct EvalReport {
  TaskKind kind = TaskKind::kClassification;
  std::vector<std::string> classes;
  std::vector<EvalRow> rows;  // dataset order
  double metric = 0.0;        // accuracy or MSE
  // Descending count, then (true, predicted) label names ascending.
  std::vector<ErrorPattern> errors;

  std::size_t correct() const;
};

// Examples are scored in parallel; metrics are reduced in dataset order.
EvalReport evaluate(std::span<const TaskExample> data,
                    const ItsIRLParams& params, const TaskHead& head);

// Recomputes metric and error patterns from the rows.
void summarize(EvalReport& report);

}  // namespace itsirl

#endif  // ITSIRL_TASKS_H_
