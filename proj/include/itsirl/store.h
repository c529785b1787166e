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

#ifndef ITSIRL_STORE_H_
#define ITSIRL_STORE_H_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "itsirl/counterfactual.h"
#include "itsirl/encoder.h"
#include "itsirl/model.h"
#include "itsirl/tasks.h"
#include "itsirl/type_system.h"

namespace itsirl {

// ---------------------------------------------------------------------------
// Datasets (JSON-lines).

struct PretrainRecord {
  std::string id;
  std::string mention;
  std::string context;
  std::vector<int> types;  // resolved indices
};

// Classification: text_a = mention, text_b = context, label.
// Regression: text_a = s1, text_b = s2, score in [0, 4].
struct TaskRecord {
  std::string id;
  std::string text_a;
  std::string text_b;
  std::string label;
  double score = 0.0;
};

inline constexpr double kMaxSimilarity = 4.0;

// Lines {"id", "mention", "context", "types": [name or index, ...]}.
// Unknown types are collected across the whole file and reported with line
// numbers in one DataError.
std::vector<PretrainRecord> load_corpus(const std::filesystem::path& path,
                                        const TypeSystem& types);
void write_corpus(std::span<const PretrainRecord> records,
                  const TypeSystem& types, const std::filesystem::path& path);

// Classification lines {"id", "mention", "context", "label"}; regression
// lines {"id", "s1", "s2", "score"}.
std::vector<TaskRecord> load_task_records(const std::filesystem::path& path,
                                          TaskKind kind);
void write_task_records(std::span<const TaskRecord> records, TaskKind kind,
                        const std::filesystem::path& path);

// Sorted unique labels.
std::vector<std::string> class_vocabulary(std::span<const TaskRecord> records);

// Input for one example: the external vector for id when the model uses
// them, tokens otherwise.
ModelInput make_input(const std::string& id, std::string_view text_a,
                      std::string_view text_b, const ItsIRLParams& params,
                      const TokenVocab& vocab,
                      const ExternalVectorStore* vectors);

std::vector<PretrainExample> make_pretrain_examples(
    std::span<const PretrainRecord> records, const ItsIRLParams& params,
    const TokenVocab& vocab, const ExternalVectorStore* vectors);

// Throws DataError naming the example id for labels outside head.classes.
std::vector<TaskExample> make_task_examples(
    std::span<const TaskRecord> records, const ItsIRLParams& params,
    const TaskHead& head, const TokenVocab& vocab,
    const ExternalVectorStore* vectors);

// ---------------------------------------------------------------------------
// Checkpoints.
//
// Layout: magic "ITSIRL1\n", u64 LE metadata length, UTF-8 JSON metadata,
// then per tensor: u16 LE name length, name, u32 LE rows, u32 LE cols,
// rows*cols float32 LE values, row-major.

inline constexpr std::string_view kCheckpointMagic = "ITSIRL1\n";
inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  ItsIRLParams params;
  std::optional<TaskHead> head;
  TokenVocab vocab;
  std::uint64_t seed = 0;
  std::string creation_mode;
};

// Values are narrowed to float32; saving a loaded checkpoint reproduces the
// file byte for byte.
void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path);
std::string serialize_checkpoint(const Checkpoint& checkpoint);

// When types is given, its size must match the stored |T|.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const TypeSystem* types = nullptr);
Checkpoint parse_checkpoint(std::string_view bytes,
                            const TypeSystem* types = nullptr);

// ---------------------------------------------------------------------------
// Configuration: one JSON document, every field optional.

struct RunConfig {
  ModelConfig model;
  TrainConfig pretrain;
  FinetuneConfig finetune;
  double v_low = 0.0;
  double v_high = 1.0;
  double display_threshold = 0.01;
};

RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json to_json(const RunConfig& config);

// ---------------------------------------------------------------------------
// Reports.

nlohmann::json to_json(const EvalReport& report);
EvalReport eval_report_from_json(const nlohmann::json& doc);
EvalReport load_eval_report(const std::filesystem::path& path);
nlohmann::json to_json(const CampaignReport& report);
nlohmann::json to_json(const PretrainTrace& trace);
nlohmann::json to_json(const FinetuneTrace& trace);

// ---------------------------------------------------------------------------
// Run manifests and small file helpers.

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t value);
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Writes <output>.manifest.json: command, seed, config, and the basename and
// FNV-1a hash of every input.
void write_manifest(const std::filesystem::path& output,
                    std::string_view command, std::uint64_t seed,
                    const nlohmann::json& config,
                    std::span<const std::filesystem::path> inputs);

}  // namespace itsirl

#endif  // ITSIRL_STORE_H_
