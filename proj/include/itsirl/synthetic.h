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

#ifndef ITSIRL_SYNTHETIC_H_
#define ITSIRL_SYNTHETIC_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "itsirl/encoder.h"
#include "itsirl/store.h"
#include "itsirl/tensor.h"
#include "itsirl/type_system.h"

namespace itsirl {

// A toy world with one block of 2 * pairs entity types per class. Block c
// holds "anchor" types a0..a{pairs-1} and "partner" types b0..b{pairs-1}.
//
// An example of class c carries one matched pair (a_i, b_i) from block c and
// an unmatched pair (a_j, b_k), j != k, from some other block. The label is a
// deterministic function of the gold types, the class type sets are
// disjoint, and block counts alone do not reveal the class.
//
// Teacher vectors stand in for a pretrained language model: a fixed random
// linear image of the type indicators plus one "matched pair" indicator per
// class, with Gaussian noise, rounded to float.
struct SyntheticConfig {
  std::size_t classes = 4;  // at most 8
  std::size_t pairs = 4;    // per class, >= 2
  std::size_t teacher_dim = 64;
  double teacher_noise = 0.7;
  std::uint64_t seed = 7;
};

struct SyntheticWorld {
  SyntheticConfig config;
  TypeSystem types;
  std::vector<std::string> classes;  // sorted
  std::map<std::string, ClassRule> rules;
  std::vector<std::string> type_tokens;  // mention word per type
  Tensor teacher;  // teacher_dim x (|T| + classes)
};

SyntheticWorld make_world(const SyntheticConfig& config);

struct SyntheticExample {
  std::string id;
  std::string mention;
  std::string context;
  std::vector<int> types;  // ascending
  std::string label;
  Tensor h;  // teacher vector
};

// Examples cycle through the classes; stream selects an independent random
// stream so different splits never share draws.
std::vector<SyntheticExample> sample_examples(const SyntheticWorld& world,
                                              std::size_t count,
                                              const std::string& id_prefix,
                                              std::uint64_t stream);

// Pairs of examples (s1, s2) scored by the number of shared gold types,
// scaled to [0, 4].
std::vector<TaskRecord> sample_similarity_pairs(const SyntheticWorld& world,
                                                std::size_t count,
                                                const std::string& id_prefix,
                                                std::uint64_t stream);

std::vector<PretrainRecord> to_pretrain_records(
    const std::vector<SyntheticExample>& examples, const SyntheticWorld& world);
std::vector<TaskRecord> to_task_records(
    const std::vector<SyntheticExample>& examples);
void add_teacher_vectors(const std::vector<SyntheticExample>& examples,
                         ExternalVectorStore& store);

struct SyntheticSizes {
  std::size_t corpus = 2000;
  std::size_t train = 800;
  std::size_t dev = 100;
  std::size_t test = 100;
  std::size_t pairs_train = 200;
  std::size_t pairs_dev = 50;
  std::size_t pairs_test = 50;
};

// Writes types.txt, class_rules.json, corpus.jsonl, train/dev/test.jsonl,
// sim_train/sim_dev/sim_test.jsonl and vectors.jsonl into dir. Returns the
// written paths.
std::vector<std::filesystem::path> write_synthetic_dataset(
    const SyntheticConfig& config, const SyntheticSizes& sizes,
    const std::filesystem::path& dir);

}  // namespace itsirl

#endif  // ITSIRL_SYNTHETIC_H_
