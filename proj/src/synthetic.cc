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

#include "itsirl/synthetic.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <random>
#include <string_view>

#include <nlohmann/json.hpp>

#include "itsirl/errors.h"

namespace itsirl {
namespace {

constexpr std::array<std::string_view, 8> kKeywords = {
    "cell", "chemical", "gene", "organism",
    "disease", "tissue", "anatomy", "protein"};

constexpr std::array<std::string_view, 24> kFiller = {
    "the",      "of",       "in",      "was",      "observed", "with",
    "patients", "levels",   "during",  "after",    "study",    "increased",
    "reduced",  "samples",  "were",    "and",      "response", "expression",
    "analysis", "activity", "cohort",  "measured", "control",  "treatment"};

// Match-indicator columns are weighted up so the class signal dominates the
// lexical part of h.
constexpr double kMatchWeight = 2.0;
constexpr double kTeacherScale = 0.5;

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32), 0x73796e74u};
  return std::mt19937_64(seq);
}

std::size_t uniform(std::mt19937_64& rng, std::size_t n) {
  return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

int anchor(const SyntheticConfig& c, std::size_t block, std::size_t i) {
  return static_cast<int>(block * 2 * c.pairs + i);
}

int partner(const SyntheticConfig& c, std::size_t block, std::size_t i) {
  return static_cast<int>(block * 2 * c.pairs + c.pairs + i);
}

std::string context_words(std::mt19937_64& rng) {
  const std::size_t n = 3 + uniform(rng, 4);
  std::string out;
  for (std::size_t i = 0; i < n; ++i) {
    if (i) out += ' ';
    out += kFiller[uniform(rng, kFiller.size())];
  }
  return out;
}

std::string mention_words(const SyntheticWorld& world, std::vector<int> types,
                          std::mt19937_64& rng) {
  std::shuffle(types.begin(), types.end(), rng);
  std::string out;
  for (int t : types) {
    if (!out.empty()) out += ' ';
    out += world.type_tokens[t];
  }
  return out;
}

// Which class (if any) has a matched anchor/partner pair among types.
std::vector<double> match_features(const SyntheticWorld& world,
                                   const std::vector<int>& types) {
  const SyntheticConfig& c = world.config;
  std::vector<double> match(c.classes, 0.0);
  for (std::size_t block = 0; block < c.classes; ++block) {
    for (std::size_t i = 0; i < c.pairs; ++i) {
      const bool a = std::binary_search(types.begin(), types.end(),
                                        anchor(c, block, i));
      const bool b = std::binary_search(types.begin(), types.end(),
                                        partner(c, block, i));
      if (a && b) match[block] = 1.0;
    }
  }
  return match;
}

Tensor teacher_vector(const SyntheticWorld& world,
                      const std::vector<int>& types, std::mt19937_64& rng) {
  const std::size_t num_types = world.types.size();
  std::vector<double> f(num_types + world.config.classes, 0.0);
  for (int t : types) f[t] = 1.0;
  const std::vector<double> match = match_features(world, types);
  for (std::size_t c = 0; c < match.size(); ++c) {
    f[num_types + c] = kMatchWeight * match[c];
  }
  std::normal_distribution<double> noise(0.0, world.config.teacher_noise);
  Tensor h(world.config.teacher_dim, 1);
  for (std::size_t r = 0; r < h.rows(); ++r) {
    double acc = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) acc += world.teacher(r, j) * f[j];
    h[r] = static_cast<float>(acc + noise(rng));
  }
  return h;
}

}  // namespace

SyntheticWorld make_world(const SyntheticConfig& config) {
  if (config.classes < 2 || config.classes > kKeywords.size()) {
    throw ValidationError("synthetic world needs 2..8 classes");
  }
  if (config.pairs < 2) {
    throw ValidationError("synthetic world needs at least 2 pairs per class");
  }
  if (config.teacher_dim == 0) {
    throw ValidationError("teacher dimension must be positive");
  }
  SyntheticWorld world;
  world.config = config;
  std::vector<std::string> names;
  for (std::size_t block = 0; block < config.classes; ++block) {
    const std::string kw(kKeywords[block]);
    for (const char* role : {"anchor", "partner"}) {
      for (std::size_t i = 0; i < config.pairs; ++i) {
        names.push_back(kw + " " + role + " " + std::to_string(i));
        world.type_tokens.push_back(kw + "_" + role[0] + std::to_string(i));
      }
    }
    std::string label = kw;
    label[0] = static_cast<char>(label[0] - 'a' + 'A');
    world.classes.push_back(label);
    world.rules[label] = ClassRule{{kw}, {}};
  }
  std::sort(world.classes.begin(), world.classes.end());
  world.types = TypeSystem(std::move(names));

  auto rng = make_rng(config.seed, 0);
  std::normal_distribution<double> gauss(0.0, kTeacherScale);
  world.teacher = Tensor(config.teacher_dim, world.types.size() + config.classes);
  for (std::size_t i = 0; i < world.teacher.size(); ++i) {
    world.teacher[i] = gauss(rng);
  }
  return world;
}

std::vector<SyntheticExample> sample_examples(const SyntheticWorld& world,
                                              std::size_t count,
                                              const std::string& id_prefix,
                                              std::uint64_t stream) {
  const SyntheticConfig& c = world.config;
  auto rng = make_rng(c.seed, stream);
  std::vector<SyntheticExample> out;
  out.reserve(count);
  for (std::size_t n = 0; n < count; ++n) {
    const std::size_t block = n % c.classes;
    const std::size_t i = uniform(rng, c.pairs);
    const std::size_t other =
        (block + 1 + uniform(rng, c.classes - 1)) % c.classes;
    const std::size_t j = uniform(rng, c.pairs);
    const std::size_t k = (j + 1 + uniform(rng, c.pairs - 1)) % c.pairs;

    SyntheticExample ex;
    ex.id = id_prefix + std::to_string(n);
    ex.types = {anchor(c, block, i), partner(c, block, i),
                anchor(c, other, j), partner(c, other, k)};
    std::sort(ex.types.begin(), ex.types.end());
    ex.mention = mention_words(world, ex.types, rng);
    ex.context = context_words(rng);
    std::string label(kKeywords[block]);
    label[0] = static_cast<char>(label[0] - 'a' + 'A');
    ex.label = label;
    ex.h = teacher_vector(world, ex.types, rng);
    out.push_back(std::move(ex));
  }
  return out;
}

std::vector<TaskRecord> sample_similarity_pairs(const SyntheticWorld& world,
                                                std::size_t count,
                                                const std::string& id_prefix,
                                                std::uint64_t stream) {
  auto rng = make_rng(world.config.seed, stream);
  const std::vector<SyntheticExample> base =
      sample_examples(world, count, id_prefix, stream ^ 0x5157u);
  const std::size_t num_types = world.types.size();
  std::vector<TaskRecord> out;
  out.reserve(count);
  for (const SyntheticExample& ex : base) {
    const std::size_t shared = uniform(rng, ex.types.size() + 1);
    std::vector<int> first = ex.types;
    std::shuffle(first.begin(), first.end(), rng);
    std::vector<int> second(first.begin(), first.begin() + shared);
    while (second.size() < ex.types.size()) {
      const int t = static_cast<int>(uniform(rng, num_types));
      if (std::find(ex.types.begin(), ex.types.end(), t) == ex.types.end() &&
          std::find(second.begin(), second.end(), t) == second.end()) {
        second.push_back(t);
      }
    }
    TaskRecord r;
    r.id = ex.id;
    r.text_a = mention_words(world, ex.types, rng);
    r.text_b = mention_words(world, second, rng);
    r.score = kMaxSimilarity * static_cast<double>(shared) /
              static_cast<double>(ex.types.size());
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<PretrainRecord> to_pretrain_records(
    const std::vector<SyntheticExample>& examples,
    const SyntheticWorld& world) {
  std::vector<PretrainRecord> out;
  out.reserve(examples.size());
  for (const SyntheticExample& ex : examples) {
    for (int t : ex.types) {
      if (static_cast<std::size_t>(t) >= world.types.size()) {
        throw IndexError("synthetic type index out of range");
      }
    }
    out.push_back({ex.id, ex.mention, ex.context, ex.types});
  }
  return out;
}

std::vector<TaskRecord> to_task_records(
    const std::vector<SyntheticExample>& examples) {
  std::vector<TaskRecord> out;
  out.reserve(examples.size());
  for (const SyntheticExample& ex : examples) {
    out.push_back({ex.id, ex.mention, ex.context, ex.label, 0.0});
  }
  return out;
}

void add_teacher_vectors(const std::vector<SyntheticExample>& examples,
                         ExternalVectorStore& store) {
  for (const SyntheticExample& ex : examples) store.insert(ex.id, ex.h);
}

std::vector<std::filesystem::path> write_synthetic_dataset(
    const SyntheticConfig& config, const SyntheticSizes& sizes,
    const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  const SyntheticWorld world = make_world(config);
  std::vector<std::filesystem::path> written;
  auto path = [&](const char* name) {
    written.push_back(dir / name);
    return written.back();
  };

  write_type_system(world.types, path("types.txt"));
  nlohmann::json rules = nlohmann::json::object();
  for (const auto& [label, rule] : world.rules) {
    rules[label] = {{"include", rule.include}, {"exclude", rule.exclude}};
  }
  write_file(path("class_rules.json"), rules.dump(2) + "\n");

  ExternalVectorStore vectors;
  const auto corpus = sample_examples(world, sizes.corpus, "c", 1);
  write_corpus(to_pretrain_records(corpus, world), world.types,
               path("corpus.jsonl"));
  add_teacher_vectors(corpus, vectors);

  const std::pair<const char*, std::size_t> splits[] = {
      {"train", sizes.train}, {"dev", sizes.dev}, {"test", sizes.test}};
  std::uint64_t stream = 2;
  for (const auto& [name, count] : splits) {
    const auto examples =
        sample_examples(world, count, std::string(name) + "-", stream++);
    write_task_records(to_task_records(examples), TaskKind::kClassification,
                       path((std::string(name) + ".jsonl").c_str()));
    add_teacher_vectors(examples, vectors);
  }
  const std::pair<const char*, std::size_t> pair_splits[] = {
      {"sim_train", sizes.pairs_train},
      {"sim_dev", sizes.pairs_dev},
      {"sim_test", sizes.pairs_test}};
  for (const auto& [name, count] : pair_splits) {
    write_task_records(
        sample_similarity_pairs(world, count, std::string(name) + "-", stream++),
        TaskKind::kRegression, path((std::string(name) + ".jsonl").c_str()));
  }
  write_external_vectors(vectors, path("vectors.jsonl"));
  return written;
}

}  // namespace itsirl
