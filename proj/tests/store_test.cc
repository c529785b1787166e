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

#include <cstring>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "itsirl/errors.h"
#include "itsirl/model.h"
#include "itsirl/store.h"
#include "itsirl/tasks.h"
#include "test_util.h"

namespace itsirl {
namespace {

using ::itsirl::testing::TempDir;
using ::itsirl::testing::write_text;

TypeSystem small_types() { return TypeSystem({"cell", "gene", "protein"}); }

Checkpoint random_checkpoint(std::mt19937_64& rng) {
  ModelConfig mc;
  mc.dim = 2 + rng() % 6;
  mc.embed_dim = 2 + rng() % 5;
  mc.num_types = 1 + rng() % 9;
  mc.decoder_depth = 1 + static_cast<int>(rng() % 3);
  mc.type_bias = rng() % 2;
  mc.external_encoder = rng() % 3 == 0;
  mc.lambda = 0.25 * (rng() % 8);
  std::vector<std::string> tokens{"[PAD]", "[UNK]", "[CLS]", "[SEP]"};
  for (std::size_t i = rng() % 5; i > 0; --i) tokens.push_back("w" + std::to_string(i));
  mc.vocab_size = tokens.size();
  Checkpoint c;
  c.params = initialize_params(mc, rng());
  c.vocab = TokenVocab(tokens);
  c.seed = rng();
  c.creation_mode = "pretrain-ier";
  std::normal_distribution<double> n;
  for (auto& t : c.params.tensors()) {
    for (double& v : t.tensor->values()) v = n(rng);
  }
  if (rng() % 2) {
    c.head = rng() % 2 ? TaskHead::classification({"A", "B"}, mc.dim, rng())
                       : TaskHead::regression(mc.dim, rng());
    for (double& v : c.head->linear.bias.values()) v = n(rng);
  }
  return c;
}

TEST(Checkpoint, SaveLoadSaveIsByteIdentical) {
  std::mt19937_64 rng(100);
  for (int i = 0; i < 100; ++i) {
    const Checkpoint c = random_checkpoint(rng);
    const std::string bytes = serialize_checkpoint(c);
    const Checkpoint back = parse_checkpoint(bytes);
    EXPECT_EQ(serialize_checkpoint(back), bytes);
    // Loaded values are the float32 narrowing of the originals.
    const auto a = c.params.tensors();
    const auto b = back.params.tensors();
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t k = 0; k < a.size(); ++k) {
      EXPECT_EQ(a[k].first, b[k].first);
      for (std::size_t j = 0; j < a[k].second->size(); ++j) {
        ASSERT_EQ(static_cast<double>(static_cast<float>((*a[k].second)[j])),
                  (*b[k].second)[j]);
      }
    }
    EXPECT_EQ(back.seed, c.seed);
    EXPECT_EQ(back.head.has_value(), c.head.has_value());
    EXPECT_EQ(back.vocab.tokens(), c.vocab.tokens());
    EXPECT_EQ(back.params.config.external_encoder,
              c.params.config.external_encoder);
  }
}

TEST(Checkpoint, FileRoundTrip) {
  TempDir dir;
  std::mt19937_64 rng(5);
  const Checkpoint c = random_checkpoint(rng);
  save_checkpoint(c, dir / "m.ckpt");
  EXPECT_EQ(read_file(dir / "m.ckpt"), serialize_checkpoint(c));
  EXPECT_EQ(serialize_checkpoint(load_checkpoint(dir / "m.ckpt")),
            serialize_checkpoint(c));
}

TEST(Checkpoint, CorruptMagic) {
  std::mt19937_64 rng(6);
  std::string bytes = serialize_checkpoint(random_checkpoint(rng));
  bytes[0] = 'X';
  try {
    parse_checkpoint(bytes);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("not an ItsIRL checkpoint"),
              std::string::npos);
  }
  EXPECT_THROW(parse_checkpoint("ITS"), FormatError);
}

TEST(Checkpoint, TypeCountMismatch) {
  std::mt19937_64 rng(7);
  Checkpoint c = random_checkpoint(rng);
  ModelConfig mc = c.params.config;
  mc.num_types = 4;
  c.params = initialize_params(mc, 1);
  const std::string bytes = serialize_checkpoint(c);
  const TypeSystem three = small_types();
  EXPECT_THROW(parse_checkpoint(bytes, &three), DimensionError);
  const TypeSystem four({"a", "b", "c", "d"});
  EXPECT_NO_THROW(parse_checkpoint(bytes, &four));
}

TEST(Checkpoint, EveryTruncationIsRejected) {
  std::mt19937_64 rng(8);
  const std::string bytes = serialize_checkpoint(random_checkpoint(rng));
  for (std::size_t len = 0; len < bytes.size(); ++len) {
    EXPECT_THROW(parse_checkpoint(std::string_view(bytes).substr(0, len)),
                 FormatError)
        << len;
  }
  EXPECT_THROW(parse_checkpoint(bytes + "x"), FormatError);
}

TEST(Checkpoint, WrongVersion) {
  std::mt19937_64 rng(9);
  const std::string bytes = serialize_checkpoint(random_checkpoint(rng));
  const std::string key = "\"format_version\":1";
  std::string edited = bytes;
  const auto pos = edited.find(key);
  ASSERT_NE(pos, std::string::npos);
  edited[pos + key.size() - 1] = '2';
  EXPECT_THROW(parse_checkpoint(edited), FormatError);
}

TEST(Corpus, LoadThreeLines) {
  TempDir dir;
  const auto path = write_text(
      dir / "c.jsonl",
      R"({"id": "a", "mention": "p53", "context": "x", "types": ["gene", 2]}
{"id": "b", "mention": "T cells", "context": "y", "types": ["CELL"]}
{"id": "c", "mention": "z", "context": "", "types": []}
)");
  const auto records = load_corpus(path, small_types());
  ASSERT_EQ(records.size(), 3u);
  EXPECT_EQ(records[0].types, (std::vector<int>{1, 2}));
  EXPECT_EQ(records[1].types, (std::vector<int>{0}));
  EXPECT_TRUE(records[2].types.empty());

  write_corpus(records, small_types(), dir / "out.jsonl");
  const auto back = load_corpus(dir / "out.jsonl", small_types());
  EXPECT_EQ(back[0].types, records[0].types);
  EXPECT_EQ(back[1].mention, "T cells");
}

TEST(Corpus, UnknownTypesListedWithLines) {
  TempDir dir;
  const auto path = write_text(
      dir / "c.jsonl",
      R"({"id": "a", "mention": "m", "context": "c", "types": ["tissue"]}
{"id": "b", "mention": "m", "context": "c", "types": ["gene"]}
{"id": "c", "mention": "m", "context": "c", "types": [7, "organ"]}
)");
  try {
    load_corpus(path, small_types());
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 1: 'tissue'"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3: index 7"), std::string::npos) << msg;
    EXPECT_NE(msg.find("line 3: 'organ'"), std::string::npos) << msg;
    EXPECT_EQ(msg.find("line 2"), std::string::npos) << msg;
  }
}

TEST(Corpus, DuplicateIdAndMalformedLine) {
  TempDir dir;
  EXPECT_THROW(
      load_corpus(write_text(dir / "d.jsonl",
                             R"({"id": "a", "mention": "m", "context": "c", "types": []}
{"id": "a", "mention": "m", "context": "c", "types": []}
)"),
                  small_types()),
      DataError);
  EXPECT_THROW(load_corpus(write_text(dir / "m.jsonl", "{\"id\": \"a\"\n"),
                           small_types()),
               FormatError);
  EXPECT_THROW(load_corpus(dir / "absent.jsonl", small_types()), FormatError);
}

TEST(TaskRecords, ClassificationAndRegression) {
  TempDir dir;
  const auto cls = load_task_records(
      write_text(dir / "c.jsonl",
                 R"({"id": "1", "mention": "m", "context": "c", "label": "Gene"}
{"id": "2", "mention": "n", "context": "d", "label": "Cell"}
)"),
      TaskKind::kClassification);
  EXPECT_EQ(class_vocabulary(cls), (std::vector<std::string>{"Cell", "Gene"}));
  const auto reg = load_task_records(
      write_text(dir / "r.jsonl",
                 R"({"id": "1", "s1": "a", "s2": "b", "score": 0}
{"id": "2", "s1": "a", "s2": "b", "score": 4}
)"),
      TaskKind::kRegression);
  EXPECT_EQ(reg[1].score, 4.0);
  write_task_records(reg, TaskKind::kRegression, dir / "r2.jsonl");
  EXPECT_EQ(load_task_records(dir / "r2.jsonl", TaskKind::kRegression)[1].text_b,
            "b");
  for (const char* bad : {"4.5", "-0.1"}) {
    EXPECT_THROW(load_task_records(
                     write_text(dir / "b.jsonl",
                                std::string(R"({"id": "1", "s1": "a", "s2": "b", "score": )") +
                                    bad + "}\n"),
                     TaskKind::kRegression),
                 DataError)
        << bad;
  }
}

TEST(Config, DefaultsAndOverrides) {
  const RunConfig d = parse_config(nlohmann::json::object());
  EXPECT_EQ(d.model.dim, 64u);
  EXPECT_EQ(d.model.decoder_depth, 3);
  EXPECT_EQ(d.pretrain.adam.learning_rate, 1e-3);
  EXPECT_EQ(d.finetune.patience, 5);
  EXPECT_EQ(d.v_low, 0.0);
  EXPECT_EQ(d.v_high, 1.0);

  const RunConfig c = parse_config(nlohmann::json::parse(R"({
      "model": {"dim": 16, "decoder_depth": 1, "lambda": 0.5},
      "pretrain": {"epochs": 3, "lr": 0.01},
      "finetune": {"mode": "end-to-end", "patience": 2},
      "manipulation": {"v_low": 0.1, "v_high": 0.9}})"));
  EXPECT_EQ(c.model.dim, 16u);
  EXPECT_EQ(c.model.embed_dim, 16u);  // follows dim unless given
  EXPECT_EQ(c.model.lambda, 0.5);
  EXPECT_EQ(c.pretrain.epochs, 3);
  EXPECT_EQ(c.pretrain.adam.learning_rate, 0.01);
  EXPECT_EQ(c.finetune.mode, FinetuneMode::kEndToEnd);
  EXPECT_EQ(c.v_high, 0.9);

  // to_json feeds back into parse_config unchanged.
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(nlohmann::json::parse(R"({"model": {"dim": "x"}})")),
               FormatError);
  EXPECT_THROW(
      parse_config(nlohmann::json::parse(R"({"finetune": {"patience": 0}})")),
      ValidationError);
  EXPECT_THROW(parse_config(nlohmann::json::parse(
                   R"({"finetune": {"mode": "frozen"}})")),
               ValidationError);
  TempDir dir;
  EXPECT_THROW(load_config(write_text(dir / "c.json", "{")), FormatError);
}

TEST(EvalReportJson, RoundTrip) {
  EvalReport r;
  r.classes = {"Cell", "Gene"};
  for (int i = 0; i < 5; ++i) {
    EvalRow row;
    row.id = "x" + std::to_string(i);
    row.gold = i % 2;
    row.predicted = i % 3 == 0 ? 1 : row.gold;
    row.probabilities = {0.25, 0.75};
    row.types = {0.1 * i, 0.5, 1.0 / 3.0};
    r.rows.push_back(row);
  }
  summarize(r);
  const EvalReport back = eval_report_from_json(to_json(r));
  EXPECT_EQ(back.classes, r.classes);
  EXPECT_EQ(back.metric, r.metric);
  ASSERT_EQ(back.rows.size(), r.rows.size());
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    EXPECT_EQ(back.rows[i].types, r.rows[i].types);
    EXPECT_EQ(back.rows[i].predicted, r.rows[i].predicted);
  }
  ASSERT_EQ(back.errors.size(), r.errors.size());

  nlohmann::json bad = to_json(r);
  bad["rows"][0]["gold"] = "Tissue";
  EXPECT_THROW(eval_report_from_json(bad), DataError);
}

TEST(Manifest, RecordsInputsAndHashes) {
  TempDir dir;
  const auto input = write_text(dir / "in.txt", "hello");
  write_text(dir / "out.bin", "");
  const std::vector<std::filesystem::path> inputs{input};
  write_manifest(dir / "out.bin", "pretrain", 7, {{"lr", 0.01}}, inputs);
  const auto doc = nlohmann::json::parse(read_file(dir / "out.bin.manifest.json"));
  EXPECT_EQ(doc["command"], "pretrain");
  EXPECT_EQ(doc["seed"], 7);
  EXPECT_EQ(doc["inputs"][0]["file"], "in.txt");
  // FNV-1a 64 of "hello", computed independently.
  EXPECT_EQ(doc["inputs"][0]["fnv1a64"], "a430d84680aabd0b");
  EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
}

}  // namespace
}  // namespace itsirl
