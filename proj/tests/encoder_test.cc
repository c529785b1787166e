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

#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "itsirl/encoder.h"
#include "itsirl/errors.h"
#include "itsirl/gradcheck.h"
#include "itsirl/model.h"
#include "test_util.h"

namespace itsirl {
namespace {

using ::itsirl::testing::TempDir;
using ::itsirl::testing::write_text;

TokenVocab small_vocab() {
  return TokenVocab({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "p53", "tumor",
                     "gene"});
}

TEST(Tokenize, EmptyInputs) {
  EXPECT_EQ(tokenize("", "", small_vocab()),
            (std::vector<int>{TokenVocab::kCls, TokenVocab::kSep,
                              TokenVocab::kSep}));
}

TEST(Tokenize, Layout) {
  EXPECT_EQ(tokenize("p53", "tumor gene", small_vocab()),
            (std::vector<int>{2, 4, 3, 5, 6, 3}));
  EXPECT_EQ(tokenize("P53 unseen", "", small_vocab()),
            (std::vector<int>{2, 4, TokenVocab::kUnk, 3, 3}));
}

TEST(Tokenize, StructureOnRandomInputs) {
  std::mt19937_64 rng(9);
  const char* words[] = {"p53", "tumor", "gene", "x", "[SEP]", "[CLS]"};
  for (int i = 0; i < 200; ++i) {
    std::string m, s;
    for (int k = rng() % 12; k > 0; --k) m += std::string(words[rng() % 6]) + " ";
    for (int k = rng() % 40; k > 0; --k) s += std::string(words[rng() % 6]) + " ";
    const std::size_t max_len = 3 + rng() % 20;
    const auto ids = tokenize(m, s, small_vocab(), max_len);
    EXPECT_LE(ids.size(), max_len);
    EXPECT_EQ(ids.front(), TokenVocab::kCls);
    EXPECT_EQ(ids.back(), TokenVocab::kSep);
    // Words that look like special tokens are not special: lowercased
    // "[sep]" is not in the vocabulary.
    EXPECT_EQ(std::count(ids.begin(), ids.end(), TokenVocab::kSep), 2);
    EXPECT_EQ(std::count(ids.begin(), ids.end(), TokenVocab::kCls), 1);
  }
}

TEST(Tokenize, TruncatesLongerSegmentFirst) {
  const auto ids = tokenize("p53", "tumor gene tumor gene", small_vocab(), 6);
  EXPECT_EQ(ids, (std::vector<int>{2, 4, 3, 5, 6, 3}));
  const auto ids2 = tokenize("p53 p53 p53 p53", "gene", small_vocab(), 6);
  EXPECT_EQ(ids2, (std::vector<int>{2, 4, 4, 3, 6, 3}));
}

TEST(TokenVocab, BuildOrdersByFrequencyThenLexically) {
  const std::vector<std::string> texts{"b a c", "a B", "c d"};
  const TokenVocab v = TokenVocab::build(texts);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"[PAD]", "[UNK]", "[CLS]",
                                                  "[SEP]", "a", "b", "c",
                                                  "d"}));
  EXPECT_EQ(v.id("zzz"), TokenVocab::kUnk);
}

TEST(TokenVocab, RejectsBadReservedPrefix) {
  EXPECT_THROW(TokenVocab({"[UNK]", "[PAD]", "[CLS]", "[SEP]"}), FormatError);
  EXPECT_THROW(TokenVocab({"[PAD]", "[UNK]", "[CLS]", "[SEP]", "a", "a"}),
               FormatError);
}

TEST(TokenVocab, FileRoundTrip) {
  TempDir dir;
  write_vocab(small_vocab(), dir / "v.txt");
  EXPECT_EQ(load_vocab(dir / "v.txt").tokens(), small_vocab().tokens());
}

EncoderParams random_encoder(std::size_t vocab, std::size_t de, std::size_t d,
                             std::uint64_t seed) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.embed_dim = de;
  c.dim = d;
  c.num_types = 2;
  EncoderParams p = initialize_params(c, seed).encoder;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-0.2, 0.2);
  for (double& b : p.hidden.bias.values()) b = u(rng);
  for (double& b : p.output.bias.values()) b = u(rng);
  return p;
}

TEST(Encode, ZeroParamsGiveOutputBias) {
  EncoderParams p = random_encoder(7, 4, 3, 1);
  p.embedding.fill(0);
  p.hidden.weight.fill(0);
  p.output.weight.fill(0);
  const std::vector<int> ids{2, 4, 3, 3};
  EXPECT_EQ(encode(p, ids), p.output.bias);
}

TEST(Encode, DeterministicAndPermutationInvariant) {
  const EncoderParams p = random_encoder(7, 5, 4, 2);
  const std::vector<int> a{2, 4, 5, 6, 3, 5, 3};
  std::vector<int> b{2, 6, 4, 5, 3, 5, 3};
  EXPECT_EQ(encode(p, a), encode(p, a));
  const Tensor ha = encode(p, a), hb = encode(p, b);
  for (std::size_t i = 0; i < ha.size(); ++i) EXPECT_NEAR(ha[i], hb[i], 1e-14);
}

TEST(Encode, MatchesHandPooledMlp) {
  const EncoderParams p = random_encoder(7, 5, 4, 3);
  const std::vector<int> ids{2, 4, 4, 3, 6, 3};
  std::vector<double> pooled(5, 0.0);
  for (int id : ids) {
    for (std::size_t j = 0; j < 5; ++j) pooled[j] += p.embedding(id, j);
  }
  for (double& v : pooled) v /= ids.size();
  std::vector<double> hidden(4);
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = p.hidden.bias[i];
    for (std::size_t j = 0; j < 5; ++j) acc += p.hidden.weight(i, j) * pooled[j];
    hidden[i] = std::max(acc, 0.0);
  }
  const Tensor h = encode(p, ids);
  for (std::size_t i = 0; i < 4; ++i) {
    double acc = p.output.bias[i];
    for (std::size_t j = 0; j < 4; ++j) acc += p.output.weight(i, j) * hidden[j];
    EXPECT_NEAR(h[i], acc, 1e-14);
  }
}

TEST(Encode, UnknownTokenIdThrows) {
  const EncoderParams p = random_encoder(7, 3, 3, 4);
  const std::vector<int> ids{2, 9, 3, 3};
  EXPECT_THROW(encode(p, ids), IndexError);
}

TEST(Encode, GradCheckThroughDownstreamLoss) {
  const EncoderParams p = random_encoder(9, 6, 5, 5);
  std::vector<Tensor> params{p.embedding, p.hidden.weight, p.hidden.bias,
                             p.output.weight, p.output.bias};
  const std::vector<int> ids{2, 4, 7, 8, 3, 5, 3};
  const Tensor target = Tensor::column({0.1, -0.2, 0.3, 0.0, 0.5});
  const LossBuilder loss = [&](Tape& tape, std::span<const Var> v) {
    const EncoderVars vars{v[0], v[1], v[2], v[3], v[4]};
    return mse(tape, encode(tape, vars, ids), tape.constant(target));
  };
  EXPECT_LT(grad_check(loss, params), 1e-4);
}

TEST(ExternalVectors, LoadTwoRecords) {
  TempDir dir;
  const auto path = write_text(dir / "v.jsonl",
                               "{\"id\": \"a\", \"vec\": [1, 2, 3, 4]}\n"
                               "{\"id\": \"b\", \"vec\": [0.5, 0, 0, -1]}\n");
  const ExternalVectorStore store = load_external_vectors(path);
  EXPECT_EQ(store.size(), 2u);
  EXPECT_EQ(store.dim(), 4u);
  EXPECT_EQ(store.at("b")[3], -1.0);
  EXPECT_THROW(store.at("c"), DataError);
}

TEST(ExternalVectors, MismatchedDimensionNamesId) {
  TempDir dir;
  const auto path = write_text(dir / "v.jsonl",
                               "{\"id\": \"a\", \"vec\": [1, 2, 3, 4]}\n"
                               "{\"id\": \"odd\", \"vec\": [1, 2, 3, 4, 5]}\n");
  try {
    load_external_vectors(path);
    FAIL() << "expected FormatError";
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("odd"), std::string::npos);
  }
}

TEST(ExternalVectors, DuplicateAndMalformedLines) {
  TempDir dir;
  EXPECT_THROW(load_external_vectors(write_text(
                   dir / "d.jsonl", "{\"id\": \"a\", \"vec\": [1]}\n"
                                    "{\"id\": \"a\", \"vec\": [2]}\n")),
               FormatError);
  EXPECT_THROW(load_external_vectors(write_text(dir / "m.jsonl", "{oops\n")),
               FormatError);
}

TEST(ExternalVectors, RoundTripAtFloatPrecision) {
  TempDir dir;
  std::mt19937_64 rng(6);
  std::normal_distribution<double> n;
  ExternalVectorStore store;
  for (int i = 0; i < 20; ++i) {
    Tensor v(8, 1);
    for (double& x : v.values()) x = static_cast<float>(n(rng));
    store.insert("id" + std::to_string(i), v);
  }
  write_external_vectors(store, dir / "v.jsonl");
  const ExternalVectorStore back = load_external_vectors(dir / "v.jsonl");
  EXPECT_EQ(back.entries(), store.entries());
}

}  // namespace
}  // namespace itsirl
