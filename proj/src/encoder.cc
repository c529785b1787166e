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

#include "itsirl/encoder.h"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "itsirl/errors.h"
#include "itsirl/type_system.h"

namespace itsirl {

TokenVocab::TokenVocab()
    : TokenVocab(std::vector<std::string>(std::begin(kReserved),
                                          std::end(kReserved))) {}

TokenVocab::TokenVocab(std::vector<std::string> tokens)
    : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < std::size(kReserved); ++i) {
    if (i >= tokens_.size() || tokens_[i] != kReserved[i]) {
      throw FormatError("vocabulary line " + std::to_string(i + 1) +
                        " must be " + std::string(kReserved[i]));
    }
  }
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (!ids_.emplace(tokens_[i], static_cast<int>(i)).second) {
      throw FormatError("duplicate vocabulary token '" + tokens_[i] +
                        "' on line " + std::to_string(i + 1));
    }
  }
}

TokenVocab TokenVocab::build(std::span<const std::string> texts) {
  std::map<std::string, std::size_t> counts;
  for (const std::string& text : texts) {
    for (std::string& word : split_words(text)) ++counts[std::move(word)];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(),
                                                          counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<std::string> tokens(std::begin(kReserved), std::end(kReserved));
  for (auto& [word, count] : ranked) {
    if (std::find(std::begin(kReserved), std::end(kReserved), word) ==
        std::end(kReserved)) {
      tokens.push_back(word);
    }
  }
  return TokenVocab(std::move(tokens));
}

int TokenVocab::id(std::string_view token) const {
  auto it = ids_.find(std::string(token));
  return it == ids_.end() ? kUnk : it->second;
}

TokenVocab load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vocabulary " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    tokens.push_back(line);
  }
  return TokenVocab(std::move(tokens));
}

void write_vocab(const TokenVocab& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const std::string& token : vocab.tokens()) out << token << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::string> split_words(std::string_view text) {
  std::istringstream in{to_lower(text)};
  std::vector<std::string> words;
  std::string word;
  while (in >> word) words.push_back(word);
  return words;
}

std::vector<int> tokenize(std::string_view mention, std::string_view context,
                          const TokenVocab& vocab, std::size_t max_len) {
  std::vector<std::string> m = split_words(mention);
  std::vector<std::string> s = split_words(context);
  const std::size_t budget = max_len > 3 ? max_len - 3 : 0;
  while (m.size() + s.size() > budget) {
    if (s.size() >= m.size()) {
      s.pop_back();
    } else {
      m.pop_back();
    }
  }
  std::vector<int> ids;
  ids.reserve(m.size() + s.size() + 3);
  ids.push_back(TokenVocab::kCls);
  for (const auto& w : m) ids.push_back(vocab.id(w));
  ids.push_back(TokenVocab::kSep);
  for (const auto& w : s) ids.push_back(vocab.id(w));
  ids.push_back(TokenVocab::kSep);
  return ids;
}

Var encode(Tape& tape, const EncoderVars& vars, std::span<const int> tokens) {
  const Var pooled = mean_embedding(tape, vars.embedding, tokens);
  const Var hidden =
      relu(tape, affine(tape, vars.hidden_w, vars.hidden_b, pooled));
  return affine(tape, vars.output_w, vars.output_b, hidden);
}

Tensor encode(const EncoderParams& params, std::span<const int> tokens) {
  Tape tape;
  EncoderVars vars{tape.parameter(params.embedding, false),
                   tape.parameter(params.hidden.weight, false),
                   tape.parameter(params.hidden.bias, false),
                   tape.parameter(params.output.weight, false),
                   tape.parameter(params.output.bias, false)};
  return tape.value(encode(tape, vars, tokens));
}

const Tensor& ExternalVectorStore::at(const std::string& id) const {
  auto it = vectors_.find(id);
  if (it == vectors_.end()) {
    throw DataError("no external vector for example id '" + id + "'");
  }
  return it->second;
}

void ExternalVectorStore::insert(std::string id, Tensor vec) {
  if (vectors_.empty()) {
    dim_ = vec.size();
  } else if (vec.size() != dim_) {
    throw FormatError("external vector '" + id + "' has dimension " +
                      std::to_string(vec.size()) + ", expected " +
                      std::to_string(dim_));
  }
  if (vectors_.count(id) > 0) {
    throw FormatError("duplicate external vector id '" + id + "'");
  }
  vectors_.emplace(std::move(id), std::move(vec));
}

ExternalVectorStore load_external_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open vectors " + path.string());
  ExternalVectorStore store;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::string id;
    std::vector<double> vec;
    try {
      const auto rec = nlohmann::json::parse(line);
      id = rec.at("id").get<std::string>();
      vec = rec.at("vec").get<std::vector<double>>();
      // Interchange precision is 32-bit.
      for (double& v : vec) v = static_cast<float>(v);
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
    try {
      store.insert(std::move(id), Tensor::column(std::move(vec)));
    } catch (const FormatError& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return store;
}

void write_external_vectors(const ExternalVectorStore& store,
                            const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const auto& [id, vec] : store.entries()) {
    nlohmann::json rec;
    rec["id"] = id;
    std::vector<float> values(vec.values().begin(), vec.values().end());
    rec["vec"] = values;
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace itsirl
