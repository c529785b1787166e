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

#include "itsirl/store.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "itsirl/errors.h"

namespace itsirl {

using nlohmann::json;

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("failed writing " + path.string());
}

namespace {

template <typename OnRecord>
void for_each_json_line(const std::filesystem::path& path, OnRecord&& on) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) +
                        ": malformed JSON: " + e.what());
    }
    try {
      on(rec, line_no);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
}

}  // namespace

std::vector<PretrainRecord> load_corpus(const std::filesystem::path& path,
                                        const TypeSystem& types) {
  std::vector<PretrainRecord> records;
  std::set<std::string> ids;
  std::vector<std::string> unknown;
  for_each_json_line(path, [&](const json& rec, std::size_t line_no) {
    PretrainRecord r;
    r.id = rec.at("id").get<std::string>();
    r.mention = rec.at("mention").get<std::string>();
    r.context = rec.at("context").get<std::string>();
    if (!ids.insert(r.id).second) {
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": duplicate id '" + r.id + "'");
    }
    for (const json& t : rec.at("types")) {
      if (t.is_number_integer()) {
        const auto index = t.get<long long>();
        if (index < 0 || static_cast<std::size_t>(index) >= types.size()) {
          unknown.push_back("line " + std::to_string(line_no) + ": index " +
                            std::to_string(index));
          continue;
        }
        r.types.push_back(static_cast<int>(index));
      } else {
        const std::string name = t.get<std::string>();
        const auto index = types.index_of(name);
        if (!index) {
          unknown.push_back("line " + std::to_string(line_no) + ": '" + name +
                            "'");
          continue;
        }
        r.types.push_back(static_cast<int>(*index));
      }
    }
    records.push_back(std::move(r));
  });
  if (!unknown.empty()) {
    std::string msg = path.string() + ": unknown entity types:";
    for (const std::string& u : unknown) msg += "\n  " + u;
    throw DataError(msg);
  }
  return records;
}

void write_corpus(std::span<const PretrainRecord> records,
                  const TypeSystem& types, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const PretrainRecord& r : records) {
    json rec;
    rec["id"] = r.id;
    rec["mention"] = r.mention;
    rec["context"] = r.context;
    json names = json::array();
    for (int t : r.types) names.push_back(types.name(t));
    rec["types"] = names;
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<TaskRecord> load_task_records(const std::filesystem::path& path,
                                          TaskKind kind) {
  std::vector<TaskRecord> records;
  std::set<std::string> ids;
  for_each_json_line(path, [&](const json& rec, std::size_t line_no) {
    TaskRecord r;
    r.id = rec.at("id").get<std::string>();
    const std::string where = path.string() + ":" + std::to_string(line_no);
    if (!ids.insert(r.id).second) {
      throw DataError(where + ": duplicate id '" + r.id + "'");
    }
    if (kind == TaskKind::kClassification) {
      r.text_a = rec.at("mention").get<std::string>();
      r.text_b = rec.at("context").get<std::string>();
      r.label = rec.at("label").get<std::string>();
    } else {
      r.text_a = rec.at("s1").get<std::string>();
      r.text_b = rec.at("s2").get<std::string>();
      r.score = rec.at("score").get<double>();
      if (!(r.score >= 0.0 && r.score <= kMaxSimilarity)) {
        throw DataError(where + ": score outside [0, 4] for '" + r.id + "'");
      }
    }
    records.push_back(std::move(r));
  });
  return records;
}

void write_task_records(std::span<const TaskRecord> records, TaskKind kind,
                        const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const TaskRecord& r : records) {
    json rec;
    rec["id"] = r.id;
    if (kind == TaskKind::kClassification) {
      rec["mention"] = r.text_a;
      rec["context"] = r.text_b;
      rec["label"] = r.label;
    } else {
      rec["s1"] = r.text_a;
      rec["s2"] = r.text_b;
      rec["score"] = r.score;
    }
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<std::string> class_vocabulary(std::span<const TaskRecord> records) {
  std::set<std::string> labels;
  for (const TaskRecord& r : records) labels.insert(r.label);
  return {labels.begin(), labels.end()};
}

ModelInput make_input(const std::string& id, std::string_view text_a,
                      std::string_view text_b, const ItsIRLParams& params,
                      const TokenVocab& vocab,
                      const ExternalVectorStore* vectors) {
  ModelInput input;
  if (params.config.external_encoder) {
    if (vectors == nullptr) {
      throw DataError("model expects external vectors; none were given");
    }
    const Tensor& h = vectors->at(id);
    if (h.size() != params.config.dim) {
      throw DimensionError("external vector '" + id + "' has dimension " +
                           std::to_string(h.size()) + ", model expects " +
                           std::to_string(params.config.dim));
    }
    input.external_h = h;
  } else {
    input.tokens = tokenize(text_a, text_b, vocab, params.config.max_len);
    for (int t : input.tokens) {
      if (static_cast<std::size_t>(t) >= params.config.vocab_size) {
        throw IndexError("token id " + std::to_string(t) +
                         " outside model vocabulary");
      }
    }
  }
  return input;
}

std::vector<PretrainExample> make_pretrain_examples(
    std::span<const PretrainRecord> records, const ItsIRLParams& params,
    const TokenVocab& vocab, const ExternalVectorStore* vectors) {
  std::vector<PretrainExample> out;
  out.reserve(records.size());
  for (const PretrainRecord& r : records) {
    out.push_back({r.id, make_input(r.id, r.mention, r.context, params, vocab,
                                    vectors),
                   r.types});
  }
  return out;
}

std::vector<TaskExample> make_task_examples(
    std::span<const TaskRecord> records, const ItsIRLParams& params,
    const TaskHead& head, const TokenVocab& vocab,
    const ExternalVectorStore* vectors) {
  std::vector<TaskExample> out;
  out.reserve(records.size());
  for (const TaskRecord& r : records) {
    TaskExample ex;
    ex.id = r.id;
    ex.input = make_input(r.id, r.text_a, r.text_b, params, vocab, vectors);
    if (head.kind == TaskKind::kClassification) {
      const auto index = head.class_index(r.label);
      if (!index) {
        throw DataError("example '" + r.id + "' has label '" + r.label +
                        "' outside the class vocabulary");
      }
      ex.label = static_cast<int>(*index);
    } else {
      ex.score = r.score;
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xff));
  out.push_back(static_cast<char>(v >> 8));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  bool done() const { return pos_ == bytes_.size(); }

  std::uint64_t uint(int width, const std::string& what) {
    need(width, what);
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(bytes_[pos_ + i]))
           << (8 * i);
    }
    pos_ += width;
    return v;
  }

  std::string_view take(std::size_t n, const std::string& what) {
    need(n, what);
    std::string_view out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

 private:
  void need(std::size_t n, const std::string& what) const {
    if (!has(n)) throw FormatError("truncated checkpoint: " + what);
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

std::vector<std::pair<std::string, const Tensor*>> checkpoint_tensors(
    const Checkpoint& c) {
  auto out = c.params.tensors();
  if (c.head) {
    out.emplace_back("head.weight", &c.head->linear.weight);
    out.emplace_back("head.bias", &c.head->linear.bias);
  }
  return out;
}

json metadata(const Checkpoint& c) {
  const ModelConfig& m = c.params.config;
  json meta;
  meta["format_version"] = kCheckpointVersion;
  meta["dim"] = m.dim;
  meta["embed_dim"] = m.embed_dim;
  meta["num_types"] = m.num_types;
  meta["vocab_size"] = m.vocab_size;
  meta["decoder_depth"] = m.decoder_depth;
  meta["type_bias"] = m.type_bias;
  meta["lambda"] = m.lambda;
  meta["max_len"] = m.max_len;
  meta["external_encoder"] = m.external_encoder;
  meta["seed"] = c.seed;
  meta["creation_mode"] = c.creation_mode;
  meta["vocab"] = c.vocab.tokens();
  if (c.head) {
    meta["task"] = to_string(c.head->kind);
    meta["classes"] = c.head->classes;
  } else {
    meta["task"] = nullptr;
    meta["classes"] = json::array();
  }
  return meta;
}

}  // namespace

std::string serialize_checkpoint(const Checkpoint& checkpoint) {
  std::string out(kCheckpointMagic);
  const std::string meta = metadata(checkpoint).dump();
  put_u64(out, meta.size());
  out += meta;
  for (const auto& [name, tensor] : checkpoint_tensors(checkpoint)) {
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    put_u32(out, static_cast<std::uint32_t>(tensor->rows()));
    put_u32(out, static_cast<std::uint32_t>(tensor->cols()));
    for (double v : tensor->values()) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    }
  }
  return out;
}

void save_checkpoint(const Checkpoint& checkpoint,
                     const std::filesystem::path& path) {
  write_file(path, serialize_checkpoint(checkpoint));
}

Checkpoint parse_checkpoint(std::string_view bytes, const TypeSystem* types) {
  if (bytes.substr(0, kCheckpointMagic.size()) != kCheckpointMagic) {
    throw FormatError("not an ItsIRL checkpoint");
  }
  Reader reader(bytes.substr(kCheckpointMagic.size()));
  const std::uint64_t meta_len = reader.uint(8, "metadata length");
  json meta;
  try {
    meta = json::parse(reader.take(meta_len, "metadata"));
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }

  Checkpoint c;
  try {
    if (meta.at("format_version").get<int>() != kCheckpointVersion) {
      throw FormatError("unsupported checkpoint version " +
                        meta.at("format_version").dump() + " (expected " +
                        std::to_string(kCheckpointVersion) + ")");
    }
    ModelConfig& m = c.params.config;
    m.dim = meta.at("dim").get<std::size_t>();
    m.embed_dim = meta.at("embed_dim").get<std::size_t>();
    m.num_types = meta.at("num_types").get<std::size_t>();
    m.vocab_size = meta.at("vocab_size").get<std::size_t>();
    m.decoder_depth = meta.at("decoder_depth").get<int>();
    m.type_bias = meta.at("type_bias").get<bool>();
    m.lambda = meta.at("lambda").get<double>();
    m.max_len = meta.at("max_len").get<std::size_t>();
    m.external_encoder = meta.at("external_encoder").get<bool>();
    c.seed = meta.at("seed").get<std::uint64_t>();
    c.creation_mode = meta.at("creation_mode").get<std::string>();
    c.vocab = TokenVocab(meta.at("vocab").get<std::vector<std::string>>());
    if (!meta.at("task").is_null()) {
      TaskHead head;
      head.kind = parse_task_kind(meta.at("task").get<std::string>());
      head.classes = meta.at("classes").get<std::vector<std::string>>();
      c.head = std::move(head);
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("checkpoint metadata: ") + e.what());
  }
  const ModelConfig& m = c.params.config;
  m.validate();
  if (!m.external_encoder && c.vocab.size() != m.vocab_size) {
    throw DimensionError("checkpoint vocabulary has " +
                         std::to_string(c.vocab.size()) +
                         " tokens, metadata says " +
                         std::to_string(m.vocab_size));
  }
  if (types != nullptr && types->size() != m.num_types) {
    throw DimensionError("checkpoint has " + std::to_string(m.num_types) +
                         " entity types, type system has " +
                         std::to_string(types->size()));
  }

  // Expected shapes follow from the metadata.
  const std::size_t d = m.dim;
  c.params.encoder.embedding = Tensor(m.external_encoder ? 0 : m.vocab_size,
                                      m.external_encoder ? 0 : m.embed_dim);
  c.params.encoder.hidden = {Tensor(d, m.embed_dim), Tensor(d, 1)};
  c.params.encoder.output = {Tensor(d, d), Tensor(d, 1)};
  if (m.external_encoder) c.params.encoder = EncoderParams{};
  c.params.type_layer = {Tensor(m.num_types, d), Tensor(m.num_types, 1)};
  c.params.projection = {Tensor(d, m.num_types), Tensor(d, 1)};
  c.params.decoder.assign(m.decoder_depth, {Tensor(d, d), Tensor(d, 1)});
  if (c.head) {
    const std::size_t outputs =
        c.head->kind == TaskKind::kClassification ? c.head->classes.size() : 1;
    c.head->linear = {Tensor(outputs, d), Tensor(outputs, 1)};
  }

  std::map<std::string, Tensor*> expected;
  for (const NamedTensor& nt : c.params.tensors()) expected[nt.name] = nt.tensor;
  if (c.head) {
    expected["head.weight"] = &c.head->linear.weight;
    expected["head.bias"] = &c.head->linear.bias;
  }
  std::set<std::string> seen;
  while (!reader.done()) {
    const auto name_len = reader.uint(2, "tensor name length");
    const std::string name(reader.take(name_len, "tensor name"));
    const auto rows = reader.uint(4, "dims of '" + name + "'");
    const auto cols = reader.uint(4, "dims of '" + name + "'");
    auto it = expected.find(name);
    if (it == expected.end()) {
      throw FormatError("unexpected tensor block '" + name + "'");
    }
    Tensor& target = *it->second;
    if (rows != target.rows() || cols != target.cols()) {
      throw DimensionError("tensor '" + name + "' is (" +
                           std::to_string(rows) + "x" + std::to_string(cols) +
                           "), metadata implies " + target.shape_string());
    }
    const std::string_view data =
        reader.take(rows * cols * 4, "tensor block '" + name + "'");
    for (std::size_t i = 0; i < target.size(); ++i) {
      std::uint32_t bits = 0;
      for (int b = 0; b < 4; ++b) {
        bits |= static_cast<std::uint32_t>(
                    static_cast<unsigned char>(data[4 * i + b]))
                << (8 * b);
      }
      target[i] = std::bit_cast<float>(bits);
    }
    seen.insert(name);
  }
  for (const auto& [name, tensor] : expected) {
    if (!seen.count(name)) {
      throw FormatError("truncated checkpoint: missing tensor block '" + name +
                        "'");
    }
  }
  return c;
}

Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const TypeSystem* types) {
  return parse_checkpoint(read_file(path), types);
}

// ---------------------------------------------------------------------------

RunConfig parse_config(const json& doc) {
  RunConfig c;
  try {
    const json model = doc.value("model", json::object());
    c.model.dim = model.value("dim", c.model.dim);
    c.model.embed_dim = model.value("embed_dim", c.model.dim);
    c.model.decoder_depth = model.value("decoder_depth", c.model.decoder_depth);
    c.model.type_bias = model.value("type_bias", c.model.type_bias);
    c.model.lambda = model.value("lambda", c.model.lambda);
    c.model.max_len = model.value("max_len", c.model.max_len);

    auto adam = [](const json& j, AdamConfig a) {
      a.learning_rate = j.value("lr", a.learning_rate);
      a.beta1 = j.value("beta1", a.beta1);
      a.beta2 = j.value("beta2", a.beta2);
      a.epsilon = j.value("eps", a.epsilon);
      return a;
    };
    const json pre = doc.value("pretrain", json::object());
    c.pretrain.epochs = pre.value("epochs", c.pretrain.epochs);
    c.pretrain.batch_size = pre.value("batch_size", c.pretrain.batch_size);
    c.pretrain.adam = adam(pre, c.pretrain.adam);

    const json ft = doc.value("finetune", json::object());
    c.finetune.mode =
        parse_finetune_mode(ft.value("mode", std::string("decoder-only")));
    c.finetune.max_epochs = ft.value("max_epochs", c.finetune.max_epochs);
    c.finetune.patience = ft.value("patience", c.finetune.patience);
    c.finetune.batch_size = ft.value("batch_size", c.finetune.batch_size);
    c.finetune.adam = adam(ft, c.finetune.adam);

    const json manip = doc.value("manipulation", json::object());
    c.v_low = manip.value("v_low", c.v_low);
    c.v_high = manip.value("v_high", c.v_high);
    const json service = doc.value("service", json::object());
    c.display_threshold =
        service.value("display_threshold", c.display_threshold);
  } catch (const json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  if (c.finetune.patience < 1) throw ValidationError("patience must be >= 1");
  if (c.pretrain.batch_size == 0 || c.finetune.batch_size == 0) {
    throw ValidationError("batch_size must be positive");
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("config " + path.string() + ": " + e.what());
  }
  return parse_config(doc);
}

json to_json(const RunConfig& c) {
  auto adam = [](json j, const AdamConfig& a) {
    j["lr"] = a.learning_rate;
    j["beta1"] = a.beta1;
    j["beta2"] = a.beta2;
    j["eps"] = a.epsilon;
    return j;
  };
  json doc;
  doc["model"] = {{"dim", c.model.dim},
                  {"embed_dim", c.model.embed_dim},
                  {"decoder_depth", c.model.decoder_depth},
                  {"type_bias", c.model.type_bias},
                  {"lambda", c.model.lambda},
                  {"max_len", c.model.max_len}};
  doc["pretrain"] = adam({{"epochs", c.pretrain.epochs},
                          {"batch_size", c.pretrain.batch_size}},
                         c.pretrain.adam);
  doc["finetune"] = adam({{"mode", to_string(c.finetune.mode)},
                          {"max_epochs", c.finetune.max_epochs},
                          {"patience", c.finetune.patience},
                          {"batch_size", c.finetune.batch_size}},
                         c.finetune.adam);
  doc["manipulation"] = {{"v_low", c.v_low}, {"v_high", c.v_high}};
  doc["service"] = {{"display_threshold", c.display_threshold}};
  return doc;
}

// ---------------------------------------------------------------------------

json to_json(const EvalReport& report) {
  json doc;
  const bool classify = report.kind == TaskKind::kClassification;
  doc["task"] = to_string(report.kind);
  doc["classes"] = report.classes;
  doc["metric_name"] = classify ? "accuracy" : "mse";
  doc["metric"] = report.metric;
  json rows = json::array();
  for (const EvalRow& r : report.rows) {
    json row;
    row["id"] = r.id;
    if (classify) {
      row["gold"] = report.classes.at(r.gold);
      row["predicted"] = report.classes.at(r.predicted);
      row["probs"] = r.probabilities;
    } else {
      row["gold_score"] = r.gold_score;
      row["predicted_score"] = r.predicted_score;
    }
    row["types"] = r.types;
    rows.push_back(std::move(row));
  }
  doc["rows"] = std::move(rows);
  json errors = json::array();
  for (const ErrorPattern& e : report.errors) {
    errors.push_back({{"true", report.classes.at(e.truth)},
                      {"predicted", report.classes.at(e.predicted)},
                      {"count", e.count}});
  }
  doc["errors"] = std::move(errors);
  return doc;
}

EvalReport eval_report_from_json(const json& doc) {
  EvalReport report;
  try {
    report.kind = parse_task_kind(doc.at("task").get<std::string>());
    report.classes = doc.at("classes").get<std::vector<std::string>>();
    auto index = [&](const std::string& label) {
      auto it = std::find(report.classes.begin(), report.classes.end(), label);
      if (it == report.classes.end()) {
        throw DataError("eval report label '" + label +
                        "' missing from its class list");
      }
      return static_cast<int>(it - report.classes.begin());
    };
    for (const json& row : doc.at("rows")) {
      EvalRow r;
      r.id = row.at("id").get<std::string>();
      if (report.kind == TaskKind::kClassification) {
        r.gold = index(row.at("gold").get<std::string>());
        r.predicted = index(row.at("predicted").get<std::string>());
        r.probabilities = row.at("probs").get<std::vector<double>>();
      } else {
        r.gold_score = row.at("gold_score").get<double>();
        r.predicted_score = row.at("predicted_score").get<double>();
      }
      r.types = row.at("types").get<TypeVector>();
      report.rows.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw FormatError(std::string("eval report: ") + e.what());
  }
  summarize(report);
  return report;
}

EvalReport load_eval_report(const std::filesystem::path& path) {
  json doc;
  try {
    doc = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw FormatError("eval report " + path.string() + ": " + e.what());
  }
  return eval_report_from_json(doc);
}

json to_json(const CampaignReport& report) {
  json doc;
  doc["caveat"] = std::string(kCampaignCaveat);
  json strategies = json::array();
  for (Strategy s : report.strategies) strategies.push_back(to_string(s));
  doc["strategies"] = strategies;
  doc["total"] = report.total;
  doc["errors"] = report.total_errors;
  doc["baseline_correct"] = report.baseline_correct;
  doc["baseline_accuracy"] = report.baseline_accuracy;
  json accuracy = json::object(), resolved = json::object();
  for (Strategy s : report.strategies) {
    accuracy[to_string(s)] = report.accuracy.at(s);
    resolved[to_string(s)] = report.resolved.at(s);
  }
  doc["accuracy"] = accuracy;
  doc["resolved"] = resolved;
  doc["oracle_resolved"] = report.oracle_resolved;
  doc["oracle_accuracy"] = report.oracle_accuracy;
  json patterns = json::array();
  for (const PatternReport& p : report.patterns) {
    json row;
    row["true"] = p.truth;
    row["predicted"] = p.predicted;
    row["errors"] = p.errors;
    json res = json::object();
    for (const auto& [s, n] : p.resolved) res[to_string(s)] = n;
    row["resolved"] = res;
    row["best"] = report.strategies.empty() ? json(nullptr)
                                            : json(to_string(p.best));
    row["best_resolved"] = p.best_resolved;
    row["best_percent"] = 100.0 * p.best_fraction;
    row["equal_sets"] = p.equal_sets;
    patterns.push_back(std::move(row));
  }
  doc["patterns"] = std::move(patterns);
  return doc;
}

namespace {
json to_json(const LossSummary& s) {
  json j;
  j["objective"] = s.objective;
  j["recon"] = s.recon ? json(*s.recon) : json(nullptr);
  j["typing"] = s.typing ? json(*s.typing) : json(nullptr);
  return j;
}
}  // namespace

json to_json(const PretrainTrace& trace) {
  json doc;
  doc["mode"] = to_string(trace.mode);
  doc["initial"] = to_json(trace.initial);
  doc["final"] = to_json(trace.final);
  json epochs = json::array();
  for (const EpochRecord& e : trace.epochs) {
    json row = to_json(e.mean);
    row["epoch"] = e.epoch;
    epochs.push_back(std::move(row));
  }
  doc["epochs"] = std::move(epochs);
  return doc;
}

json to_json(const FinetuneTrace& trace) {
  json doc;
  doc["best_epoch"] = trace.best_epoch;
  doc["best_dev_metric"] = trace.best_dev_metric;
  json epochs = json::array();
  for (const FinetuneEpoch& e : trace.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"train_loss", e.train_loss},
                      {"dev_metric", e.dev_metric}});
  }
  doc["epochs"] = std::move(epochs);
  return doc;
}

// ---------------------------------------------------------------------------

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx",
                static_cast<unsigned long long>(value));
  return buf;
}

void write_manifest(const std::filesystem::path& output,
                    std::string_view command, std::uint64_t seed,
                    const json& config,
                    std::span<const std::filesystem::path> inputs) {
  json doc;
  doc["command"] = std::string(command);
  doc["seed"] = seed;
  doc["config"] = config;
  json files = json::array();
  for (const auto& in : inputs) {
    files.push_back({{"file", in.filename().string()},
                     {"fnv1a64", hex64(fnv1a64(read_file(in)))}});
  }
  doc["inputs"] = files;
  doc["output"] = output.filename().string();
  auto path = output;
  path += ".manifest.json";
  write_file(path, doc.dump(2) + "\n");
}

}  // namespace itsirl
