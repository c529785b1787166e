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

#include "itsirl/service.h"

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <utility>

#include <httplib.h>

#include "itsirl/counterfactual.h"
#include "itsirl/errors.h"
#include "itsirl/store.h"

namespace itsirl {

using nlohmann::json;

namespace {

ServiceResponse error(int status, std::string message) {
  return {status, json{{"error", std::move(message)}}};
}

ServiceResponse missing_field(const char* field) {
  ServiceResponse r = error(400, std::string("missing field '") + field + "'");
  r.body["field"] = field;
  return r;
}

std::string example_id(const std::string& mention, const std::string& context) {
  std::string key = mention;
  key.push_back('\0');
  key += context;
  return "ex-" + hex64(fnv1a64(key));
}

// The edit list and strategy of a /manipulate body, or the error response.
struct ParsedEdit {
  std::optional<ManipulationSpec> spec;
  std::optional<ServiceResponse> failure;
};

ParsedEdit parse_edit(const json& request, const ServiceSnapshot& snap) {
  ParsedEdit out;
  ManipulationSpec spec;
  spec.v_low = snap.v_low;
  spec.v_high = snap.v_high;
  bool any = false;
  if (request.contains("strategy") && !request["strategy"].is_null()) {
    const json& s = request["strategy"];
    if (!s.is_object() || !s.contains("name") || !s["name"].is_string()) {
      out.failure = missing_field("strategy.name");
      return out;
    }
    try {
      spec.strategy = parse_strategy(s["name"].get<std::string>());
    } catch (const ValidationError& e) {
      out.failure = error(422, e.what());
      return out;
    }
    if (spec.strategy == Strategy::kManual) {
      out.failure = error(422, "strategy must be fix, promote or both");
      return out;
    }
    for (const char* key : {"fix_class", "promote_class"}) {
      if (s.contains(key) && !s[key].is_null()) {
        if (!s[key].is_string()) {
          out.failure = error(400, std::string(key) + " must be a string");
          return out;
        }
        (key[0] == 'f' ? spec.fix_class : spec.promote_class) =
            s[key].get<std::string>();
      }
    }
    any = true;
  }
  if (request.contains("edits") && !request["edits"].is_null()) {
    const json& edits = request["edits"];
    if (!edits.is_array()) {
      out.failure = error(400, "edits must be an array");
      return out;
    }
    for (const json& e : edits) {
      if (!e.is_object() || !e.contains("index") ||
          !e["index"].is_number_integer() || !e.contains("value") ||
          !e["value"].is_number()) {
        out.failure = error(400, "each edit needs integer index and number value");
        return out;
      }
      const auto index = e["index"].get<long long>();
      const double value = e["value"].get<double>();
      if (index < 0 || static_cast<std::size_t>(index) >= snap.types.size()) {
        out.failure = error(422, "type index " + std::to_string(index) +
                                     " out of range");
        return out;
      }
      if (!(value >= 0.0 && value <= 1.0)) {
        out.failure = error(422, "value for type " + std::to_string(index) +
                                     " outside [0, 1]");
        return out;
      }
      spec.manual_edits.push_back({static_cast<std::size_t>(index), value});
    }
    any = any || !spec.manual_edits.empty();
  }
  if (any) out.spec = std::move(spec);
  return out;
}

}  // namespace

std::shared_ptr<const ServiceSnapshot> make_snapshot(ServiceSnapshot snapshot) {
  if (snapshot.head.kind != TaskKind::kClassification) {
    throw ValidationError("the service needs a classification model");
  }
  if (snapshot.params.config.external_encoder) {
    throw ValidationError(
        "the service encodes text and cannot serve an external-vector model");
  }
  if (snapshot.types.size() != snapshot.params.config.num_types) {
    throw DimensionError("type system has " +
                         std::to_string(snapshot.types.size()) +
                         " types, model has " +
                         std::to_string(snapshot.params.config.num_types));
  }
  std::vector<Prototype> positive;
  for (const Prototype& p : snapshot.prototypes) {
    if (p.vector.size() != snapshot.types.size()) {
      throw DimensionError("prototype '" + p.group + "' has wrong dimension");
    }
    if (p.polarity == Polarity::kPositive) positive.push_back(p);
  }
  snapshot.positive_coords.clear();
  if (positive.size() >= 2) snapshot.positive_coords = project_2d(positive);
  return std::make_shared<const ServiceSnapshot>(std::move(snapshot));
}

Service::Service(std::shared_ptr<const ServiceSnapshot> snapshot)
    : snapshot_(std::move(snapshot)) {}

std::shared_ptr<Service::Session> Service::session(const std::string& token) {
  std::lock_guard<std::mutex> lock(sessions_mu_);
  auto& slot = sessions_[token];
  if (!slot) slot = std::make_shared<Session>();
  return slot;
}

json Service::scored(const std::string& id, const ExampleState& state) const {
  const Rescore r = rerun_from_types(state.current, snapshot_->params,
                                     snapshot_->head);
  json changed = json::array();
  for (std::size_t i = 0; i < state.current.size(); ++i) {
    if (state.current[i] != state.original[i]) changed.push_back(i);
  }
  return {{"example_id", id},
          {"classes", snapshot_->head.classes},
          {"class_probs", r.probabilities},
          {"argmax", r.label},
          {"label", snapshot_->head.classes[r.label]},
          {"changed_indices", changed}};
}

ServiceResponse Service::predict(const std::string& token,
                                 const json& request) {
  if (!snapshot_) return error(503, "no model loaded");
  if (!request.is_object()) return error(400, "request body must be an object");
  for (const char* field : {"mention", "context"}) {
    if (!request.contains(field)) return missing_field(field);
    if (!request[field].is_string()) {
      return error(400, std::string("field '") + field + "' must be a string");
    }
  }
  const std::string mention = request["mention"].get<std::string>();
  const std::string context = request["context"].get<std::string>();
  const ServiceSnapshot& snap = *snapshot_;

  ModelInput input;
  input.tokens = tokenize(mention, context, snap.vocab, snap.params.config.max_len);
  const ClassPrediction pred = predict_class(input, snap.params, snap.head);

  std::vector<std::size_t> shown;
  for (std::size_t i = 0; i < pred.types.size(); ++i) {
    if (pred.types[i] > snap.display_threshold) shown.push_back(i);
  }
  std::stable_sort(shown.begin(), shown.end(), [&](std::size_t a, std::size_t b) {
    return pred.types[a] > pred.types[b];
  });
  json top = json::array();
  for (std::size_t i : shown) {
    top.push_back({{"index", i}, {"name", snap.types.name(i)},
                   {"weight", pred.types[i]}});
  }

  const std::string id = example_id(mention, context);
  auto s = session(token);
  {
    std::lock_guard<std::mutex> lock(s->mu);
    s->examples[id] = ExampleState{pred.types, pred.types};
  }
  return {200,
          {{"example_id", id},
           {"top_types", top},
           {"classes", snap.head.classes},
           {"class_probs", pred.probabilities},
           {"argmax", pred.label},
           {"label", snap.head.classes[pred.label]}}};
}

ServiceResponse Service::manipulate(const std::string& token,
                                    const json& request) {
  if (!snapshot_) return error(503, "no model loaded");
  if (!request.is_object()) return error(400, "request body must be an object");
  if (!request.contains("example_id")) return missing_field("example_id");
  if (!request["example_id"].is_string()) {
    return error(400, "example_id must be a string");
  }
  const std::string id = request["example_id"].get<std::string>();
  ParsedEdit parsed = parse_edit(request, *snapshot_);
  if (parsed.failure) return *parsed.failure;

  auto s = session(token);
  std::lock_guard<std::mutex> lock(s->mu);
  auto it = s->examples.find(id);
  if (it == s->examples.end()) return error(404, "unknown example '" + id + "'");
  if (parsed.spec) {
    try {
      it->second.current =
          itsirl::manipulate(it->second.current, *parsed.spec,
                             snapshot_->class_sets);
    } catch (const ValidationError& e) {
      return error(422, e.what());
    } catch (const IndexError& e) {
      return error(422, e.what());
    }
  }
  return {200, scored(id, it->second)};
}

ServiceResponse Service::reset(const std::string& token, const json& request) {
  if (!snapshot_) return error(503, "no model loaded");
  if (!request.is_object() || !request.contains("example_id")) {
    return missing_field("example_id");
  }
  if (!request["example_id"].is_string()) {
    return error(400, "example_id must be a string");
  }
  const std::string id = request["example_id"].get<std::string>();
  auto s = session(token);
  std::lock_guard<std::mutex> lock(s->mu);
  auto it = s->examples.find(id);
  if (it == s->examples.end()) return error(404, "unknown example '" + id + "'");
  it->second.current = it->second.original;
  return {200, scored(id, it->second)};
}

ServiceResponse Service::prototypes(const std::string& polarity,
                                    const std::string& group,
                                    std::size_t k) const {
  if (!snapshot_) return error(503, "no model loaded");
  std::optional<Polarity> wanted;
  if (!polarity.empty()) {
    try {
      wanted = parse_polarity(polarity);
    } catch (const ValidationError& e) {
      return error(400, e.what());
    }
  }
  const ServiceSnapshot& snap = *snapshot_;
  if (!group.empty()) {
    for (const Prototype& p : snap.prototypes) {
      if (p.group != group || (wanted && p.polarity != *wanted)) continue;
      json rows = json::array();
      for (const TypeWeight& w : top_types(p, k, snap.types)) {
        rows.push_back({{"name", w.name}, {"weight", w.weight}, {"index", w.index}});
      }
      return {200,
              {{"group", p.group},
               {"polarity", to_string(p.polarity)},
               {"support", p.support},
               {"top_types", rows}}};
    }
    return error(404, "unknown prototype group '" + group + "'");
  }
  json list = json::array();
  for (const Prototype& p : snap.prototypes) {
    if (wanted && p.polarity != *wanted) continue;
    json entry = {{"group", p.group},
                  {"polarity", to_string(p.polarity)},
                  {"support", p.support}};
    if (p.polarity == Polarity::kPositive) {
      for (const Point2d& pt : snap.positive_coords) {
        if (pt.group == p.group) {
          entry["x"] = pt.x;
          entry["y"] = pt.y;
        }
      }
    }
    list.push_back(std::move(entry));
  }
  return {200, {{"prototypes", list}}};
}

ServiceResponse Service::search_types(const std::string& query,
                                      std::size_t limit) const {
  if (!snapshot_) return error(503, "no model loaded");
  json results = json::array();
  for (const auto& [index, name] :
       itsirl::search_types(snapshot_->types, query, limit)) {
    results.push_back({{"index", index}, {"name", name}});
  }
  return {200, {{"query", query}, {"results", results}}};
}

// ---------------------------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;

  explicit Impl(Service& s) : service(s) {}
};

namespace {

void reply(httplib::Response& res, const ServiceResponse& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<json> body_json(const httplib::Request& req,
                              httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::exception&) {
    reply(res, error(400, "request body is not valid JSON"));
    return std::nullopt;
  }
}

std::optional<std::size_t> size_param(const httplib::Request& req,
                                      const char* name, std::size_t fallback,
                                      httplib::Response& res) {
  if (!req.has_param(name)) return fallback;
  const std::string text = req.get_param_value(name);
  char* end = nullptr;
  const unsigned long long v = std::strtoull(text.c_str(), &end, 10);
  if (text.empty() || *end != '\0' || text[0] == '-' || v == 0) {
    reply(res, error(400, std::string(name) + " must be a positive integer"));
    return std::nullopt;
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {
  httplib::Server& svr = impl_->server;
  Service& s = impl_->service;
  svr.set_default_headers(
      {{"Access-Control-Allow-Origin", "*"},
       {"Access-Control-Allow-Headers",
        std::string("Content-Type, ") + kSessionHeader},
       {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  svr.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });
  auto token = [](const httplib::Request& req) {
    return req.get_header_value(kSessionHeader);
  };
  svr.Post("/predict", [&s, token](const httplib::Request& req,
                                   httplib::Response& res) {
    if (auto body = body_json(req, res)) reply(res, s.predict(token(req), *body));
  });
  svr.Post("/manipulate", [&s, token](const httplib::Request& req,
                                      httplib::Response& res) {
    if (auto body = body_json(req, res)) {
      reply(res, s.manipulate(token(req), *body));
    }
  });
  svr.Post("/reset", [&s, token](const httplib::Request& req,
                                 httplib::Response& res) {
    if (auto body = body_json(req, res)) reply(res, s.reset(token(req), *body));
  });
  svr.Get("/prototypes", [&s](const httplib::Request& req,
                              httplib::Response& res) {
    const auto k = size_param(req, "k", 10, res);
    if (!k) return;
    reply(res, s.prototypes(req.get_param_value("polarity"),
                            req.get_param_value("group"), *k));
  });
  svr.Get("/types/search", [&s](const httplib::Request& req,
                                httplib::Response& res) {
    const auto limit = size_param(req, "limit", 20, res);
    if (!limit) return;
    reply(res, s.search_types(req.get_param_value("q"), *limit));
  });
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
  if (port == 0) return impl_->server.bind_to_any_port(host);
  return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::listen() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace itsirl
