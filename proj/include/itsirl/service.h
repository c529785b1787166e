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

#ifndef ITSIRL_SERVICE_H_
#define ITSIRL_SERVICE_H_

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "itsirl/encoder.h"
#include "itsirl/model.h"
#include "itsirl/prototypes.h"
#include "itsirl/tasks.h"
#include "itsirl/type_system.h"

namespace itsirl {

// Everything a running service reads. Never mutated after construction.
struct ServiceSnapshot {
  ItsIRLParams params;
  TaskHead head;
  TokenVocab vocab;
  TypeSystem types;
  ClassSets class_sets;
  std::vector<Prototype> prototypes;
  std::vector<Point2d> positive_coords;  // project_2d of positive prototypes
  double display_threshold = 0.01;
  double v_low = 0.0;
  double v_high = 1.0;
};

// Validates the snapshot (classification head, matching type system) and
// fills positive_coords when there are at least two positive prototypes.
std::shared_ptr<const ServiceSnapshot> make_snapshot(ServiceSnapshot snapshot);

struct ServiceResponse {
  int status = 200;
  nlohmann::json body;
};

inline constexpr const char* kSessionHeader = "X-Session-Token";

// Request handlers, independent of the HTTP layer. Sessions are created on
// first use and keyed by the opaque token; each holds, per example id, the
// original and the current (edited) type vector.
class Service {
 public:
  // A null snapshot makes every model endpoint answer 503.
  explicit Service(std::shared_ptr<const ServiceSnapshot> snapshot);

  // {mention, context} -> {example_id, top_types, classes, class_probs,
  // argmax, label}
  ServiceResponse predict(const std::string& session,
                          const nlohmann::json& request);
  // {example_id, edits?: [{index, value}], strategy?: {name, fix_class?,
  // promote_class?}} -> {example_id, class_probs, argmax, label,
  // changed_indices}. Edits accumulate on the session's current vector;
  // changed_indices compares against the original.
  ServiceResponse manipulate(const std::string& session,
                             const nlohmann::json& request);
  ServiceResponse reset(const std::string& session,
                        const nlohmann::json& request);
  // Without group: every prototype of the polarity (all when empty) with
  // its 2D coordinates. With group: that prototype's top k types.
  ServiceResponse prototypes(const std::string& polarity,
                             const std::string& group, std::size_t k) const;
  ServiceResponse search_types(const std::string& query,
                               std::size_t limit) const;

 private:
  struct ExampleState {
    TypeVector original;
    TypeVector current;
  };
  struct Session {
    std::mutex mu;
    std::map<std::string, ExampleState> examples;
  };

  std::shared_ptr<Session> session(const std::string& token);
  nlohmann::json scored(const std::string& example_id,
                        const ExampleState& state) const;

  std::shared_ptr<const ServiceSnapshot> snapshot_;
  std::mutex sessions_mu_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
};

// HTTP/1.1 front end with permissive CORS.
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Returns the bound port (a free one when port is 0), or -1.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  bool listen();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace itsirl

#endif  // ITSIRL_SERVICE_H_
