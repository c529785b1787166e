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

#include "itsirl/type_system.h"

#include <algorithm>
#include <cctype>
#include <fstream>

#include <nlohmann/json.hpp>

#include "itsirl/errors.h"

namespace itsirl {

std::string to_lower(std::string_view text) {
  std::string out(text);
  std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
    return static_cast<char>(std::tolower(c));
  });
  return out;
}

TypeSystem::TypeSystem(std::vector<std::string> names) {
  names_.reserve(names.size());
  for (std::size_t i = 0; i < names.size(); ++i) {
    std::string name = to_lower(names[i]);
    auto [it, inserted] = index_.emplace(name, i);
    if (!inserted) {
      throw FormatError("duplicate type name '" + name + "' on lines " +
                        std::to_string(it->second + 1) + " and " +
                        std::to_string(i + 1));
    }
    names_.push_back(std::move(name));
  }
}

std::optional<std::size_t> TypeSystem::index_of(std::string_view name) const {
  auto it = index_.find(to_lower(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TypeSystem load_type_system(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open type system " + path.string());
  std::vector<std::string> names;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
      line.pop_back();
    }
    names.push_back(std::move(line));
  }
  if (names.empty()) {
    throw FormatError("type system " + path.string() + " is empty");
  }
  return TypeSystem(std::move(names));
}

void write_type_system(const TypeSystem& types,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const std::string& name : types.names()) out << name << '\n';
  if (!out) throw Error("failed writing " + path.string());
}

ClassTypeSet build_class_type_set(std::string label,
                                  std::vector<std::string> include_terms,
                                  std::vector<std::string> exclude_terms,
                                  const TypeSystem& types) {
  ClassTypeSet set;
  set.label = std::move(label);
  set.include_terms = std::move(include_terms);
  set.exclude_terms = std::move(exclude_terms);
  std::vector<std::string> include, exclude;
  for (const auto& t : set.include_terms) include.push_back(to_lower(t));
  for (const auto& t : set.exclude_terms) exclude.push_back(to_lower(t));
  auto contains = [](const std::string& name, const std::string& term) {
    return name.find(term) != std::string::npos;
  };
  for (std::size_t i = 0; i < types.size(); ++i) {
    const std::string& name = types.name(i);
    const bool in = std::any_of(include.begin(), include.end(),
                                [&](const auto& t) { return contains(name, t); });
    if (!in) continue;
    const bool out = std::any_of(exclude.begin(), exclude.end(),
                                 [&](const auto& t) { return contains(name, t); });
    if (!out) set.indices.push_back(i);
  }
  return set;
}

std::map<std::string, ClassRule> load_class_rules(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open class rules " + path.string());
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("class rules " + path.string() + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw FormatError("class rules " + path.string() + " must be an object");
  }
  std::map<std::string, ClassRule> rules;
  for (const auto& [label, body] : doc.items()) {
    ClassRule rule;
    try {
      rule.include = body.value("include", std::vector<std::string>{});
      rule.exclude = body.value("exclude", std::vector<std::string>{});
    } catch (const nlohmann::json::exception& e) {
      throw FormatError("class rules entry '" + label + "': " + e.what());
    }
    for (const auto& term : rule.include) {
      if (term.empty()) {
        throw FormatError("class rules entry '" + label +
                          "' has an empty include term");
      }
    }
    rules.emplace(label, std::move(rule));
  }
  return rules;
}

ClassSets build_class_sets(const std::map<std::string, ClassRule>& rules,
                           const TypeSystem& types) {
  ClassSets sets;
  for (const auto& [label, rule] : rules) {
    sets.emplace(label, build_class_type_set(label, rule.include,
                                             rule.exclude, types));
  }
  return sets;
}

std::vector<std::pair<std::size_t, std::string>> search_types(
    const TypeSystem& types, std::string_view query, std::size_t limit) {
  std::vector<std::pair<std::size_t, std::string>> hits;
  const std::string needle = to_lower(query);
  for (std::size_t i = 0; i < types.size() && hits.size() < limit; ++i) {
    if (types.name(i).find(needle) != std::string::npos) {
      hits.emplace_back(i, types.name(i));
    }
  }
  return hits;
}

}  // namespace itsirl
