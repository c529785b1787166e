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

#ifndef ITSIRL_TYPE_SYSTEM_H_
#define ITSIRL_TYPE_SYSTEM_H_

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace itsirl {

// Ordered registry of entity-type names. A type's index is its position;
// lower indices are more frequent in pre-training data.
class TypeSystem {
 public:
  TypeSystem() = default;
  // Names are lowercased; duplicates throw FormatError.
  explicit TypeSystem(std::vector<std::string> names);

  std::size_t size() const { return names_.size(); }
  const std::string& name(std::size_t index) const { return names_[index]; }
  const std::vector<std::string>& names() const { return names_; }
  std::optional<std::size_t> index_of(std::string_view name) const;

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

// One name per line, LF terminated, line order = frequency rank.
TypeSystem load_type_system(const std::filesystem::path& path);
void write_type_system(const TypeSystem& types,
                       const std::filesystem::path& path);

std::string to_lower(std::string_view text);

struct ClassRule {
  std::vector<std::string> include;
  std::vector<std::string> exclude;
};

struct ClassTypeSet {
  std::string label;
  std::vector<std::string> include_terms;
  std::vector<std::string> exclude_terms;
  std::vector<std::size_t> indices;  // ascending
};

using ClassSets = std::map<std::string, ClassTypeSet>;

// indices = { i : some include term is a substring of names[i] and no exclude
// term is }. Case-insensitive, literal substring: spaces inside terms are
// significant.
ClassTypeSet build_class_type_set(std::string label,
                                  std::vector<std::string> include_terms,
                                  std::vector<std::string> exclude_terms,
                                  const TypeSystem& types);

// Class-rules file: {"Label": {"include": [...], "exclude": [...]}, ...}.
std::map<std::string, ClassRule> load_class_rules(
    const std::filesystem::path& path);
ClassSets build_class_sets(const std::map<std::string, ClassRule>& rules,
                           const TypeSystem& types);

// Names containing query, ascending index, at most limit entries.
std::vector<std::pair<std::size_t, std::string>> search_types(
    const TypeSystem& types, std::string_view query, std::size_t limit);

}  // namespace itsirl

#endif  // ITSIRL_TYPE_SYSTEM_H_
