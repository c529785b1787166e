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

#ifndef ITSIRL_PROTOTYPES_H_
#define ITSIRL_PROTOTYPES_H_

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itsirl/model.h"
#include "itsirl/tasks.h"
#include "itsirl/type_system.h"

namespace itsirl {

enum class Polarity { kPositive, kNegative };
enum class NegativeGrouping { kByTrue, kByPattern };

const char* to_string(Polarity polarity);
Polarity parse_polarity(std::string_view text);
NegativeGrouping parse_grouping(std::string_view text);

struct Prototype {
  // Class label, or "<true> -> <predicted>" for pattern groups.
  std::string group;
  Polarity polarity = Polarity::kPositive;
  std::size_t support = 0;
  TypeVector vector;
};

std::string pattern_key(std::string_view truth, std::string_view predicted);

// (v - min v) / (max v - min v); all zeros when max == min.
TypeVector minmax_normalize(std::span<const double> v);

// One prototype per class with at least one correct prediction, in class
// order. Sums run over rows sorted by id, so the result does not depend on
// row order.
std::vector<Prototype> build_positive_prototypes(const EvalReport& report);
std::vector<Prototype> build_negative_prototypes(const EvalReport& report,
                                                 NegativeGrouping grouping);

struct TypeWeight {
  std::string name;
  double weight = 0.0;
  std::size_t index = 0;
};

// k highest weights, ties to the lower index.
std::vector<TypeWeight> top_types(const Prototype& prototype, std::size_t k,
                                  const TypeSystem& types);

// Mean sparsity_at over vectors for each threshold.
std::vector<double> sparsity_curve(std::span<const TypeVector> vectors,
                                   std::span<const double> thresholds);

struct Point2d {
  std::string group;
  double x = 0.0;
  double y = 0.0;
};

// Scores on the top two principal directions of the centered prototype
// matrix, found by power iteration on its Gram matrix. Each direction's
// largest-magnitude loading (the first, on ties) is made positive. Needs
// >= 2 prototypes.
std::vector<Point2d> project_2d(std::span<const Prototype> prototypes);

// JSON-lines {"group", "polarity", "support", "vec"}.
void write_prototypes(std::span<const Prototype> prototypes,
                      const std::filesystem::path& path);
std::vector<Prototype> load_prototypes(const std::filesystem::path& path);
// CSV with header group,x,y.
void write_coordinates(std::span<const Point2d> points,
                       const std::filesystem::path& path);

}  // namespace itsirl

#endif  // ITSIRL_PROTOTYPES_H_
