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

#include "itsirl/prototypes.h"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <random>

#include <nlohmann/json.hpp>

#include "itsirl/errors.h"

namespace itsirl {

const char* to_string(Polarity polarity) {
  return polarity == Polarity::kPositive ? "positive" : "negative";
}

Polarity parse_polarity(std::string_view text) {
  if (text == "positive") return Polarity::kPositive;
  if (text == "negative") return Polarity::kNegative;
  throw ValidationError("unknown polarity '" + std::string(text) + "'");
}

NegativeGrouping parse_grouping(std::string_view text) {
  if (text == "by_true") return NegativeGrouping::kByTrue;
  if (text == "by_pattern") return NegativeGrouping::kByPattern;
  throw ValidationError("unknown grouping '" + std::string(text) + "'");
}

std::string pattern_key(std::string_view truth, std::string_view predicted) {
  return std::string(truth) + " -> " + std::string(predicted);
}

TypeVector minmax_normalize(std::span<const double> v) {
  TypeVector out(v.size(), 0.0);
  if (v.empty()) return out;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double range = *hi - *lo;
  if (!(range > 0.0)) return out;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (v[i] - *lo) / range;
  return out;
}

namespace {

// Groups rows by key and sums their type vectors in id order.
std::vector<Prototype> aggregate(
    const EvalReport& report, Polarity polarity,
    const std::vector<std::pair<std::string, std::size_t>>& keyed_rows,
    const std::vector<std::string>& group_order) {
  std::map<std::string, std::vector<std::size_t>> members;
  for (const auto& [key, row] : keyed_rows) members[key].push_back(row);
  std::vector<Prototype> out;
  for (const std::string& key : group_order) {
    auto it = members.find(key);
    if (it == members.end()) continue;
    std::vector<std::size_t>& rows = it->second;
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
      const EvalRow& ra = report.rows[a];
      const EvalRow& rb = report.rows[b];
      if (ra.id != rb.id) return ra.id < rb.id;
      return ra.types < rb.types;
    });
    TypeVector sum(report.rows[rows.front()].types.size(), 0.0);
    for (std::size_t r : rows) {
      const TypeVector& t = report.rows[r].types;
      for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += t[j];
    }
    out.push_back({key, polarity, rows.size(), minmax_normalize(sum)});
  }
  return out;
}

}  // namespace

std::vector<Prototype> build_positive_prototypes(const EvalReport& report) {
  std::vector<std::pair<std::string, std::size_t>> keyed;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const EvalRow& r = report.rows[i];
    if (r.gold == r.predicted) keyed.emplace_back(report.classes.at(r.gold), i);
  }
  return aggregate(report, Polarity::kPositive, keyed, report.classes);
}

std::vector<Prototype> build_negative_prototypes(const EvalReport& report,
                                                 NegativeGrouping grouping) {
  std::vector<std::pair<std::string, std::size_t>> keyed;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const EvalRow& r = report.rows[i];
    if (r.gold == r.predicted) continue;
    const std::string& truth = report.classes.at(r.gold);
    keyed.emplace_back(grouping == NegativeGrouping::kByTrue
                           ? truth
                           : pattern_key(truth, report.classes.at(r.predicted)),
                       i);
  }
  std::vector<std::string> order;
  if (grouping == NegativeGrouping::kByTrue) {
    order = report.classes;
  } else {
    // Same order as the report's error patterns.
    for (const ErrorPattern& p : report.errors) {
      order.push_back(pattern_key(report.classes.at(p.truth),
                                  report.classes.at(p.predicted)));
    }
  }
  return aggregate(report, Polarity::kNegative, keyed, order);
}

std::vector<TypeWeight> top_types(const Prototype& prototype, std::size_t k,
                                  const TypeSystem& types) {
  const TypeVector& v = prototype.vector;
  if (v.size() != types.size()) {
    throw DimensionError("prototype has " + std::to_string(v.size()) +
                         " weights, type system has " +
                         std::to_string(types.size()));
  }
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  const std::size_t n = std::min(k, idx.size());
  std::partial_sort(idx.begin(), idx.begin() + n, idx.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (v[a] != v[b]) return v[a] > v[b];
                      return a < b;
                    });
  std::vector<TypeWeight> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({types.name(idx[i]), v[idx[i]], idx[i]});
  }
  return out;
}

std::vector<double> sparsity_curve(std::span<const TypeVector> vectors,
                                   std::span<const double> thresholds) {
  if (vectors.empty()) throw DataError("sparsity_curve needs vectors");
  std::vector<double> out;
  out.reserve(thresholds.size());
  for (double tau : thresholds) {
    std::size_t total = 0;
    for (const TypeVector& t : vectors) total += sparsity_at(t, tau);
    out.push_back(static_cast<double>(total) /
                  static_cast<double>(vectors.size()));
  }
  return out;
}

namespace {

using Matrix = std::vector<std::vector<double>>;

// Dominant eigenpair of a symmetric PSD matrix.
std::pair<double, std::vector<double>> power_iteration(const Matrix& g,
                                                       std::uint64_t seed) {
  const std::size_t n = g.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.5, 1.5);
  std::vector<double> v(n);
  for (double& x : v) x = dist(rng);
  auto normalize = [](std::vector<double>& x) {
    double norm = 0.0;
    for (double e : x) norm += e * e;
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (double& e : x) e /= norm;
    }
    return norm;
  };
  normalize(v);
  std::vector<double> next(n);
  for (int iter = 0; iter < 100000; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += g[i][j] * v[j];
      next[i] = acc;
    }
    if (normalize(next) == 0.0) return {0.0, v};
    double delta = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      delta = std::max(delta, std::abs(next[i] - v[i]));
    }
    v.swap(next);
    if (delta < 1e-9) break;
  }
  double lambda = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) lambda += v[i] * g[i][j] * v[j];
  }
  return {lambda, v};
}

}  // namespace

std::vector<Point2d> project_2d(std::span<const Prototype> prototypes) {
  const std::size_t n = prototypes.size();
  if (n < 2) throw DataError("project_2d needs at least 2 prototypes");
  const std::size_t dim = prototypes.front().vector.size();
  for (const Prototype& p : prototypes) {
    if (p.vector.size() != dim) {
      throw DimensionError("prototype '" + p.group + "' has mismatched size");
    }
  }
  std::vector<double> mean(dim, 0.0);
  for (const Prototype& p : prototypes) {
    for (std::size_t j = 0; j < dim; ++j) mean[j] += p.vector[j];
  }
  for (double& m : mean) m /= static_cast<double>(n);
  Matrix centered(n, std::vector<double>(dim));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < dim; ++j) {
      centered[i][j] = prototypes[i].vector[j] - mean[j];
    }
  }
  Matrix gram(n, std::vector<double>(n, 0.0));
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a; b < n; ++b) {
      double acc = 0.0;
      for (std::size_t j = 0; j < dim; ++j) acc += centered[a][j] * centered[b][j];
      gram[a][b] = gram[b][a] = acc;
    }
  }
  double trace = 0.0;
  for (std::size_t i = 0; i < n; ++i) trace += gram[i][i];

  std::vector<std::vector<double>> scores;
  for (int component = 0; component < 2; ++component) {
    auto [lambda, u] = power_iteration(gram, 0x70636131 + component);
    std::vector<double> score(n, 0.0);
    if (lambda > 1e-12 * std::max(trace, 1e-300)) {
      // Loading direction w = X^T u / sqrt(lambda); flip so its largest
      // magnitude entry is positive.
      double best_abs = -1.0, best_val = 0.0;
      for (std::size_t j = 0; j < dim; ++j) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i) w += centered[i][j] * u[i];
        if (std::abs(w) > best_abs + 1e-12) {
          best_abs = std::abs(w);
          best_val = w;
        }
      }
      const double sign = best_val < 0 ? -1.0 : 1.0;
      const double root = std::sqrt(lambda);
      for (std::size_t i = 0; i < n; ++i) score[i] = sign * root * u[i];
    }
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) gram[a][b] -= lambda * u[a] * u[b];
    }
    scores.push_back(std::move(score));
  }
  std::vector<Point2d> out;
  for (std::size_t i = 0; i < n; ++i) {
    out.push_back({prototypes[i].group, scores[0][i], scores[1][i]});
  }
  return out;
}

void write_prototypes(std::span<const Prototype> prototypes,
                      const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  for (const Prototype& p : prototypes) {
    nlohmann::json rec;
    rec["group"] = p.group;
    rec["polarity"] = to_string(p.polarity);
    rec["support"] = p.support;
    rec["vec"] = p.vector;
    out << rec.dump() << '\n';
  }
  if (!out) throw Error("failed writing " + path.string());
}

std::vector<Prototype> load_prototypes(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open prototypes " + path.string());
  std::vector<Prototype> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto rec = nlohmann::json::parse(line);
      Prototype p;
      p.group = rec.at("group").get<std::string>();
      p.polarity = parse_polarity(rec.at("polarity").get<std::string>());
      p.support = rec.at("support").get<std::size_t>();
      p.vector = rec.at("vec").get<TypeVector>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " +
                        e.what());
    }
  }
  return out;
}

void write_coordinates(std::span<const Point2d> points,
                       const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  out << "group,x,y\n";
  char buf[64];
  for (const Point2d& p : points) {
    std::string group = p.group;
    if (group.find_first_of(",\"") != std::string::npos) {
      std::string quoted = "\"";
      for (char c : group) {
        if (c == '"') quoted += '"';
        quoted += c;
      }
      group = quoted + "\"";
    }
    std::snprintf(buf, sizeof buf, ",%.17g,%.17g\n", p.x, p.y);
    out << group << buf;
  }
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace itsirl
