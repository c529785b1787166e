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

#include "itsirl/counterfactual.h"

#include <algorithm>
#include <cstdio>
#include <sstream>

#include "itsirl/autodiff.h"
#include "itsirl/errors.h"
#include "parallel.h"

namespace itsirl {

const char* to_string(Strategy strategy) {
  switch (strategy) {
    case Strategy::kFix:
      return "fix";
    case Strategy::kPromote:
      return "promote";
    case Strategy::kBoth:
      return "both";
    case Strategy::kManual:
      return "manual";
  }
  return "?";
}

Strategy parse_strategy(std::string_view text) {
  if (text == "fix") return Strategy::kFix;
  if (text == "promote") return Strategy::kPromote;
  if (text == "both") return Strategy::kBoth;
  if (text == "manual") return Strategy::kManual;
  throw ValidationError("unknown strategy '" + std::string(text) + "'");
}

namespace {

const ClassTypeSet& find_set(const ClassSets& sets,
                             const std::optional<std::string>& label,
                             const char* role) {
  if (!label.has_value()) {
    throw ValidationError(std::string("manipulation needs a ") + role +
                          " class");
  }
  auto it = sets.find(*label);
  if (it == sets.end()) {
    throw ValidationError("unknown class label '" + *label + "'");
  }
  return it->second;
}

void assign(TypeVector& t, const ClassTypeSet& set, double value) {
  for (std::size_t j : set.indices) {
    if (j >= t.size()) {
      throw IndexError("class set '" + set.label + "' index " +
                       std::to_string(j) + " outside type vector of size " +
                       std::to_string(t.size()));
    }
    t[j] = value;
  }
}

}  // namespace

TypeVector manipulate(std::span<const double> types,
                      const ManipulationSpec& spec, const ClassSets& sets) {
  TypeVector out(types.begin(), types.end());
  for (double v : {spec.v_low, spec.v_high}) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ValidationError("manipulation value outside [0, 1]");
    }
  }
  switch (spec.strategy) {
    case Strategy::kFix:
      assign(out, find_set(sets, spec.fix_class, "fix"), spec.v_low);
      break;
    case Strategy::kPromote:
      assign(out, find_set(sets, spec.promote_class, "promote"), spec.v_high);
      break;
    case Strategy::kBoth: {
      const ClassTypeSet& fix = find_set(sets, spec.fix_class, "fix");
      const ClassTypeSet& promote =
          find_set(sets, spec.promote_class, "promote");
      assign(out, fix, spec.v_low);
      assign(out, promote, spec.v_high);
      break;
    }
    case Strategy::kManual:
      if (spec.manual_edits.empty()) {
        throw ValidationError("manual manipulation needs at least one edit");
      }
      break;
  }
  for (const TypeEdit& edit : spec.manual_edits) {
    if (edit.index >= out.size()) {
      throw IndexError("edit index " + std::to_string(edit.index) +
                       " outside type vector of size " +
                       std::to_string(out.size()));
    }
    if (!(edit.value >= 0.0 && edit.value <= 1.0)) {
      throw ValidationError("edit value for type " +
                            std::to_string(edit.index) + " outside [0, 1]");
    }
    out[edit.index] = edit.value;
  }
  return out;
}

Rescore rerun_from_types(std::span<const double> types,
                         const ItsIRLParams& params, const TaskHead& head) {
  if (head.kind != TaskKind::kClassification) {
    throw ValidationError("rerun_from_types needs a classification head");
  }
  Rescore r;
  r.probabilities = outputs_from_types(types, params, head);
  r.label = static_cast<int>(argmax(r.probabilities));
  return r;
}

CampaignReport run_error_campaign(const EvalReport& report,
                                  const ClassSets& sets,
                                  std::span<const Strategy> strategies,
                                  const ItsIRLParams& params,
                                  const TaskHead& head, double v_low,
                                  double v_high) {
  if (report.kind != TaskKind::kClassification) {
    throw ValidationError("campaigns need a classification eval report");
  }
  for (Strategy s : strategies) {
    if (s == Strategy::kManual) {
      throw ValidationError("manual edits are not a campaign strategy");
    }
  }
  CampaignReport out;
  out.strategies.assign(strategies.begin(), strategies.end());
  out.total = report.rows.size();
  out.baseline_correct = report.correct();
  out.total_errors = out.total - out.baseline_correct;

  std::vector<std::size_t> error_rows;
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    if (report.rows[i].gold != report.rows[i].predicted) error_rows.push_back(i);
  }
  // resolved_by[k][s]: error row k resolved under strategy s.
  std::vector<std::vector<char>> resolved_by(
      error_rows.size(), std::vector<char>(strategies.size(), 0));
  const auto n = static_cast<std::int64_t>(error_rows.size());
  internal::LoopErrors errors;
#pragma omp parallel for schedule(dynamic, 4)
  for (std::int64_t k = 0; k < n; ++k) {
    errors.run(static_cast<std::size_t>(k), [&] {
      const EvalRow& row = report.rows[error_rows[k]];
      ManipulationSpec spec;
      spec.fix_class = report.classes.at(row.predicted);
      spec.promote_class = report.classes.at(row.gold);
      spec.v_low = v_low;
      spec.v_high = v_high;
      for (std::size_t s = 0; s < strategies.size(); ++s) {
        spec.strategy = strategies[s];
        const TypeVector edited = manipulate(row.types, spec, sets);
        resolved_by[k][s] =
            rerun_from_types(edited, params, head).label == row.gold;
      }
    });
  }
  errors.rethrow();

  for (const ErrorPattern& pattern : report.errors) {
    PatternReport p;
    p.truth = report.classes.at(pattern.truth);
    p.predicted = report.classes.at(pattern.predicted);
    p.errors = pattern.count;
    p.equal_sets = find_set(sets, p.truth, "promote").indices ==
                   find_set(sets, p.predicted, "fix").indices;
    for (Strategy s : strategies) p.resolved[s] = 0;
    for (std::size_t k = 0; k < error_rows.size(); ++k) {
      const EvalRow& row = report.rows[error_rows[k]];
      if (row.gold != pattern.truth || row.predicted != pattern.predicted) {
        continue;
      }
      for (std::size_t s = 0; s < strategies.size(); ++s) {
        p.resolved[strategies[s]] += resolved_by[k][s];
      }
    }
    for (Strategy s : strategies) {
      if (p.resolved[s] > p.best_resolved ||
          (p.best_resolved == 0 && s == strategies.front())) {
        p.best = s;
        p.best_resolved = p.resolved[s];
      }
    }
    p.best_fraction = p.errors == 0 ? 0.0
                                    : static_cast<double>(p.best_resolved) /
                                          static_cast<double>(p.errors);
    out.oracle_resolved += p.best_resolved;
    out.patterns.push_back(std::move(p));
  }

  const double total = static_cast<double>(std::max<std::size_t>(out.total, 1));
  out.baseline_accuracy = static_cast<double>(out.baseline_correct) / total;
  for (Strategy s : strategies) {
    std::size_t sum = 0;
    for (const PatternReport& p : out.patterns) sum += p.resolved.at(s);
    out.resolved[s] = sum;
    out.accuracy[s] = static_cast<double>(out.baseline_correct + sum) / total;
  }
  out.oracle_accuracy =
      static_cast<double>(out.baseline_correct + out.oracle_resolved) / total;
  return out;
}

std::string format_campaign_table(const CampaignReport& report) {
  std::size_t wt = 4, wp = 9;
  for (const PatternReport& p : report.patterns) {
    wt = std::max(wt, p.truth.size() + 1);
    wp = std::max(wp, p.predicted.size() + 1);
  }
  std::ostringstream out;
  char buf[256];
  out << kCampaignCaveat << "\n\n";
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %6s", static_cast<int>(wt),
                "True", static_cast<int>(wp), "Predicted", "Errs");
  out << buf;
  for (Strategy s : report.strategies) {
    std::snprintf(buf, sizeof buf, "  %8s", to_string(s));
    out << buf;
  }
  out << "  " << "   Best%\n";
  for (const PatternReport& p : report.patterns) {
    const std::string truth = p.truth + (p.equal_sets ? "*" : "");
    std::snprintf(buf, sizeof buf, "%-*s  %-*s  %6zu", static_cast<int>(wt),
                  truth.c_str(), static_cast<int>(wp), p.predicted.c_str(),
                  p.errors);
    out << buf;
    for (Strategy s : report.strategies) {
      std::snprintf(buf, sizeof buf, "  %8zu", p.resolved.at(s));
      out << buf;
    }
    std::snprintf(buf, sizeof buf, "  %8.1f\n", 100.0 * p.best_fraction);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %6zu", static_cast<int>(wt), "",
                static_cast<int>(wp), "Raw Total", report.total_errors);
  out << buf;
  for (Strategy s : report.strategies) {
    std::snprintf(buf, sizeof buf, "  %8zu", report.resolved.at(s));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "  %8zu\n", report.oracle_resolved);
  out << buf;
  const double errs =
      static_cast<double>(std::max<std::size_t>(report.total_errors, 1));
  std::snprintf(buf, sizeof buf, "%-*s  %-*s  %6.1f", static_cast<int>(wt), "",
                static_cast<int>(wp), "Percent",
                report.total_errors == 0 ? 0.0 : 100.0);
  out << buf;
  for (Strategy s : report.strategies) {
    std::snprintf(buf, sizeof buf, "  %8.1f",
                  100.0 * static_cast<double>(report.resolved.at(s)) / errs);
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "  %8.1f\n",
                100.0 * static_cast<double>(report.oracle_resolved) / errs);
  out << buf << "\n";
  std::snprintf(buf, sizeof buf, "Baseline accuracy  %.4f\n",
                report.baseline_accuracy);
  out << buf;
  for (Strategy s : report.strategies) {
    std::snprintf(buf, sizeof buf, "+ %-16s %.4f\n", to_string(s),
                  report.accuracy.at(s));
    out << buf;
  }
  std::snprintf(buf, sizeof buf, "Best-of oracle     %.4f\n",
                report.oracle_accuracy);
  out << buf;
  return out.str();
}

}  // namespace itsirl
