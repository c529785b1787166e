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

#ifndef ITSIRL_COUNTERFACTUAL_H_
#define ITSIRL_COUNTERFACTUAL_H_

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "itsirl/model.h"
#include "itsirl/tasks.h"
#include "itsirl/type_system.h"

namespace itsirl {

enum class Strategy { kFix, kPromote, kBoth, kManual };

const char* to_string(Strategy strategy);
Strategy parse_strategy(std::string_view text);

struct TypeEdit {
  std::size_t index = 0;
  double value = 0.0;
};

struct ManipulationSpec {
  Strategy strategy = Strategy::kManual;
  std::optional<std::string> fix_class;
  std::optional<std::string> promote_class;
  // Applied after any strategy edits.
  std::vector<TypeEdit> manual_edits;
  double v_low = 0.0;
  double v_high = 1.0;
};

// Fix sets the fix class's types to v_low, promote sets the promote class's
// types to v_high; both applies fix then promote, so promote wins on
// overlap. Untouched components are copied bitwise.
//
// Throws ValidationError for a spec missing its class, an unknown class
// label, or an edit value outside [0, 1]; IndexError for an edit index
// outside the vector.
TypeVector manipulate(std::span<const double> types,
                      const ManipulationSpec& spec, const ClassSets& sets);

struct Rescore {
  std::vector<double> probabilities;
  int label = 0;
};

// head(decode(t')) without re-encoding.
Rescore rerun_from_types(std::span<const double> types,
                         const ItsIRLParams& params, const TaskHead& head);

struct PatternReport {
  std::string truth;
  std::string predicted;
  std::size_t errors = 0;
  std::map<Strategy, std::size_t> resolved;
  Strategy best = Strategy::kPromote;
  std::size_t best_resolved = 0;
  double best_fraction = 0.0;
  // Fix and promote sets coincide for this pattern.
  bool equal_sets = false;
};

struct CampaignReport {
  std::vector<Strategy> strategies;
  std::size_t total = 0;
  std::size_t baseline_correct = 0;
  std::size_t total_errors = 0;
  double baseline_accuracy = 0.0;
  std::map<Strategy, std::size_t> resolved;  // summed over patterns
  std::map<Strategy, double> accuracy;
  std::size_t oracle_resolved = 0;
  double oracle_accuracy = 0.0;
  std::vector<PatternReport> patterns;  // order of report.errors
};

inline constexpr std::string_view kCampaignCaveat =
    "NOTE: promote uses the true label. Every strategy here assumes we know "
    "which predictions are wrong and how.";

// Re-scores every mispredicted row of report under each strategy with
// fix_class = predicted label and promote_class = true label. Correct rows
// are never touched. Rows are processed in parallel and reduced in row
// order.
CampaignReport run_error_campaign(const EvalReport& report,
                                  const ClassSets& sets,
                                  std::span<const Strategy> strategies,
                                  const ItsIRLParams& params,
                                  const TaskHead& head, double v_low = 0.0,
                                  double v_high = 1.0);

// Aligned text table: True, Predicted, Errs, one column per strategy, Best%.
std::string format_campaign_table(const CampaignReport& report);

}  // namespace itsirl

#endif  // ITSIRL_COUNTERFACTUAL_H_
