/*
 * Copyright 2026 The HFSS Authors.
 *
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

#ifndef HFSS_METRICS_HPP_
#define HFSS_METRICS_HPP_

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hfss/model.hpp"

namespace hfss {

// 0.1, 0.2, ..., 0.9 computed as i / 10.
std::vector<double> default_thresholds();
// Comma-separated list, each value in (0, 1), strictly increasing.
std::vector<double> parse_thresholds(std::string_view text);

// Class partition at each threshold: shortcut iff TPR^DFM > t. Classes
// with an undefined TPR^DFM belong to neither group.
struct Grouping {
  std::vector<double> thresholds;
  std::vector<std::vector<int>> shortcut;  // per threshold, ascending
  std::vector<std::vector<int>> non_shortcut;
  std::vector<int> undefined;

  std::size_t classes = 0;
  friend bool operator==(const Grouping&, const Grouping&) = default;
};

struct ThresholdRow {
  double threshold = 0.0;
  std::vector<int> shortcut;
  std::vector<int> non_shortcut;
  std::optional<double> tpr_sct;
  std::optional<double> tpr_dfm_sct;
  std::optional<double> tpr_non_sct;
  std::optional<double> tpr_dfm_non_sct;
  // AvgTPR^DFM_sct > AvgTPR_sct.
  bool dfm_exceeds_full = false;
};

struct ShortcutReport {
  std::vector<ThresholdRow> rows;
  // Classes excluded because a TPR is undefined on this set.
  std::vector<int> undefined;
};

Grouping classify_groups(const ClassValues& tpr_dfm, std::span<const double> thresholds);

// Averages per group of a fixed grouping. A class whose TPR or TPR^DFM is
// undefined here is dropped from its group and listed as undefined.
// Empty groups have undefined averages.
ShortcutReport summarize(const Grouping& grouping, const ClassValues& tpr,
                         const ClassValues& tpr_dfm);

// classify_groups(tpr_dfm) then summarize. Throws ConfigError on
// mismatched lengths.
ShortcutReport group_and_average(const ClassValues& tpr, const ClassValues& tpr_dfm,
                                 std::span<const double> thresholds);

// stage x threshold matrix of shortcut-group sizes.
std::vector<std::vector<std::size_t>> shortcut_class_counts(std::span<const ShortcutReport> reports);

// Report table: one row per threshold with group sizes, the four averages
// ("NA" when undefined), the dfm_exceeds_full flag and member lists.
void write_report_tsv(const ShortcutReport& report, std::span<const std::string> class_names,
                      const std::string& config_hash, const std::filesystem::path& path);
// threshold, four averages, two group sizes.
void write_plot_data(const ShortcutReport& report, const std::string& config_hash,
                     const std::filesystem::path& path);

struct ClassTprTable {
  std::string config_hash;
  std::vector<std::string> class_names;
  ClassValues tpr;
  ClassValues tpr_dfm;
};

// class, tpr, tpr_dfm with round-trip precision.
void write_class_tpr(const ClassTprTable& table, const std::filesystem::path& path);
ClassTprTable read_class_tpr(const std::filesystem::path& path);

std::string format_value(const std::optional<double>& value);

}  // namespace hfss

#endif  // HFSS_METRICS_HPP_
