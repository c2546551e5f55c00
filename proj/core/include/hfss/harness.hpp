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

#ifndef HFSS_HARNESS_HPP_
#define HFSS_HARNESS_HPP_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hfss/data.hpp"
#include "hfss/metrics.hpp"
#include "hfss/model.hpp"
#include "hfss/search.hpp"

namespace hfss {

enum class DatasetRole { kIdTest, kOodTexture, kOodRendition, kAdversarial };

DatasetRole parse_role(std::string_view text);
std::string role_name(DatasetRole role);

struct DatasetEntry {
  std::string name;
  DatasetRole role = DatasetRole::kIdTest;
  LabeledDataset data;
  // dataset class name -> DFM class name
  std::map<std::string, std::string> aliases;
};

struct DatasetResult {
  std::string name;
  DatasetRole role = DatasetRole::kIdTest;
  // Indexed by DFM class; undefined where the dataset has no images.
  ClassValues tpr;
  ClassValues tpr_dfm;
  ShortcutReport report;
  std::vector<std::string> unmatched_classes;  // dataset classes without a DFM
  std::size_t images = 0;
};

struct EvaluationRun {
  std::string endpoint_id;
  std::string config_hash;
  std::vector<std::string> class_names;
  std::vector<double> thresholds;
  Grouping grouping;  // from the ID set, shared by every dataset
  std::vector<DatasetResult> datasets;
};

// Exactly one dataset must have the id-test role; its TPR^DFM fixes the
// grouping. Dataset classes are matched to DFM classes by name after
// applying the alias map. Throws DataError when a dataset shares no class
// with the DFM set.
EvaluationRun evaluate_datasets(const ClassifierEndpoint& endpoint, const DFMSet& dfms,
                                const std::vector<DatasetEntry>& datasets,
                                std::span<const double> thresholds, int workers = 1);

struct ComparisonRow {
  std::string dataset;
  DatasetRole role = DatasetRole::kIdTest;
  ThresholdRow row;
  // sign of AvgTPR_sct - AvgTPR_non-sct; unset if either is undefined
  std::optional<int> sign;
  std::optional<double> delta_sct;  // AvgTPR_sct - ID AvgTPR_sct
  std::optional<double> delta_non_sct;
};

std::vector<ComparisonRow> compare_groups(const EvaluationRun& run);

void write_comparison_tsv(const std::vector<ComparisonRow>& rows, const std::string& config_hash,
                          const std::filesystem::path& path);
// Grouping of the ID set: threshold, shortcut classes, non-shortcut classes.
void write_grouping_tsv(const EvaluationRun& run, const std::filesystem::path& path);

struct ManifestDataset {
  std::string name;
  DatasetRole role = DatasetRole::kIdTest;
  std::filesystem::path path;
  std::optional<std::filesystem::path> aliases;
};

// Structured-text run description; relative paths resolve against the
// manifest's directory.
struct RunManifest {
  std::string endpoint;
  std::filesystem::path dfm;
  std::vector<ManifestDataset> datasets;
  std::vector<double> thresholds;
  LoadOptions load;
};

RunManifest parse_run_manifest(std::string_view text, const std::filesystem::path& base_dir);
std::map<std::string, std::string> load_aliases(const std::filesystem::path& path);

// Per dataset <name>.class_tpr.tsv, <name>.report.tsv and <name>.plot.tsv,
// plus grouping.tsv, comparison.tsv and run.json.
void write_run_outputs(const EvaluationRun& run, const std::filesystem::path& dir);

// Reloads run.json and the class_tpr files of a run directory and
// recomputes grouping and reports. Throws ConfigError when the inputs
// carry different config hashes.
EvaluationRun rebuild_run(const std::filesystem::path& run_dir);

}  // namespace hfss

#endif  // HFSS_HARNESS_HPP_
