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

#ifndef HFSS_SEARCH_HPP_
#define HFSS_SEARCH_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hfss/model.hpp"
#include "hfss/patch_grid.hpp"
#include "hfss/spectral.hpp"

namespace hfss {

struct CandidateRecord {
  FrequencyMask mask;
  // K per-class losses at stage 1, the owning class's loss afterwards.
  std::vector<double> losses;
  int stage = 1;
  std::optional<int> class_index;  // unset for shared stage-1 candidates
  std::optional<std::size_t> parent_id;  // candidate index of the parent
  std::size_t index = 0;
  // Candidate indices and masks of the ancestors, stage 1 first. Filled
  // only for records forwarded past ranking.
  std::vector<std::size_t> lineage;
  std::vector<FrequencyMask> ancestors;

  double loss_for(int c) const { return class_index ? losses.front() : losses.at(c); }
};

// Per-class ranked survivors of one stage, lowest loss first.
using RankedCandidates = std::vector<std::vector<CandidateRecord>>;

struct ClassDFM {
  FrequencyMask mask;
  double loss = 0.0;
  std::vector<std::size_t> lineage;  // one candidate index per stage
  std::vector<FrequencyMask> ancestors;  // stages 1 .. S-1
};

struct DFMSet {
  int height = 0;
  int width = 0;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<int> patch_sizes;
  std::vector<std::string> class_names;
  std::vector<ClassDFM> classes;

  std::optional<std::size_t> find_class(std::string_view name) const;
};

struct StageClassTrace {
  int stage = 1;
  int class_index = 0;
  // Class loss of every candidate in candidate-index order.
  std::vector<double> candidate_losses;
  // Candidate indices forwarded by ranking, best first.
  std::vector<std::size_t> selected;
  // (candidates evaluated, best loss so far), at most kMaxTracePoints.
  std::vector<std::pair<std::size_t, double>> best;
};

struct SearchTrace {
  static constexpr std::size_t kMaxTracePoints = 512;

  std::vector<StageClassTrace> entries;
  std::vector<double> stage_seconds;
  std::size_t images_processed = 0;
  std::size_t expected_images = 0;
  double wall_seconds = 0.0;
};

struct SearchOptions {
  int workers = 1;
  std::function<void(const std::string&)> progress;
};

// Running minimum downsampled to at most `limit` points; the first and
// last points are always kept.
std::vector<std::pair<std::size_t, double>> best_loss_curve(std::span<const double> losses,
                                                            std::size_t limit);

// Indices of the `n` lowest values; ties go to the lower index.
std::vector<std::size_t> rank_lowest(std::span<const double> values, std::size_t n);

// B_1 masks shared by all classes, each evaluated once over the whole
// evaluation set. Returns each class's top-N.
RankedCandidates run_stage_one(const SearchConfig& config, const ClassifierEndpoint& endpoint,
                               const PreparedImages& eval_set, const SearchOptions& options = {},
                               SearchTrace* trace = nullptr);

// Per class, B_s candidates sampled inside a parent drawn uniformly from
// the class's survivors, evaluated on that class's images only. Keeps
// top-N, or top-1 when `final_stage`.
RankedCandidates run_refinement_stage(const StagePlan& plan, const RankedCandidates& parents,
                                      const ClassifierEndpoint& endpoint,
                                      const PreparedImages& eval_set, std::uint64_t seed,
                                      bool final_stage, const SearchOptions& options = {},
                                      SearchTrace* trace = nullptr);

struct SearchResult {
  DFMSet dfms;
  SearchTrace trace;
};

SearchResult run_search(const SearchConfig& config, const ClassifierEndpoint& endpoint,
                        const PreparedImages& eval_set, std::span<const std::string> class_names,
                        const SearchOptions& options = {});

// Stratified sample of `wanted[c]` images per class from `labels`,
// returned as ascending indices. Throws DataError naming every class
// that has too few images.
std::vector<std::size_t> select_eval_subset(std::span<const int> labels,
                                            std::span<const std::size_t> wanted,
                                            std::uint64_t seed,
                                            std::span<const std::string> class_names = {});

// DFM files: magic line, JSON manifest, then per class the final mask
// followed by its ancestors, each as bit-packed rows (MSB first, rows
// padded to whole bytes).
std::string encode_dfm(const DFMSet& dfms);
DFMSet decode_dfm(std::string_view bytes);
void save_dfm(const DFMSet& dfms, const std::filesystem::path& path);
DFMSet load_dfm(const std::filesystem::path& path);

std::string pack_mask_rows(const FrequencyMask& mask);
FrequencyMask unpack_mask_rows(std::string_view bytes, int height, int width);

// Tab-separated stage, class, candidates, best_loss after a
// "# config_hash=" line.
void write_trace_tsv(const SearchTrace& trace, std::span<const std::string> class_names,
                     const std::string& config_hash, const std::filesystem::path& path);
// JSON with wall times and evaluation counts.
void write_timing_summary(const SearchTrace& trace, const SearchConfig& config,
                          std::size_t eval_size, const std::filesystem::path& path);

}  // namespace hfss

#endif  // HFSS_SEARCH_HPP_
