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

#ifndef HFSS_PATCH_GRID_HPP_
#define HFSS_PATCH_GRID_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hfss/random.hpp"
#include "hfss/spectral.hpp"

namespace hfss {

// A square patch of spectrum bins. `shifted` marks membership of one of
// the half-offset tilings.
struct PatchPosition {
  int top = 0;
  int left = 0;
  int size = 1;
  bool shifted = false;

  std::size_t area() const { return static_cast<std::size_t>(size) * size; }
  friend bool operator==(const PatchPosition&, const PatchPosition&) = default;
};

struct StagePlan {
  int stage_index = 1;  // 1-based
  int patch_size = 1;
  int candidate_count = 1;  // B_s
  double sampling_fraction = 0.6;  // p
  int parent_fanout = 5;  // N, unused at the final stage

  friend bool operator==(const StagePlan&, const StagePlan&) = default;
};

struct SearchConfig {
  std::vector<StagePlan> stages;
  std::uint64_t seed = 0;
  std::optional<std::string> preset;

  // Structural checks: at least two stages, strictly decreasing patch
  // sizes, positive budgets, p in (0,1], N >= 1, B_1 >= N.
  void validate() const;
  // validate() plus: every patch size divides height and width.
  void validate_for(int height, int width) const;

  std::size_t total_candidates() const;
  // Stable 16-hex-digit hash of everything that affects search results.
  std::string hash() const;
};

// Base tiling plus, when include_shifted and patch_size >= 2, the three
// tilings offset by patch_size/2 horizontally, vertically and diagonally,
// keeping only patches fully inside the spectrum. Base patches come first
// in row-major order, followed by the H, V and diagonal shifted tilings.
std::vector<PatchPosition> build_grid(int height, int width, int patch_size, bool include_shifted);

std::size_t count_base(std::span<const PatchPosition> grid);

// Patches whose bins are all set in `parent`.
std::vector<PatchPosition> eligible_patches(std::span<const PatchPosition> grid,
                                            const FrequencyMask& parent);

// Draws patches uniformly without replacement from `eligible` (base and
// shifted pooled) under an area budget of k = round(p * base_count_in_parent)
// patches: a drawn patch is admitted only while the union stays within k
// patch areas, and drawing stops once the budget is met. For a disjoint
// pool this is exactly k distinct patches.
//
// Throws SamplingError when eligible is empty or k exceeds |eligible|.
FrequencyMask sample_subset(std::span<const PatchPosition> eligible, double base_count_in_parent,
                            double p, RandomStream& rng, int height, int width);

// Parent area measured in patches of `patch_size`; equals the number of
// base patches inside the parent when patch sizes halve between stages.
double base_count_in(const FrequencyMask& parent, int patch_size);

// Halving schedule starting at min(height, width)/4 and ending at
// final_patch, with one budget per stage.
SearchConfig default_config_for(int height, int width, int final_patch,
                                std::span<const int> budgets, double p, int fanout,
                                std::uint64_t seed);

std::vector<std::string> preset_names();
// Throws ConfigError listing the available presets on an unknown name.
SearchConfig preset_config(std::string_view name);

// Plain-text (JSON) configuration: {"preset": "...", "stages":
// [{"patch_size": 8, "B": 10}, ...], "p": 0.6, "N": 5, "seed": 42}.
// Keys given alongside a preset override it.
SearchConfig parse_search_config(std::string_view text);
std::string format_search_config(const SearchConfig& config);
// `spec` is a preset name or a path to a configuration file.
SearchConfig load_search_config(const std::string& spec);

}  // namespace hfss

#endif  // HFSS_PATCH_GRID_HPP_
