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

#include "hfss/patch_grid.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <utility>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"

namespace hfss {
namespace {

using nlohmann::json;

// Summed-area table over a mask for O(1) rectangle containment tests.
class IntegralMask {
 public:
  explicit IntegralMask(const FrequencyMask& mask)
      : width_(mask.width() + 1),
        sums_(static_cast<std::size_t>(mask.height() + 1) * (mask.width() + 1), 0) {
    for (int u = 0; u < mask.height(); ++u) {
      int row = 0;
      for (int v = 0; v < mask.width(); ++v) {
        row += mask.test(u, v) ? 1 : 0;
        at(u + 1, v + 1) = at(u, v + 1) + row;
      }
    }
  }

  int rect_sum(int top, int left, int size) const {
    return get(top + size, left + size) - get(top, left + size) - get(top + size, left) +
           get(top, left);
  }

 private:
  int& at(int u, int v) { return sums_[static_cast<std::size_t>(u) * width_ + v]; }
  int get(int u, int v) const { return sums_[static_cast<std::size_t>(u) * width_ + v]; }

  int width_;
  std::vector<int> sums_;
};

struct PresetRow {
  const char* name;
  std::array<int, 4> budgets;
};

// Budgets B_1..B_4 for the 8/4/2/1 CIFAR schedule.
constexpr std::array<PresetRow, 11> kCifarPresets = {{
    {"CF-1", {1000, 2000, 4000, 8000}},
    {"CF-2.1", {200, 800, 4000, 4000}},
    {"CF-2.2", {200, 800, 2000, 2000}},
    {"CF-2.3", {200, 800, 500, 500}},
    {"CF-2.4", {200, 400, 500, 500}},
    {"CF-2.5", {200, 200, 500, 500}},
    {"CF-2.6", {200, 200, 300, 300}},
    {"CF-2.7", {100, 100, 200, 200}},
    {"CF-2.8", {50, 50, 100, 100}},
    {"CF-2.9", {20, 20, 50, 50}},
    {"CF-2.10", {10, 10, 25, 25}},
}};

constexpr std::array<int, 4> kCifarPatches = {8, 4, 2, 1};
constexpr std::array<int, 6> kImagenetPatches = {56, 28, 14, 8, 4, 2};
constexpr std::array<int, 6> kImagenetBudgets = {500, 500, 500, 1000, 1000, 2000};
constexpr double kDefaultP = 0.6;
constexpr int kDefaultFanout = 5;
constexpr std::uint64_t kDefaultSeed = 42;

template <std::size_t S>
SearchConfig make_config(const std::array<int, S>& patches, const std::array<int, S>& budgets,
                         std::string name) {
  SearchConfig config;
  for (std::size_t s = 0; s < S; ++s) {
    config.stages.push_back(StagePlan{static_cast<int>(s + 1), patches[s], budgets[s], kDefaultP,
                                      kDefaultFanout});
  }
  config.seed = kDefaultSeed;
  config.preset = std::move(name);
  return config;
}

std::string join_names() {
  std::string out;
  for (const auto& n : preset_names()) {
    if (!out.empty()) out += ", ";
    out += n;
  }
  return out;
}

}  // namespace

void SearchConfig::validate() const {
  if (stages.size() < 2) throw ConfigError("a search needs at least two stages");
  for (std::size_t s = 0; s < stages.size(); ++s) {
    const StagePlan& st = stages[s];
    const std::string where = "stage " + std::to_string(s + 1) + ": ";
    if (st.stage_index != static_cast<int>(s + 1)) {
      throw ConfigError(where + "stage_index must be " + std::to_string(s + 1));
    }
    if (st.patch_size < 1) throw ConfigError(where + "patch_size must be >= 1");
    if (s > 0 && st.patch_size >= stages[s - 1].patch_size) {
      throw ConfigError(where + "patch_size must be smaller than the previous stage's");
    }
    if (st.candidate_count < 1) throw ConfigError(where + "B must be >= 1");
    if (!(st.sampling_fraction > 0.0 && st.sampling_fraction <= 1.0)) {
      throw ConfigError(where + "p must lie in (0, 1]");
    }
    if (st.parent_fanout < 1) throw ConfigError(where + "N must be >= 1");
  }
  if (stages[0].candidate_count < stages[0].parent_fanout) {
    throw ConfigError("stage 1: B_1 (" + std::to_string(stages[0].candidate_count) +
                      ") must be >= N (" + std::to_string(stages[0].parent_fanout) + ")");
  }
}

void SearchConfig::validate_for(int height, int width) const {
  validate();
  for (const StagePlan& st : stages) {
    if (height % st.patch_size != 0 || width % st.patch_size != 0) {
      throw ConfigError("stage " + std::to_string(st.stage_index) + ": patch size " +
                        std::to_string(st.patch_size) + " does not divide the " +
                        std::to_string(height) + "x" + std::to_string(width) + " spectrum");
    }
  }
}

std::size_t SearchConfig::total_candidates() const {
  std::size_t total = 0;
  for (const auto& st : stages) total += static_cast<std::size_t>(st.candidate_count);
  return total;
}

std::string SearchConfig::hash() const {
  json canon = json::object();
  json st = json::array();
  for (const auto& s : stages) {
    st.push_back({{"patch_size", s.patch_size},
                  {"B", s.candidate_count},
                  {"p", s.sampling_fraction},
                  {"N", s.parent_fanout}});
  }
  canon["stages"] = std::move(st);
  canon["seed"] = seed;
  return hex64(fnv1a64(canon.dump()));
}

std::vector<PatchPosition> build_grid(int height, int width, int patch_size, bool include_shifted) {
  if (patch_size < 1 || height % patch_size != 0 || width % patch_size != 0) {
    throw ConfigError("patch size " + std::to_string(patch_size) + " does not divide " +
                      std::to_string(height) + "x" + std::to_string(width));
  }
  std::vector<PatchPosition> grid;
  for (int t = 0; t < height; t += patch_size) {
    for (int l = 0; l < width; l += patch_size) grid.push_back({t, l, patch_size, false});
  }
  if (include_shifted && patch_size >= 2) {
    const int h = patch_size / 2;
    const std::array<std::pair<int, int>, 3> offsets = {{{0, h}, {h, 0}, {h, h}}};
    for (auto [dt, dl] : offsets) {
      for (int t = dt; t + patch_size <= height; t += patch_size) {
        for (int l = dl; l + patch_size <= width; l += patch_size) {
          grid.push_back({t, l, patch_size, true});
        }
      }
    }
  }
  return grid;
}

std::size_t count_base(std::span<const PatchPosition> grid) {
  return static_cast<std::size_t>(
      std::count_if(grid.begin(), grid.end(), [](const PatchPosition& p) { return !p.shifted; }));
}

std::vector<PatchPosition> eligible_patches(std::span<const PatchPosition> grid,
                                            const FrequencyMask& parent) {
  IntegralMask sums(parent);
  std::vector<PatchPosition> out;
  for (const auto& p : grid) {
    if (p.top + p.size > parent.height() || p.left + p.size > parent.width()) continue;
    if (sums.rect_sum(p.top, p.left, p.size) == static_cast<int>(p.area())) out.push_back(p);
  }
  return out;
}

double base_count_in(const FrequencyMask& parent, int patch_size) {
  return static_cast<double>(parent.count()) / (static_cast<double>(patch_size) * patch_size);
}

FrequencyMask sample_subset(std::span<const PatchPosition> eligible, double base_count_in_parent,
                            double p, RandomStream& rng, int height, int width) {
  if (eligible.empty()) throw SamplingError("no eligible patches to sample from");
  if (!(p > 0.0 && p <= 1.0)) throw ConfigError("sampling fraction must lie in (0, 1]");
  const auto k = static_cast<std::size_t>(std::llround(p * base_count_in_parent));
  if (k == 0) throw SamplingError("sample size rounds to zero patches");
  if (k > eligible.size()) {
    throw SamplingError("sample size " + std::to_string(k) + " exceeds " +
                        std::to_string(eligible.size()) + " eligible patches");
  }

  const std::size_t budget = k * eligible.front().area();
  FrequencyMask mask = FrequencyMask::zeros(height, width);
  std::vector<std::size_t> order(eligible.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t covered = 0;
  // Lazy Fisher-Yates: position i receives a uniform draw from the rest.
  for (std::size_t i = 0; i < order.size() && covered < budget; ++i) {
    const std::size_t j = i + rng.uniform_index(order.size() - i);
    std::swap(order[i], order[j]);
    const PatchPosition& patch = eligible[order[i]];
    std::size_t fresh = 0;
    for (int u = patch.top; u < patch.top + patch.size; ++u) {
      for (int v = patch.left; v < patch.left + patch.size; ++v) fresh += mask.test(u, v) ? 0 : 1;
    }
    if (covered + fresh > budget) continue;
    mask.set_rect(patch.top, patch.left, patch.size, patch.size);
    covered += fresh;
  }
  return mask;
}

SearchConfig default_config_for(int height, int width, int final_patch,
                                std::span<const int> budgets, double p, int fanout,
                                std::uint64_t seed) {
  SearchConfig config;
  int patch = std::min(height, width) / 4;
  if (patch < final_patch || final_patch < 1) {
    throw ConfigError("final patch size must lie in [1, min(height, width)/4]");
  }
  std::vector<int> patches;
  for (; patch > final_patch; patch /= 2) patches.push_back(patch);
  patches.push_back(final_patch);
  if (budgets.size() != patches.size()) {
    throw ConfigError("schedule has " + std::to_string(patches.size()) + " stages but " +
                      std::to_string(budgets.size()) + " budgets were given");
  }
  for (std::size_t s = 0; s < patches.size(); ++s) {
    config.stages.push_back({static_cast<int>(s + 1), patches[s], budgets[s], p, fanout});
  }
  config.seed = seed;
  config.validate_for(height, width);
  return config;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& row : kCifarPresets) names.emplace_back(row.name);
  names.emplace_back("cifar-default");
  names.emplace_back("imagenet-default");
  return names;
}

SearchConfig preset_config(std::string_view name) {
  for (const auto& row : kCifarPresets) {
    if (name == row.name) return make_config(kCifarPatches, row.budgets, row.name);
  }
  if (name == "cifar-default") {
    return make_config(kCifarPatches, kCifarPresets[0].budgets, "cifar-default");
  }
  if (name == "imagenet-default") {
    return make_config(kImagenetPatches, kImagenetBudgets, "imagenet-default");
  }
  throw ConfigError("unknown preset '" + std::string(name) + "'; available: " + join_names());
}

SearchConfig parse_search_config(std::string_view text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed search configuration: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("search configuration must be a JSON object");

  try {
    SearchConfig config;
    config.seed = kDefaultSeed;
    if (j.contains("preset")) config = preset_config(j.at("preset").get<std::string>());
    const double p = j.value("p", config.stages.empty() ? kDefaultP : config.stages[0].sampling_fraction);
    const int fanout =
        j.value("N", config.stages.empty() ? kDefaultFanout : config.stages[0].parent_fanout);
    if (j.contains("stages")) {
      config.stages.clear();
      int index = 1;
      for (const auto& st : j.at("stages")) {
        config.stages.push_back(StagePlan{index++, st.at("patch_size").get<int>(),
                                          st.at("B").get<int>(), st.value("p", p),
                                          st.value("N", fanout)});
      }
    } else {
      for (auto& st : config.stages) {
        st.sampling_fraction = p;
        st.parent_fanout = fanout;
      }
    }
    config.seed = j.value("seed", config.seed);
    config.validate();
    return config;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid search configuration: ") + e.what());
  }
}

std::string format_search_config(const SearchConfig& config) {
  json j = json::object();
  if (config.preset) j["preset"] = *config.preset;
  json st = json::array();
  for (const auto& s : config.stages) {
    st.push_back({{"patch_size", s.patch_size},
                  {"B", s.candidate_count},
                  {"p", s.sampling_fraction},
                  {"N", s.parent_fanout}});
  }
  j["stages"] = std::move(st);
  j["seed"] = config.seed;
  return j.dump(2) + "\n";
}

SearchConfig load_search_config(const std::string& spec) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), spec) != names.end()) return preset_config(spec);
  if (!std::filesystem::exists(spec)) {
    throw ConfigError("'" + spec + "' is neither a preset nor a file; available presets: " +
                      join_names());
  }
  return parse_search_config(read_file(spec));
}

}  // namespace hfss
