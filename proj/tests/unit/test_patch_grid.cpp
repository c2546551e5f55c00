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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "hfss/error.hpp"
#include "hfss/patch_grid.hpp"

namespace hfss {
namespace {

FrequencyMask patch_mask(const PatchPosition& p, int h, int w) {
  FrequencyMask m = FrequencyMask::zeros(h, w);
  m.set_rect(p.top, p.left, p.size, p.size);
  return m;
}

TEST(BuildGrid, ShiftedCount32Patch8) {
  const auto grid = build_grid(32, 32, 8, true);
  EXPECT_EQ(grid.size(), 49u);
  EXPECT_EQ(count_base(grid), 16u);
  for (std::size_t i = 0; i < 16; ++i) EXPECT_FALSE(grid[i].shifted);
  for (std::size_t i = 16; i < 49; ++i) EXPECT_TRUE(grid[i].shifted);
  // Base tiling row-major.
  EXPECT_EQ(grid[0], (PatchPosition{0, 0, 8, false}));
  EXPECT_EQ(grid[1], (PatchPosition{0, 8, 8, false}));
  EXPECT_EQ(grid[4], (PatchPosition{8, 0, 8, false}));
  // H tiling first: offset 4 columns.
  EXPECT_EQ(grid[16], (PatchPosition{0, 4, 8, true}));
  // Diagonal last.
  EXPECT_EQ(grid[48], (PatchPosition{20, 20, 8, true}));
}

TEST(BuildGrid, Patch1HasNoShift) {
  const auto grid = build_grid(32, 32, 1, true);
  EXPECT_EQ(grid.size(), 1024u);
  EXPECT_EQ(count_base(grid), 1024u);
}

TEST(BuildGrid, SinglePatch) {
  const auto grid = build_grid(8, 8, 8, false);
  ASSERT_EQ(grid.size(), 1u);
  EXPECT_EQ(grid[0], (PatchPosition{0, 0, 8, false}));
}

TEST(BuildGrid, AllPatchesInsideAndDistinct) {
  for (int p : {2, 4, 8, 16}) {
    const auto grid = build_grid(32, 32, p, true);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      EXPECT_GE(grid[i].top, 0);
      EXPECT_LE(grid[i].top + p, 32);
      EXPECT_LE(grid[i].left + p, 32);
      for (std::size_t j = 0; j < i; ++j) EXPECT_FALSE(grid[i] == grid[j]);
    }
    const std::size_t n = 32 / p;
    EXPECT_EQ(grid.size(), n * n + 2 * n * (n - 1) + (n - 1) * (n - 1));
  }
}

TEST(BuildGrid, IndivisibleIsConfigError) {
  EXPECT_THROW(build_grid(32, 32, 5, true), ConfigError);
  EXPECT_THROW(build_grid(32, 30, 4, false), ConfigError);
  EXPECT_THROW(build_grid(32, 32, 0, false), ConfigError);
}

TEST(Eligible, AllOnesParentGivesFullGrid) {
  const auto grid = build_grid(32, 32, 4, true);
  const auto el = eligible_patches(grid, FrequencyMask::ones(32, 32));
  EXPECT_EQ(el, grid);
}

TEST(Eligible, AllZerosParentGivesNothing) {
  const auto grid = build_grid(32, 32, 4, true);
  EXPECT_TRUE(eligible_patches(grid, FrequencyMask::zeros(32, 32)).empty());
}

// Independent enumeration: every 4x4 window at any stride-2 offset that
// lies inside the 8x8 parent at (8, 8).
TEST(Eligible, SinglePatchParentMatchesEnumeration) {
  FrequencyMask parent = FrequencyMask::zeros(32, 32);
  parent.set_rect(8, 8, 8, 8);
  const auto el = eligible_patches(build_grid(32, 32, 4, true), parent);
  std::size_t expected = 0;
  for (int top = 0; top + 4 <= 32; top += 2) {
    for (int left = 0; left + 4 <= 32; left += 2) {
      if (top >= 8 && left >= 8 && top + 4 <= 16 && left + 4 <= 16) ++expected;
    }
  }
  EXPECT_EQ(expected, 9u);
  EXPECT_EQ(el.size(), expected);
  const auto base = std::count_if(el.begin(), el.end(), [](const auto& p) { return !p.shifted; });
  EXPECT_EQ(base, 4);
  for (const auto& p : el) EXPECT_TRUE(patch_mask(p, 32, 32).is_subset_of(parent));
}

TEST(Sample, SixtyPercentOfSixteenDisjoint) {
  const auto grid = build_grid(32, 32, 8, false);
  RandomStream rng(1);
  const auto m = sample_subset(grid, 16.0, 0.6, rng, 32, 32);
  EXPECT_EQ(m.count(), 10u * 64u);
  EXPECT_DOUBLE_EQ(m.coverage(), 10.0 / 16.0);
}

TEST(Sample, FullFractionReturnsParent) {
  FrequencyMask parent = FrequencyMask::zeros(32, 32);
  parent.set_rect(0, 0, 16, 16);
  const auto el = eligible_patches(build_grid(32, 32, 4, false), parent);
  RandomStream rng(2);
  const auto m = sample_subset(el, base_count_in(parent, 4), 1.0, rng, 32, 32);
  EXPECT_EQ(m, parent);
}

TEST(Sample, SameSeedSameMask) {
  const auto grid = build_grid(32, 32, 4, true);
  RandomStream a(77), b(77), c(78);
  const auto ma = sample_subset(grid, 64.0, 0.6, a, 32, 32);
  const auto mb = sample_subset(grid, 64.0, 0.6, b, 32, 32);
  const auto mc = sample_subset(grid, 64.0, 0.6, c, 32, 32);
  EXPECT_EQ(ma, mb);
  EXPECT_NE(ma, mc);
}

TEST(Sample, ShiftedPoolCoverageNeverExceedsBudget) {
  FrequencyMask parent = FrequencyMask::zeros(32, 32);
  parent.set_rect(8, 0, 16, 24);
  const auto el = eligible_patches(build_grid(32, 32, 4, true), parent);
  const double base = base_count_in(parent, 4);
  EXPECT_DOUBLE_EQ(base, 24.0);
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    RandomStream rng(seed);
    const auto m = sample_subset(el, base, 0.6, rng, 32, 32);
    ASSERT_TRUE(m.is_subset_of(parent));
    ASSERT_LE(m.count(), 14u * 16u);
    ASSERT_GE(m.count(), 7u * 16u);
  }
}

TEST(Sample, ChainCoverageTracksPower) {
  const int sizes[] = {8, 4, 2, 1};
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    FrequencyMask parent = FrequencyMask::ones(32, 32);
    for (int s = 0; s < 4; ++s) {
      const auto el = eligible_patches(build_grid(32, 32, sizes[s], true), parent);
      auto rng = RandomStream::derived(seed, {static_cast<std::uint64_t>(s)});
      FrequencyMask child = sample_subset(el, base_count_in(parent, sizes[s]), 0.6, rng, 32, 32);
      ASSERT_TRUE(child.is_subset_of(parent));
      parent = child;
    }
    total += parent.coverage();
  }
  EXPECT_NEAR(total / 100.0, std::pow(0.6, 4), 0.02);
}

TEST(Sample, Errors) {
  RandomStream rng(0);
  std::vector<PatchPosition> none;
  EXPECT_THROW(sample_subset(none, 4.0, 0.6, rng, 8, 8), SamplingError);
  const auto one = build_grid(8, 8, 8, false);
  EXPECT_THROW(sample_subset(one, 4.0, 0.6, rng, 8, 8), SamplingError);
  EXPECT_THROW(sample_subset(one, 1.0, 0.4, rng, 8, 8), SamplingError);
  EXPECT_THROW(sample_subset(one, 1.0, 0.0, rng, 8, 8), ConfigError);
  EXPECT_THROW(sample_subset(one, 1.0, 1.5, rng, 8, 8), ConfigError);
}

TEST(Presets, CandidateTotals) {
  EXPECT_EQ(preset_config("CF-1").total_candidates(), 15000u);
  EXPECT_EQ(preset_config("CF-2.10").total_candidates(), 70u);
  const auto c = preset_config("CF-2.10");
  ASSERT_EQ(c.stages.size(), 4u);
  EXPECT_EQ(c.stages[0].patch_size, 8);
  EXPECT_EQ(c.stages[3].patch_size, 1);
  EXPECT_DOUBLE_EQ(c.stages[2].sampling_fraction, 0.6);
  EXPECT_EQ(c.stages[1].parent_fanout, 5);
  const auto names = preset_names();
  EXPECT_EQ(names.size(), 13u);
  for (const auto& n : names) EXPECT_NO_THROW(preset_config(n).validate());
  EXPECT_NO_THROW(preset_config("cifar-default").validate_for(32, 32));
}

TEST(Presets, TypoListsAvailable) {
  try {
    preset_config("CF-2.11");
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("CF-2.11"), std::string::npos);
    EXPECT_NE(what.find("CF-2.10"), std::string::npos);
    EXPECT_NE(what.find("imagenet-default"), std::string::npos);
  }
}

TEST(Config, ValidationErrors) {
  SearchConfig c = preset_config("CF-2.10");
  c.stages[0].candidate_count = 3;  // B_1 < N
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_config("CF-2.10");
  c.stages[1].patch_size = 8;
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_config("CF-2.10");
  c.stages.resize(1);
  EXPECT_THROW(c.validate(), ConfigError);
  c = preset_config("CF-2.10");
  EXPECT_THROW(c.validate_for(30, 30), ConfigError);
  EXPECT_NO_THROW(c.validate_for(64, 32));
}

TEST(Config, ParseOverridesPreset) {
  const auto c = parse_search_config(R"({"preset": "CF-2.10", "p": 0.5, "seed": 9})");
  EXPECT_EQ(c.total_candidates(), 70u);
  EXPECT_EQ(c.seed, 9u);
  for (const auto& s : c.stages) EXPECT_DOUBLE_EQ(s.sampling_fraction, 0.5);

  const auto d = parse_search_config(
      R"({"stages": [{"patch_size": 4, "B": 6}, {"patch_size": 2, "B": 3, "p": 0.7}], "N": 2})");
  ASSERT_EQ(d.stages.size(), 2u);
  EXPECT_EQ(d.stages[0].parent_fanout, 2);
  EXPECT_DOUBLE_EQ(d.stages[0].sampling_fraction, 0.6);
  EXPECT_DOUBLE_EQ(d.stages[1].sampling_fraction, 0.7);
  EXPECT_EQ(d.seed, 42u);

  EXPECT_THROW(parse_search_config("{"), ConfigError);
  EXPECT_THROW(parse_search_config("[]"), ConfigError);
  EXPECT_THROW(parse_search_config(R"({"preset": "nope"})"), ConfigError);
  EXPECT_THROW(parse_search_config(R"({"stages": [{"patch_size": 4}]})"), ConfigError);
}

TEST(Config, FormatRoundTripAndHash) {
  const auto c = parse_search_config(R"({"preset": "CF-2.8", "seed": 3})");
  const auto again = parse_search_config(format_search_config(c));
  EXPECT_EQ(again.stages, c.stages);
  EXPECT_EQ(again.seed, c.seed);
  EXPECT_EQ(again.hash(), c.hash());
  EXPECT_EQ(c.hash().size(), 16u);
  auto other = c;
  other.seed = 4;
  EXPECT_NE(other.hash(), c.hash());
  other = c;
  other.preset.reset();
  EXPECT_EQ(other.hash(), c.hash());
}

TEST(Config, DefaultScheduleHalves) {
  const int budgets[] = {10, 10, 10, 10};
  const auto c = default_config_for(64, 64, 2, std::span<const int>(budgets, 4), 0.6, 5, 1);
  std::vector<int> sizes;
  for (const auto& s : c.stages) sizes.push_back(s.patch_size);
  EXPECT_EQ(sizes, (std::vector<int>{16, 8, 4, 2}));
  EXPECT_EQ(c.seed, 1u);
  EXPECT_THROW(default_config_for(64, 64, 2, std::span<const int>(budgets, 3), 0.6, 5, 1),
               ConfigError);
  EXPECT_THROW(default_config_for(32, 32, 16, std::span<const int>(budgets, 1), 0.6, 5, 1),
               ConfigError);
}

}  // namespace
}  // namespace hfss
