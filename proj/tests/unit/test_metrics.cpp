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

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/metrics.hpp"
#include "hfss/random.hpp"
#include "test_util.hpp"

namespace hfss {
namespace {

ClassValues values(std::initializer_list<double> v) {
  ClassValues out;
  for (double x : v) out.emplace_back(x);
  return out;
}

TEST(Thresholds, DefaultsAndParsing) {
  const auto t = default_thresholds();
  ASSERT_EQ(t.size(), 9u);
  EXPECT_EQ(t[2], 0.3);
  EXPECT_EQ(t[8], 0.9);
  EXPECT_EQ(parse_thresholds("0.25,0.5,0.75"), (std::vector<double>{0.25, 0.5, 0.75}));
  EXPECT_THROW(parse_thresholds(""), ConfigError);
  EXPECT_THROW(parse_thresholds("0.5,0.4"), ConfigError);
  EXPECT_THROW(parse_thresholds("0.5,0.5"), ConfigError);
  EXPECT_THROW(parse_thresholds("1.0"), ConfigError);
  EXPECT_THROW(parse_thresholds("0"), ConfigError);
  EXPECT_THROW(parse_thresholds("half"), ConfigError);
}

TEST(Groups, HandComputedThreeClassExample) {
  const double t[] = {0.3};
  const auto r = group_and_average(values({0.9, 0.5, 0.7}), values({0.8, 0.1, 0.4}), t);
  ASSERT_EQ(r.rows.size(), 1u);
  const auto& row = r.rows[0];
  EXPECT_EQ(row.shortcut, (std::vector<int>{0, 2}));
  EXPECT_EQ(row.non_shortcut, (std::vector<int>{1}));
  EXPECT_DOUBLE_EQ(*row.tpr_sct, 0.8);
  EXPECT_DOUBLE_EQ(*row.tpr_dfm_sct, 0.6);
  EXPECT_EQ(*row.tpr_non_sct, 0.5);
  EXPECT_EQ(*row.tpr_dfm_non_sct, 0.1);
  EXPECT_FALSE(row.dfm_exceeds_full);
  EXPECT_TRUE(r.undefined.empty());
}

TEST(Groups, AllOnesDfmMeansEveryClassShortcut) {
  const auto t = default_thresholds();
  const auto r = group_and_average(values({0.2, 0.4, 0.6, 0.8}), values({1, 1, 1, 1}), t);
  for (const auto& row : r.rows) {
    EXPECT_EQ(row.shortcut.size(), 4u);
    EXPECT_TRUE(row.non_shortcut.empty());
    EXPECT_FALSE(row.tpr_non_sct.has_value());
    EXPECT_FALSE(row.tpr_dfm_non_sct.has_value());
  }
}

TEST(Groups, DfmExceedsFullFlag) {
  const double t[] = {0.5, 0.9};
  const auto r = group_and_average(values({0.6, 0.9, 0.3}), values({0.95, 0.2, 0.1}), t);
  EXPECT_EQ(r.rows[1].shortcut, std::vector<int>{0});
  EXPECT_TRUE(r.rows[1].dfm_exceeds_full);
  EXPECT_TRUE(r.rows[0].dfm_exceeds_full);
}

TEST(Groups, BoundaryValueIsNotShortcut) {
  const double t[] = {0.5};
  const auto r = group_and_average(values({0.5, 0.5}), values({0.5, 0.5000001}), t);
  EXPECT_EQ(r.rows[0].shortcut, std::vector<int>{1});
  EXPECT_EQ(r.rows[0].non_shortcut, std::vector<int>{0});
}

TEST(Groups, ZeroDfmGivesZeroCounts) {
  const auto t = default_thresholds();
  const auto r = group_and_average(values({0.5, 0.6, 0.7}), values({0, 0, 0}), t);
  const ShortcutReport reports[] = {r};
  const auto counts = shortcut_class_counts(reports);
  for (auto n : counts[0]) EXPECT_EQ(n, 0u);
  for (const auto& row : r.rows) EXPECT_FALSE(row.tpr_sct.has_value());
}

TEST(Groups, UndefinedClassesExcluded) {
  ClassValues tpr = values({0.9, 0.8, 0.7});
  ClassValues dfm = values({0.9, 0.95, 0.2});
  tpr[1].reset();
  const double t[] = {0.5};
  const auto r = group_and_average(tpr, dfm, t);
  EXPECT_EQ(r.undefined, std::vector<int>{1});
  EXPECT_EQ(r.rows[0].shortcut, std::vector<int>{0});
  EXPECT_EQ(*r.rows[0].tpr_sct, 0.9);

  dfm[2].reset();
  const auto g = classify_groups(dfm, t);
  EXPECT_EQ(g.undefined, std::vector<int>{2});
  EXPECT_EQ(g.non_shortcut[0], std::vector<int>{});
}

TEST(Groups, LengthMismatch) {
  const double t[] = {0.5};
  EXPECT_THROW(group_and_average(values({0.1, 0.2}), values({0.1}), t), ConfigError);
  const auto g = classify_groups(values({0.1, 0.2}), t);
  EXPECT_THROW(summarize(g, values({0.1, 0.2, 0.3}), values({0.1, 0.2, 0.3})), ConfigError);
}

TEST(Groups, RandomVectorsNestAndPartition) {
  RandomStream rng(12);
  const auto t = default_thresholds();
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(20);
    ClassValues tpr(k), dfm(k);
    for (std::size_t c = 0; c < k; ++c) {
      tpr[c] = rng.uniform01();
      // coarse values so some land exactly on thresholds
      dfm[c] = std::floor(rng.uniform01() * 11) / 10.0;
      if (rng.uniform_index(15) == 0) dfm[c].reset();
    }
    const auto g = classify_groups(dfm, t);
    for (std::size_t i = 0; i < t.size(); ++i) {
      std::vector<int> all = g.shortcut[i];
      all.insert(all.end(), g.non_shortcut[i].begin(), g.non_shortcut[i].end());
      all.insert(all.end(), g.undefined.begin(), g.undefined.end());
      std::sort(all.begin(), all.end());
      ASSERT_EQ(all.size(), k);
      for (std::size_t c = 0; c < k; ++c) ASSERT_EQ(all[c], static_cast<int>(c));
      if (i > 0) {
        ASSERT_TRUE(std::includes(g.shortcut[i - 1].begin(), g.shortcut[i - 1].end(),
                                  g.shortcut[i].begin(), g.shortcut[i].end()));
        ASSERT_TRUE(std::includes(g.non_shortcut[i].begin(), g.non_shortcut[i].end(),
                                  g.non_shortcut[i - 1].begin(), g.non_shortcut[i - 1].end()));
      }
      for (int c : g.shortcut[i]) ASSERT_GT(*dfm[c], t[i]);
      for (int c : g.non_shortcut[i]) ASSERT_LE(*dfm[c], t[i]);
    }
    const ShortcutReport reports[] = {summarize(g, tpr, dfm)};
    const auto counts = shortcut_class_counts(reports)[0];
    for (std::size_t i = 1; i < counts.size(); ++i) ASSERT_LE(counts[i], counts[i - 1]);
  }
}

TEST(Files, ClassTprRoundTripIsExact) {
  testing::TempDir dir;
  ClassTprTable table;
  table.config_hash = "0123456789abcdef";
  table.class_names = {"a", "b", "c"};
  table.tpr = values({0.1, 2.0 / 3.0, 1.0});
  table.tpr_dfm = values({1e-17, 0.3, 0.0});
  table.tpr_dfm[2].reset();
  write_class_tpr(table, dir / "x.tsv");
  const auto back = read_class_tpr(dir / "x.tsv");
  EXPECT_EQ(back.config_hash, table.config_hash);
  EXPECT_EQ(back.class_names, table.class_names);
  EXPECT_EQ(back.tpr, table.tpr);
  EXPECT_EQ(back.tpr_dfm, table.tpr_dfm);
  write_class_tpr(back, dir / "y.tsv");
  EXPECT_EQ(read_file(dir / "x.tsv"), read_file(dir / "y.tsv"));
  EXPECT_THROW(read_class_tpr(dir / "absent.tsv"), IoError);
}

TEST(Files, ReportAndPlotAreDeterministic) {
  testing::TempDir dir;
  const auto t = default_thresholds();
  const auto r = group_and_average(values({0.9, 0.5, 0.7}), values({0.8, 0.1, 0.4}), t);
  const std::vector<std::string> names{"x", "y", "z"};
  write_report_tsv(r, names, "h", dir / "r1.tsv");
  write_report_tsv(r, names, "h", dir / "r2.tsv");
  write_plot_data(r, "h", dir / "p.tsv");
  EXPECT_EQ(read_file(dir / "r1.tsv"), read_file(dir / "r2.tsv"));
  const std::string report = read_file(dir / "r1.tsv");
  EXPECT_NE(report.find("x,z"), std::string::npos);
  EXPECT_NE(report.find("NA"), std::string::npos);
  EXPECT_EQ(format_value(std::nullopt), "NA");
  EXPECT_EQ(format_value(0.1), "0.10000000000000001");
}

}  // namespace
}  // namespace hfss
