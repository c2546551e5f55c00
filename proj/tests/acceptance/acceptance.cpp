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

// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if
// any criterion fails.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hfss/harness.hpp"
#include "hfss/metrics.hpp"
#include "hfss/model.hpp"
#include "hfss/patch_grid.hpp"
#include "hfss/planted.hpp"
#include "hfss/random.hpp"
#include "hfss/search.hpp"
#include "hfss/spectral.hpp"

namespace hfss {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

class Detail {
 public:
  template <typename T>
  Detail& operator<<(const T& v) {
    out_ << v;
    return *this;
  }
  std::string str() const { return out_.str(); }

 private:
  std::ostringstream out_;
};

// Backend decorator counting images independently of the endpoint.
class CountingClassifier final : public Classifier {
 public:
  explicit CountingClassifier(std::shared_ptr<const Classifier> inner) : inner_(std::move(inner)) {}
  int class_count() const override { return inner_->class_count(); }
  ImageShape input_shape() const override { return inner_->input_shape(); }
  Logits predict(std::span<const ImageTensor> batch) const override {
    count_ += batch.size();
    return inner_->predict(batch);
  }
  std::size_t count() const { return count_.load(); }

 private:
  std::shared_ptr<const Classifier> inner_;
  mutable std::atomic<std::size_t> count_{0};
};

SearchConfig with_seed(SearchConfig c, std::uint64_t seed) {
  c.seed = seed;
  return c;
}

// ---- 1

Outcome spectral_round_trip() {
  const auto start = Clock::now();
  const ImageShape shapes[] = {{1, 32, 32}, {3, 32, 32}, {3, 224, 224}, {3, 64, 48}};
  RandomStream rng(2024);
  double worst = 0.0;
  for (int i = 0; i < 1000; ++i) {
    const ImageShape s = shapes[i % 4];
    std::vector<double> v(s.size());
    for (double& x : v) x = rng.uniform01();
    const ImageTensor image(s, v);
    const ImageTensor back = filter_image(image, FrequencyMask::ones(s.height, s.width));
    for (std::size_t k = 0; k < v.size(); ++k) {
      worst = std::max(worst, std::abs(back.values()[k] - v[k]));
    }
  }
  const double secs = seconds_since(start);
  return {worst < 1e-5 && secs < 10.0,
          (Detail() << "max_abs_err=" << worst << " (< 1e-5), " << secs << " s (< 10 s)").str()};
}

// ---- 2

// Mean coverage after each stage of a sampled mask chain (no model).
std::vector<double> chain_coverage(const SearchConfig& config, int height, int width,
                                   std::size_t stages, int chains) {
  std::vector<std::vector<PatchPosition>> grids;
  for (std::size_t s = 0; s < stages; ++s) {
    grids.push_back(build_grid(height, width, config.stages[s].patch_size, true));
  }
  std::vector<double> sum(stages, 0.0);
  for (int seed = 0; seed < chains; ++seed) {
    FrequencyMask parent = FrequencyMask::ones(height, width);
    for (std::size_t s = 0; s < stages; ++s) {
      const auto& plan = config.stages[s];
      auto rng = s == 0 ? RandomStream::derived(seed, {1, 0, 0})
                        : RandomStream::derived(seed, {s + 1, 1, 0});
      const auto eligible = eligible_patches(grids[s], parent);
      parent = sample_subset(eligible, base_count_in(parent, plan.patch_size),
                             plan.sampling_fraction, rng, height, width);
      sum[s] += parent.coverage();
    }
  }
  for (double& x : sum) x /= chains;
  return sum;
}

Outcome coverage_arithmetic() {
  const auto cifar = chain_coverage(preset_config("cifar-default"), 32, 32, 4, 100);
  const auto imagenet = chain_coverage(preset_config("imagenet-default"), 224, 224, 5, 100);
  const double want[] = {0.216, 0.130, 0.078};
  bool ok = std::abs(cifar[3] - 0.13) <= 0.05;
  Detail d;
  d << "cifar final=" << cifar[3] << " (0.13 +- 0.05); imagenet";
  for (int s = 0; s < 3; ++s) {
    ok = ok && std::abs(imagenet[s + 2] - want[s]) <= 0.05;
    d << " s" << s + 3 << "=" << imagenet[s + 2] << " (" << want[s] << ")";
  }
  return {ok, d.str()};
}

// ---- 3, 5, 8 share the oracle runs.

struct OracleRun {
  PlantedSpec spec;
  PlantedData data;
  std::shared_ptr<ClassifierEndpoint> endpoint;
  SearchConfig config;
  SearchResult result;
  ClassValues tpr;
  ClassValues tpr_dfm;
  std::vector<double> recovery;
  double seconds = 0.0;
};

std::vector<std::string> names_of(const PlantedSpec& spec) {
  std::vector<std::string> out;
  for (const auto& c : spec.classes) out.push_back(c.name);
  return out;
}

ClassValues per_class_dfm_tpr(const ClassifierEndpoint& ep, const LabeledDataset& test,
                              const DFMSet& dfms) {
  ClassValues out(dfms.classes.size());
  for (std::size_t c = 0; c < dfms.classes.size(); ++c) {
    out[c] = class_tpr(ep, test.images, &dfms.classes[c].mask)[c];
  }
  return out;
}

OracleRun oracle_run(PlantedSpec spec, std::uint64_t seed, int workers) {
  const auto start = Clock::now();
  OracleRun run;
  spec.seed = seed;
  run.spec = spec;
  run.data = generate_planted(spec, workers);
  run.endpoint = std::make_shared<ClassifierEndpoint>(
      std::make_shared<SpectralLinearClassifier>(planted_oracle(spec, run.data.train)));
  run.config = with_seed(preset_config("CF-2.10"), seed);
  const PreparedImages eval(run.data.train.images);
  SearchOptions opt;
  opt.workers = workers;
  run.result = run_search(run.config, *run.endpoint, eval, names_of(spec), opt);
  run.tpr = class_tpr(*run.endpoint, run.data.test.images, nullptr);
  run.tpr_dfm = per_class_dfm_tpr(*run.endpoint, run.data.test, run.result.dfms);
  for (std::size_t c = 0; c < run.data.truth.size(); ++c) {
    run.recovery.push_back(recovery_score(run.result.dfms.classes[c].mask, run.data.truth[c]));
  }
  run.seconds = seconds_since(start);
  return run;
}

const std::uint64_t kSeeds[] = {1, 2, 3};

std::vector<OracleRun>& oracle_runs() {
  static std::vector<OracleRun> runs;
  return runs;
}

Outcome planted_recovery() {
  bool ok = true;
  Detail d;
  for (std::uint64_t seed : kSeeds) {
    oracle_runs().push_back(oracle_run(default_planted_spec(), seed, 8));
    const auto& r = oracle_runs().back();
    const double min_rec = *std::min_element(r.recovery.begin(), r.recovery.end());
    double min_tpr = 1.0;
    for (const auto& v : r.tpr_dfm) min_tpr = std::min(min_tpr, v.value_or(0.0));
    ok = ok && min_rec >= 0.7 && min_tpr >= 0.9 && r.seconds < 300.0;
    d << "seed " << seed << ": min recovery=" << min_rec << " min TPR^DFM=" << min_tpr << " "
      << r.seconds << " s; ";
  }
  d << "limits 0.7 / 0.9 / 300 s";
  return {ok, d.str()};
}

// ---- 4

Outcome budget_exactness() {
  bool ok = true;
  Detail d;
  PlantedSpec spec = default_planted_spec();
  spec.train_per_class = 40;
  spec.test_per_class = 4;
  const auto data = generate_planted(spec, 8);
  auto counting = std::make_shared<CountingClassifier>(
      std::make_shared<SpectralLinearClassifier>(planted_oracle(spec, data.train)));
  const ClassifierEndpoint endpoint(counting);
  struct Case {
    const char* preset;
    std::size_t per_class;
  };
  for (const Case& c : {Case{"CF-2.10", 40}, Case{"CF-1", 4}}) {
    const auto config = preset_config(c.preset);
    const auto indices = select_eval_subset(data.train.labels(),
                                            std::vector<std::size_t>(4, c.per_class), 7);
    const auto subset = data.train.subset(indices);
    const PreparedImages eval(subset.images);
    const std::size_t before = counting->count();
    SearchOptions opt;
    opt.workers = 8;
    const auto result = run_search(config, endpoint, eval, names_of(spec), opt);
    const std::size_t counted = counting->count() - before;
    std::size_t sum_b = 0;
    for (const auto& s : config.stages) sum_b += static_cast<std::size_t>(s.candidate_count);
    const std::size_t expected = eval.size() * sum_b;
    ok = ok && counted == expected && result.trace.images_processed == expected &&
         result.trace.expected_images == expected;
    d << c.preset << ": counted=" << counted << " trace=" << result.trace.images_processed
      << " |eval|*sumB=" << eval.size() << "*" << sum_b << "=" << expected << "; ";
  }
  return {ok, d.str()};
}

// ---- 5

// Index that lands at position `rank` under a stable ascending order,
// found by counting rather than sorting.
std::size_t brute_rank_pick(const std::vector<double>& v, std::size_t rank) {
  for (std::size_t j = 0; j < v.size(); ++j) {
    std::size_t r = 0;
    for (std::size_t k = 0; k < v.size(); ++k) {
      if (v[k] < v[j] || (v[k] == v[j] && k < j)) ++r;
    }
    if (r == rank) return j;
  }
  return v.size();
}

Outcome trace_shape() {
  if (oracle_runs().empty()) return {false, "oracle runs unavailable"};
  std::size_t entries = 0;
  std::size_t bad_curve = 0;
  std::size_t bad_rank = 0;
  for (const auto& run : oracle_runs()) {
    for (const auto& e : run.result.trace.entries) {
      ++entries;
      for (std::size_t i = 1; i < e.best.size(); ++i) {
        if (e.best[i].second > e.best[i - 1].second) ++bad_curve;
      }
      const double lowest = *std::min_element(e.candidate_losses.begin(), e.candidate_losses.end());
      if (e.best.empty() || e.best.back().second != lowest) ++bad_curve;
      for (std::size_t i = 0; i < e.selected.size(); ++i) {
        if (e.selected[i] != brute_rank_pick(e.candidate_losses, i)) ++bad_rank;
      }
    }
  }
  return {entries > 0 && bad_curve == 0 && bad_rank == 0,
          (Detail() << entries << " stage/class traces; curve violations=" << bad_curve
                    << " rank mismatches=" << bad_rank)
              .str()};
}

// ---- 6

ClassValues defined(std::initializer_list<double> v) { return ClassValues(v.begin(), v.end()); }

std::optional<double> oracle_mean(const ClassValues& v, const std::vector<int>& members) {
  if (members.empty()) return std::nullopt;
  double s = 0.0;
  for (int c : members) s += *v[c];
  return s / static_cast<double>(members.size());
}

bool same(const std::optional<double>& a, const std::optional<double>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || std::abs(*a - *b) <= 1e-12;
}

std::vector<ShortcutReport>& collected_reports() {
  static std::vector<ShortcutReport> reports;
  return reports;
}

Outcome metrics_correctness() {
  Detail d;
  bool example = false;
  {
    const double t[] = {0.3};
    const auto r = group_and_average(defined({0.9, 0.5, 0.7}), defined({0.8, 0.1, 0.4}), t);
    const auto& row = r.rows.at(0);
    example = row.shortcut == std::vector<int>{0, 2} && row.non_shortcut == std::vector<int>{1} &&
              *row.tpr_sct == (0.9 + 0.7) / 2 && *row.tpr_dfm_sct == (0.8 + 0.4) / 2 &&
              *row.tpr_non_sct == 0.5 && *row.tpr_dfm_non_sct == 0.1 &&
              std::abs(*row.tpr_sct - 0.8) < 1e-15 && std::abs(*row.tpr_dfm_sct - 0.6) < 1e-15 &&
              r.undefined.empty();
  }
  d << "K=3 example " << (example ? "ok" : "WRONG");

  const auto thresholds = default_thresholds();
  std::size_t monotone_bad = 0;
  const auto counts = shortcut_class_counts(collected_reports());
  for (const auto& row : counts) {
    for (std::size_t i = 1; i < row.size(); ++i) {
      if (row[i] > row[i - 1]) ++monotone_bad;
    }
  }
  d << "; run count rows=" << counts.size() << " non-monotone=" << monotone_bad;

  RandomStream rng(99);
  std::size_t violations = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t k = 1 + rng.uniform_index(20);
    ClassValues tpr(k);
    ClassValues tpr_dfm(k);
    for (std::size_t c = 0; c < k; ++c) {
      if (rng.uniform01() > 0.1) tpr[c] = rng.uniform01();
      const double u = rng.uniform01();
      if (u < 0.1) continue;
      // Some values sit exactly on a threshold.
      tpr_dfm[c] = u < 0.3 ? thresholds[rng.uniform_index(thresholds.size())] : rng.uniform01();
    }
    const auto r = group_and_average(tpr, tpr_dfm, thresholds);
    std::vector<int> undefined;
    for (std::size_t c = 0; c < k; ++c) {
      if (!tpr[c] || !tpr_dfm[c]) undefined.push_back(static_cast<int>(c));
    }
    if (r.undefined != undefined) ++violations;
    std::set<int> previous;
    for (std::size_t i = 0; i < r.rows.size(); ++i) {
      const auto& row = r.rows[i];
      std::vector<int> want_sct;
      std::vector<int> want_non;
      for (std::size_t c = 0; c < k; ++c) {
        if (!tpr[c] || !tpr_dfm[c]) continue;
        (*tpr_dfm[c] > thresholds[i] ? want_sct : want_non).push_back(static_cast<int>(c));
      }
      if (row.shortcut != want_sct || row.non_shortcut != want_non) ++violations;
      if (row.shortcut.size() + row.non_shortcut.size() + r.undefined.size() != k) ++violations;
      const std::set<int> current(row.shortcut.begin(), row.shortcut.end());
      if (i > 0 && !std::includes(previous.begin(), previous.end(), current.begin(), current.end())) {
        ++violations;
      }
      previous = current;
      if (!same(row.tpr_sct, oracle_mean(tpr, want_sct)) ||
          !same(row.tpr_dfm_sct, oracle_mean(tpr_dfm, want_sct)) ||
          !same(row.tpr_non_sct, oracle_mean(tpr, want_non)) ||
          !same(row.tpr_dfm_non_sct, oracle_mean(tpr_dfm, want_non))) {
        ++violations;
      }
    }
  }
  d << "; random vectors=1000 violations=" << violations;
  return {example && !counts.empty() && monotone_bad == 0 && violations == 0, d.str()};
}

// ---- 7

Outcome group_inversion() {
  PlantedSpec spec = mixed_planted_spec();
  spec.seed = 11;
  const auto data = generate_planted(spec, 8);
  const ClassifierEndpoint endpoint(
      std::make_shared<SpectralLinearClassifier>(planted_oracle(spec, data.train)));
  SearchOptions opt;
  opt.workers = 8;
  const auto result = run_search(with_seed(preset_config("CF-2.10"), 11), endpoint,
                                 PreparedImages(data.train.images), names_of(spec), opt);
  const std::vector<DatasetEntry> sets = {
      {"id", DatasetRole::kIdTest, data.test, {}},
      {"texture", DatasetRole::kOodTexture, generate_planted_ood(spec, OodStyle::kTexture, 200, 8),
       {}},
      {"rendition", DatasetRole::kOodRendition,
       generate_planted_ood(spec, OodStyle::kRendition, 200, 8), {}}};
  const double t[] = {0.5};
  const auto run = evaluate_datasets(endpoint, result.dfms, sets, t, 8);
  for (const auto& ds : run.datasets) collected_reports().push_back(ds.report);
  const auto& id = run.datasets[0].report.rows[0];
  const auto& tex = run.datasets[1].report.rows[0];
  const auto& ren = run.datasets[2].report.rows[0];
  Detail d;
  d << "t=0.5 groups sct=" << id.shortcut.size() << " non-sct=" << id.non_shortcut.size() << "; ";
  if (!id.tpr_sct || !tex.tpr_sct || !ren.tpr_sct || !ren.tpr_non_sct) {
    d << "a group is empty";
    return {false, d.str()};
  }
  const double tex_gap = std::abs(*tex.tpr_sct - *id.tpr_sct);
  const double ren_gap = *ren.tpr_non_sct - *ren.tpr_sct;
  d << "texture |sct-ID sct|=" << tex_gap << " (<= 0.05); rendition non-sct - sct=" << ren_gap
    << " (>= 0.2)";
  return {tex_gap <= 0.05 && ren_gap >= 0.2, d.str()};
}

// ---- 8

Outcome determinism() {
  if (oracle_runs().empty()) return {false, "oracle runs unavailable"};
  bool ok = true;
  Detail d;
  for (const auto& eight : oracle_runs()) {
    const auto one = oracle_run(default_planted_spec(), eight.config.seed, 1);
    const std::string a = encode_dfm(one.result.dfms);
    const std::string b = encode_dfm(eight.result.dfms);
    ok = ok && a == b;
    d << "seed " << eight.config.seed << ": " << a.size() << " bytes " << (a == b ? "identical" : "DIFFER")
      << "; ";
  }
  d << "workers 1 vs 8";
  return {ok, d.str()};
}

}  // namespace
}  // namespace hfss

int main() {
  using namespace hfss;
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "spectral round trip", spectral_round_trip},
      {2, "coverage arithmetic", coverage_arithmetic},
      {3, "planted-shortcut recovery", planted_recovery},
      {4, "evaluation-budget exactness", budget_exactness},
      {5, "trace shape", trace_shape},
      {7, "group inversion", group_inversion},
      {6, "metrics correctness", metrics_correctness},
      {8, "determinism", determinism},
  };
  // 6 reads the reports collected by 3 and 7.
  std::vector<std::pair<int, std::string>> lines;
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      if (c.id == 6) {
        for (const auto& r : oracle_runs()) {
          collected_reports().push_back(group_and_average(r.tpr, r.tpr_dfm, default_thresholds()));
        }
      }
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    lines.emplace_back(c.id, std::string(o.pass ? "PASS" : "FAIL") + " [" + std::to_string(c.id) +
                                 "] " + c.name + ": " + o.detail);
    std::fprintf(stderr, "criterion %d done\n", c.id);
  }
  std::sort(lines.begin(), lines.end());
  for (const auto& [id, line] : lines) std::printf("%s\n", line.c_str());
  return failures == 0 ? 0 : 1;
}
