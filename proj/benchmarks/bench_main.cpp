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

#include <benchmark/benchmark.h>

#include <memory>
#include <vector>

#include "hfss/model.hpp"
#include "hfss/patch_grid.hpp"
#include "hfss/planted.hpp"
#include "hfss/random.hpp"
#include "hfss/search.hpp"
#include "hfss/spectral.hpp"

namespace {

using namespace hfss;

ImageTensor noise(ImageShape shape, std::uint64_t seed) {
  RandomStream rng(seed);
  std::vector<double> v(shape.size());
  for (double& x : v) x = rng.uniform01();
  return ImageTensor(shape, std::move(v));
}

FrequencyMask half_mask(int h, int w) {
  FrequencyMask m(h, w);
  m.set_rect(0, 0, h / 2, w);
  return m;
}

void BM_FilterImage(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const ImageTensor image = noise({3, side, side}, 1);
  const FrequencyMask mask = half_mask(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(filter_image(image, mask));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FilterImage)->Arg(32)->Arg(224);

void BM_FilterCachedSpectra(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const auto spectra = forward_spectrum(noise({3, side, side}, 2));
  const FrequencyMask mask = half_mask(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(filter_spectra(spectra, mask));
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_FilterCachedSpectra)->Arg(32)->Arg(224);

void BM_SampleSubset(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int patch = static_cast<int>(state.range(1));
  const auto parent_grid = build_grid(side, side, patch * 2, true);
  RandomStream seed_rng(3);
  const FrequencyMask parent = sample_subset(parent_grid, static_cast<double>(count_base(parent_grid)),
                                             0.6, seed_rng, side, side);
  const auto grid = build_grid(side, side, patch, true);
  const auto eligible = eligible_patches(grid, parent);
  const double base = base_count_in(parent, patch);
  RandomStream rng(4);
  for (auto _ : state) benchmark::DoNotOptimize(sample_subset(eligible, base, 0.6, rng, side, side));
}
BENCHMARK(BM_SampleSubset)->Args({32, 2})->Args({224, 4});

void BM_EligiblePatches(benchmark::State& state) {
  const int side = static_cast<int>(state.range(0));
  const int patch = static_cast<int>(state.range(1));
  const auto grid = build_grid(side, side, patch, true);
  const FrequencyMask parent = half_mask(side, side);
  for (auto _ : state) benchmark::DoNotOptimize(eligible_patches(grid, parent));
}
BENCHMARK(BM_EligiblePatches)->Args({32, 2})->Args({224, 4});

struct OracleWorld {
  OracleWorld() {
    PlantedSpec spec = default_planted_spec();
    spec.train_per_class = 50;
    spec.test_per_class = 1;
    data = generate_planted(spec);
    endpoint = std::make_unique<ClassifierEndpoint>(
        std::make_shared<SpectralLinearClassifier>(planted_oracle(spec, data.train)));
    eval = PreparedImages(data.train.images);
  }
  PlantedData data;
  std::unique_ptr<ClassifierEndpoint> endpoint;
  PreparedImages eval;
};

const OracleWorld& world() {
  static const OracleWorld w;
  return w;
}

void BM_StageOne(benchmark::State& state) {
  const auto& w = world();
  SearchConfig config = preset_config("CF-2.10");
  SearchOptions opt;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_stage_one(config, *w.endpoint, w.eval, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.eval.size()) *
                          config.stages.front().candidate_count);
}
BENCHMARK(BM_StageOne)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

void BM_FullSearch(benchmark::State& state) {
  const auto& w = world();
  const SearchConfig config = preset_config("CF-2.10");
  SearchOptions opt;
  opt.workers = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(run_search(config, *w.endpoint, w.eval, {}, opt));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(w.eval.size()) *
                          static_cast<std::int64_t>(config.total_candidates()));
}
BENCHMARK(BM_FullSearch)->Arg(1)->Arg(4)->UseRealTime()->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
