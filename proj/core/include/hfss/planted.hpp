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

#ifndef HFSS_PLANTED_HPP_
#define HFSS_PLANTED_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hfss/data.hpp"
#include "hfss/model.hpp"
#include "hfss/spectral.hpp"

namespace hfss {

// Bins are given relative to the zero-frequency bin (row, column).
struct BandSpec {
  enum class Kind { kBar, kScatter, kBins };
  Kind kind = Kind::kBar;
  // kBar: bins at +-k * direction for k in offsets.
  std::pair<int, int> direction{0, 1};
  std::vector<int> offsets{1, 2};
  // kScatter: `pairs` random point-symmetric pairs at Chebyshev radius
  // >= min_radius, avoiding every other band.
  int pairs = 40;
  int min_radius = 1;
  // kBins: explicit bins; the set must be point-symmetric.
  std::vector<std::pair<int, int>> bins;
};

struct PlantedClass {
  std::string name;
  BandSpec band;
  // Fraction of typical band evidence the oracle requires (see
  // SpectralLinearClassifier::evidence_detector).
  double required_fraction = 0.2;
};

struct PlantedSpec {
  std::vector<PlantedClass> classes;
  int channels = 1;
  int height = 32;
  int width = 32;
  double sigma = 0.05;
  double amplitude_min = 0.5;
  double amplitude_max = 1.0;
  int train_per_class = 200;
  int test_per_class = 200;
  std::uint64_t seed = 1;
  double gain = 10.0;
  // Out-of-distribution variants.
  double texture_sigma = 0.1;  // same bands, new noise
  int rendition_shift = 2;  // bar offsets pushed outward by this many bins

  std::string hash() const;
};

// Four bars through the center along the horizontal, vertical and both
// diagonal directions, 4 bins each.
PlantedSpec default_planted_spec();
// default_planted_spec() plus `broad` classes whose evidence is spread
// over scattered pairs and demanded almost in full.
PlantedSpec mixed_planted_spec(int broad = 4);

PlantedSpec parse_planted_spec(std::string_view text);
std::string format_planted_spec(const PlantedSpec& spec);

// Ground-truth bands. Throws ConfigError naming the classes when two
// bands overlap, and on asymmetric, out-of-range or oversized (> 10% of
// the spectrum) bands.
std::vector<FrequencyMask> planted_bands(const PlantedSpec& spec);
// Bands used by the rendition-style variant: bars shifted outward onto
// free bins, other bands unchanged.
std::vector<FrequencyMask> rendition_bands(const PlantedSpec& spec);

struct PlantedData {
  LabeledDataset train;
  LabeledDataset test;
  std::vector<FrequencyMask> truth;
};

PlantedData generate_planted(const PlantedSpec& spec, int workers = 1);

enum class OodStyle { kTexture, kRendition };
LabeledDataset generate_planted_ood(const PlantedSpec& spec, OodStyle style, int per_class,
                                    int workers = 1);

// Evidence detector over the ground-truth bands, calibrated on `train`.
SpectralLinearClassifier planted_oracle(const PlantedSpec& spec, const LabeledDataset& train);

// |dfm & truth| / |truth|. Throws ConfigError on an empty truth or a
// shape mismatch.
double recovery_score(const FrequencyMask& dfm, const FrequencyMask& truth);

}  // namespace hfss

#endif  // HFSS_PLANTED_HPP_
