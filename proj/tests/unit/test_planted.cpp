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

#include "hfss/error.hpp"
#include "hfss/planted.hpp"
#include "hfss/random.hpp"

namespace hfss {
namespace {

ClassifierEndpoint oracle_endpoint(const PlantedSpec& spec, const PlantedData& data) {
  return ClassifierEndpoint(std::make_shared<SpectralLinearClassifier>(planted_oracle(spec, data.train)));
}

std::vector<ImageTensor> class_images(const LabeledDataset& ds, int c) {
  std::vector<ImageTensor> out;
  for (const auto& im : ds.images) {
    if (*im.label() == c) out.push_back(im);
  }
  return out;
}

const PlantedData& default_data() {
  static const PlantedData d = generate_planted(default_planted_spec(), 2);
  return d;
}

TEST(Spec, DefaultBandsDisjointSymmetricCompact) {
  const auto spec = default_planted_spec();
  ASSERT_EQ(spec.classes.size(), 4u);
  const auto bands = planted_bands(spec);
  for (std::size_t a = 0; a < bands.size(); ++a) {
    EXPECT_EQ(bands[a].count(), 4u);
    EXPECT_FALSE(bands[a].test(16, 16));
    for (int u = 0; u < 32; ++u) {
      for (int v = 0; v < 32; ++v) {
        if (bands[a].test(u, v)) {
          EXPECT_TRUE(bands[a].test((32 - u) % 32, (32 - v) % 32));
        }
      }
    }
    for (std::size_t b = 0; b < a; ++b) {
      EXPECT_EQ(mask_intersection(bands[a], bands[b]).count(), 0u);
    }
  }
  const auto shifted = rendition_bands(spec);
  for (std::size_t a = 0; a < bands.size(); ++a) {
    EXPECT_EQ(shifted[a].count(), bands[a].count());
    for (const auto& b : bands) EXPECT_EQ(mask_intersection(shifted[a], b).count(), 0u);
  }
}

TEST(Spec, OverlapNamesBothClasses) {
  auto spec = default_planted_spec();
  spec.classes[3].band.direction = spec.classes[0].band.direction;
  try {
    planted_bands(spec);
    FAIL();
  } catch (const ConfigError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find(spec.classes[0].name), std::string::npos);
    EXPECT_NE(what.find(spec.classes[3].name), std::string::npos);
  }
}

TEST(Spec, OversizedAsymmetricOutOfRange) {
  auto big = mixed_planted_spec(1);
  big.classes.back().band.pairs = 60;  // 120 bins > 10% of 1024
  EXPECT_THROW(planted_bands(big), ConfigError);

  auto asym = default_planted_spec();
  asym.classes[0].band.kind = BandSpec::Kind::kBins;
  asym.classes[0].band.bins = {{1, 5}};
  EXPECT_THROW(planted_bands(asym), ConfigError);

  auto far = default_planted_spec();
  far.classes[0].band.offsets = {20};
  EXPECT_THROW(planted_bands(far), ConfigError);
}

TEST(Spec, TextRoundTrip) {
  const auto spec = mixed_planted_spec(2);
  const auto back = parse_planted_spec(format_planted_spec(spec));
  EXPECT_EQ(back.hash(), spec.hash());
  EXPECT_EQ(format_planted_spec(back), format_planted_spec(spec));
  EXPECT_THROW(parse_planted_spec(R"({"classes": [], "bogus": 1})"), ConfigError);
  EXPECT_THROW(parse_planted_spec("{"), ConfigError);
  auto other = spec;
  other.seed += 1;
  EXPECT_NE(other.hash(), spec.hash());
}

TEST(Generate, SameSpecSameBits) {
  auto spec = default_planted_spec();
  spec.train_per_class = 5;
  spec.test_per_class = 5;
  const auto a = generate_planted(spec, 1);
  const auto b = generate_planted(spec, 3);
  ASSERT_EQ(a.test.size(), 20u);
  EXPECT_EQ(a.train.checksum, b.train.checksum);
  EXPECT_EQ(a.test.checksum, b.test.checksum);
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    ASSERT_TRUE(std::equal(a.test.images[i].values().begin(), a.test.images[i].values().end(),
                           b.test.images[i].values().begin()));
  }
  EXPECT_NE(a.train.checksum, a.test.checksum);
  spec.seed = 2;
  EXPECT_NE(generate_planted(spec).test.checksum, a.test.checksum);
}

TEST(Oracle, NoiselessIsPerfect) {
  auto spec = default_planted_spec();
  spec.sigma = 0.0;
  spec.train_per_class = 20;
  spec.test_per_class = 50;
  const auto data = generate_planted(spec);
  const auto ep = oracle_endpoint(spec, data);
  for (const auto& t : class_tpr(ep, data.test.images, nullptr)) EXPECT_EQ(*t, 1.0);
}

TEST(Oracle, DefaultNoiseStillNearPerfect) {
  const auto spec = default_planted_spec();
  const auto& data = default_data();
  EXPECT_EQ(data.test.size(), 800u);
  const auto ep = oracle_endpoint(spec, data);
  for (const auto& t : class_tpr(ep, data.test.images, nullptr)) EXPECT_GE(*t, 0.99);
}

TEST(Oracle, OwnBandMaskKeepsLabel) {
  const auto spec = default_planted_spec();
  const auto& data = default_data();
  const auto ep = oracle_endpoint(spec, data);
  for (int c = 0; c < 4; ++c) {
    const auto tpr = class_tpr(ep, class_images(data.test, c), &data.truth[c]);
    EXPECT_GE(*tpr[c], 0.99) << c;
  }
}

TEST(Oracle, RemovingBandDropsToChance) {
  const auto spec = default_planted_spec();
  const auto& data = default_data();
  const auto ep = oracle_endpoint(spec, data);
  for (int c = 0; c < 4; ++c) {
    FrequencyMask keep = FrequencyMask::ones(32, 32);
    for (int u = 0; u < 32; ++u) {
      for (int v = 0; v < 32; ++v) {
        if (data.truth[c].test(u, v)) keep.set(u, v, false);
      }
    }
    const auto tpr = class_tpr(ep, class_images(data.test, c), &keep);
    EXPECT_LE(*tpr[c], 1.0 / 4 + 0.1) << c;
  }
}

TEST(Oracle, EvidenceMonotoneUnderAblation) {
  const auto spec = default_planted_spec();
  const auto& data = default_data();
  const auto model = planted_oracle(spec, data.train);
  const auto images = class_images(data.test, 0);
  const std::vector<ImageTensor> one(images.begin(), images.begin() + 50);
  RandomStream rng(3);
  std::vector<std::pair<int, int>> bins;
  for (int u = 0; u < 32; ++u) {
    for (int v = 0; v < 32; ++v) {
      if (data.truth[0].test(u, v) && (u < 16 || (u == 16 && v < 16))) bins.emplace_back(u, v);
    }
  }
  // Dropping mirrored pairs from the band never raises the class logit.
  for (int trial = 0; trial < 50; ++trial) {
    FrequencyMask full = FrequencyMask::ones(32, 32);
    FrequencyMask less = full;
    rng.shuffle(bins);
    for (std::size_t k = 0; k < bins.size() / 2; ++k) {
      less.set(bins[k].first, bins[k].second, false);
      less.set((32 - bins[k].first) % 32, (32 - bins[k].second) % 32, false);
    }
    std::vector<ImageTensor> a, b;
    for (const auto& im : one) {
      a.push_back(filter_image(im, full));
      b.push_back(filter_image(im, less));
    }
    const Logits za = model.predict(a), zb = model.predict(b);
    for (std::size_t r = 0; r < one.size(); ++r) ASSERT_LE(zb.at(r, 0), za.at(r, 0) + 1e-9);
  }
}

TEST(Ood, TextureKeepsEvidenceRenditionRemovesIt) {
  const auto spec = default_planted_spec();
  const auto& data = default_data();
  const auto ep = oracle_endpoint(spec, data);
  const auto texture = generate_planted_ood(spec, OodStyle::kTexture, 100);
  const auto rendition = generate_planted_ood(spec, OodStyle::kRendition, 100);
  EXPECT_EQ(texture.split, "ood");
  EXPECT_EQ(texture.size(), 400u);
  const auto tt = class_tpr(ep, texture.images, nullptr);
  const auto tr = class_tpr(ep, rendition.images, nullptr);
  for (int c = 0; c < 4; ++c) {
    EXPECT_GE(*tt[c], 0.95) << c;
    EXPECT_LE(*tr[c], 0.5) << c;
  }
}

TEST(Recovery, Examples) {
  FrequencyMask truth = FrequencyMask::zeros(8, 8);
  truth.set_rect(2, 2, 4, 2);
  EXPECT_EQ(recovery_score(truth, truth), 1.0);
  FrequencyMask disjoint = FrequencyMask::zeros(8, 8);
  disjoint.set_rect(0, 0, 2, 8);
  EXPECT_EQ(recovery_score(disjoint, truth), 0.0);
  FrequencyMask half = disjoint;
  half.set_rect(2, 2, 2, 2);
  EXPECT_EQ(recovery_score(half, truth), 0.5);
  EXPECT_EQ(recovery_score(FrequencyMask::ones(8, 8), truth), 1.0);
  EXPECT_THROW(recovery_score(truth, FrequencyMask::zeros(8, 8)), ConfigError);
  EXPECT_THROW(recovery_score(FrequencyMask::zeros(8, 16), truth), ConfigError);
}

}  // namespace
}  // namespace hfss
