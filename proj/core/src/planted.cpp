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

#include "hfss/planted.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <set>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/random.hpp"
#include "hfss/worker_pool.hpp"

namespace hfss {
namespace {

using nlohmann::json;
using Bin = std::pair<int, int>;  // absolute (row, column) in the shifted layout

constexpr std::uint64_t kTrainTag = 1;
constexpr std::uint64_t kTestTag = 2;
constexpr std::uint64_t kTextureTag = 3;
constexpr std::uint64_t kRenditionTag = 4;
constexpr std::uint64_t kScatterTag = 5;

Bin mirror(const PlantedSpec& s, Bin b) {
  return {(s.height - b.first) % s.height, (s.width - b.second) % s.width};
}

std::string kind_name(BandSpec::Kind k) {
  switch (k) {
    case BandSpec::Kind::kBar: return "bar";
    case BandSpec::Kind::kScatter: return "scatter";
    case BandSpec::Kind::kBins: return "bins";
  }
  return "?";
}

Bin absolute(const PlantedSpec& s, int du, int dv, const std::string& cls) {
  const int u = s.height / 2 + du;
  const int v = s.width / 2 + dv;
  if (u < 0 || u >= s.height || v < 0 || v >= s.width) {
    throw ConfigError("class '" + cls + "': bin (" + std::to_string(du) + ", " + std::to_string(dv) +
                      ") lies outside the spectrum");
  }
  return {u, v};
}

std::set<Bin> bar_bins(const PlantedSpec& s, const PlantedClass& c, int shift) {
  std::set<Bin> out;
  const auto [dy, dx] = c.band.direction;
  if ((dy == 0 && dx == 0) || std::abs(dy) > 1 || std::abs(dx) > 1) {
    throw ConfigError("class '" + c.name + "': bar direction must be a unit step");
  }
  if (c.band.offsets.empty()) throw ConfigError("class '" + c.name + "': bar has no offsets");
  for (int k : c.band.offsets) {
    if (k <= 0) throw ConfigError("class '" + c.name + "': bar offsets must be positive");
    out.insert(absolute(s, (k + shift) * dy, (k + shift) * dx, c.name));
    out.insert(absolute(s, -(k + shift) * dy, -(k + shift) * dx, c.name));
  }
  return out;
}

std::set<Bin> explicit_bins(const PlantedSpec& s, const PlantedClass& c) {
  std::set<Bin> out;
  for (const auto& [du, dv] : c.band.bins) out.insert(absolute(s, du, dv, c.name));
  for (const Bin& b : out) {
    if (!out.count(mirror(s, b))) {
      throw ConfigError("class '" + c.name + "': band is not point-symmetric about the center");
    }
  }
  if (out.empty()) throw ConfigError("class '" + c.name + "': band has no bins");
  return out;
}

struct BandLayout {
  std::vector<std::set<Bin>> bands;
  std::vector<std::set<Bin>> rendition;
};

BandLayout layout(const PlantedSpec& s) {
  if (s.classes.size() < 2) throw ConfigError("planted spec needs at least two classes");
  validate_shape({s.channels, s.height, s.width});
  BandLayout out;
  out.bands.resize(s.classes.size());
  out.rendition.resize(s.classes.size());
  std::vector<int> owner(static_cast<std::size_t>(s.height) * s.width, -1);
  auto claim = [&](const std::set<Bin>& bins, int c, const char* what) {
    for (const Bin& b : bins) {
      int& o = owner[b.first * s.width + b.second];
      if (o >= 0 && o != c) {
        throw ConfigError(std::string(what) + " of classes '" + s.classes[o].name + "' and '" +
                          s.classes[c].name + "' overlap");
      }
      o = c;
    }
  };
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const auto& cls = s.classes[c];
    if (cls.band.kind == BandSpec::Kind::kBar) {
      out.bands[c] = bar_bins(s, cls, 0);
      out.rendition[c] = bar_bins(s, cls, s.rendition_shift);
    } else if (cls.band.kind == BandSpec::Kind::kBins) {
      out.bands[c] = explicit_bins(s, cls);
      out.rendition[c] = out.bands[c];
    }
    if (cls.band.kind != BandSpec::Kind::kScatter) claim(out.bands[c], static_cast<int>(c), "bands");
  }
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    if (s.classes[c].band.kind == BandSpec::Kind::kBar) {
      for (const Bin& b : out.rendition[c]) {
        const int o = owner[b.first * s.width + b.second];
        if (o >= 0) {
          throw ConfigError("rendition bins of class '" + s.classes[c].name +
                            "' overlap the band of class '" + s.classes[o].name + "'");
        }
      }
    }
  }
  // reserve rendition bins so scattered bands stay clear of them
  std::vector<bool> reserved(owner.size(), false);
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    for (const Bin& b : out.rendition[c]) reserved[b.first * s.width + b.second] = true;
  }
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    const auto& cls = s.classes[c];
    if (cls.band.kind != BandSpec::Kind::kScatter) continue;
    std::vector<Bin> free;
    for (int u = 0; u < s.height; ++u) {
      for (int v = 0; v < s.width; ++v) {
        const Bin b{u, v};
        const Bin m = mirror(s, b);
        if (!(b < m)) continue;
        const int r = std::max(std::abs(u - s.height / 2), std::abs(v - s.width / 2));
        const std::size_t i = u * s.width + v;
        const std::size_t j = m.first * s.width + m.second;
        if (r < cls.band.min_radius || owner[i] >= 0 || owner[j] >= 0 || reserved[i] || reserved[j]) {
          continue;
        }
        free.push_back(b);
      }
    }
    if (cls.band.pairs < 1 || static_cast<std::size_t>(cls.band.pairs) > free.size()) {
      throw ConfigError("class '" + cls.name + "': cannot place " + std::to_string(cls.band.pairs) +
                        " scattered pairs on " + std::to_string(free.size()) + " free bins");
    }
    auto rng = RandomStream::derived(s.seed, {kScatterTag, c});
    rng.shuffle(free);
    for (int k = 0; k < cls.band.pairs; ++k) {
      out.bands[c].insert(free[k]);
      out.bands[c].insert(mirror(s, free[k]));
    }
    out.rendition[c] = out.bands[c];
    claim(out.bands[c], static_cast<int>(c), "bands");
  }
  const std::size_t limit = owner.size() / 10;
  for (std::size_t c = 0; c < s.classes.size(); ++c) {
    if (out.bands[c].size() > limit) {
      throw ConfigError("class '" + s.classes[c].name + "': band has " +
                        std::to_string(out.bands[c].size()) + " bins, more than 10% of the spectrum");
    }
  }
  return out;
}

std::vector<FrequencyMask> to_masks(const PlantedSpec& s, const std::vector<std::set<Bin>>& bands) {
  std::vector<FrequencyMask> out;
  for (const auto& band : bands) {
    FrequencyMask m(s.height, s.width);
    for (const Bin& b : band) m.set(b.first, b.second);
    out.push_back(std::move(m));
  }
  return out;
}

ImageTensor synthesize(const PlantedSpec& s, const std::set<Bin>& band, double sigma,
                       RandomStream& rng, int label) {
  const ImageShape shape{s.channels, s.height, s.width};
  std::vector<double> values(shape.size());
  const std::size_t plane = shape.plane_size();
  for (int ch = 0; ch < s.channels; ++ch) {
    ChannelSpectrum spectrum(s.height, s.width);
    for (const Bin& b : band) {
      const Bin m = mirror(s, b);
      if (m < b) continue;
      const double amp = rng.uniform(s.amplitude_min, s.amplitude_max);
      const double phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
      if (m == b) {
        spectrum.at(b.first, b.second) = amp * std::cos(phase);
      } else {
        const auto z = std::polar(amp, phase);
        spectrum.at(b.first, b.second) = z;
        spectrum.at(m.first, m.second) = std::conj(z);
      }
    }
    const auto spatial = inverse_channel_complex(spectrum);
    for (std::size_t i = 0; i < plane; ++i) values[ch * plane + i] = spatial[i].real();
  }
  double peak = 0.0;
  for (double v : values) peak = std::max(peak, std::abs(v));
  for (double& v : values) v = (peak > 0.0 ? v / peak : 0.0) + rng.normal(0.0, sigma);
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double low = *lo;
  const double range = *hi - *lo;
  for (double& v : values) v = range > 0.0 ? (v - low) / range : 0.0;
  return ImageTensor(shape, std::move(values), label);
}

LabeledDataset synthesize_split(const PlantedSpec& s, const std::vector<std::set<Bin>>& bands,
                                double sigma, std::uint64_t tag, int per_class, const char* split,
                                int workers) {
  if (per_class < 0) throw ConfigError("per-class image count must be non-negative");
  LabeledDataset ds;
  for (const auto& c : s.classes) ds.class_names.push_back(c.name);
  ds.split = split;
  ds.source = "planted:" + s.hash();
  const std::size_t k = s.classes.size();
  const std::size_t n = static_cast<std::size_t>(per_class);
  std::vector<std::optional<ImageTensor>> images(k * n);
  parallel_for(images.size(), workers, [&](std::size_t task) {
    const std::size_t c = task / n;
    const std::size_t i = task % n;
    auto rng = RandomStream::derived(s.seed, {tag, c, i});
    images[task] = synthesize(s, bands[c], sigma, rng, static_cast<int>(c));
  });
  for (auto& image : images) ds.images.push_back(std::move(*image));
  ds.checksum = content_checksum(ds);
  return ds;
}

json band_json(const BandSpec& b) {
  json j = {{"kind", kind_name(b.kind)}};
  switch (b.kind) {
    case BandSpec::Kind::kBar:
      j["direction"] = {b.direction.first, b.direction.second};
      j["offsets"] = b.offsets;
      break;
    case BandSpec::Kind::kScatter:
      j["pairs"] = b.pairs;
      j["min_radius"] = b.min_radius;
      break;
    case BandSpec::Kind::kBins: {
      json bins = json::array();
      for (const auto& [u, v] : b.bins) bins.push_back({u, v});
      j["bins"] = bins;
      break;
    }
  }
  return j;
}

BandSpec band_from(const json& j) {
  BandSpec b;
  const std::string kind = j.value("kind", "bar");
  if (kind == "bar") {
    b.kind = BandSpec::Kind::kBar;
    if (j.contains("direction")) {
      const auto d = j.at("direction").get<std::vector<int>>();
      if (d.size() != 2) throw ConfigError("bar direction needs two components");
      b.direction = {d[0], d[1]};
    }
    if (j.contains("offsets")) b.offsets = j.at("offsets").get<std::vector<int>>();
  } else if (kind == "scatter") {
    b.kind = BandSpec::Kind::kScatter;
    b.pairs = j.value("pairs", b.pairs);
    b.min_radius = j.value("min_radius", b.min_radius);
  } else if (kind == "bins") {
    b.kind = BandSpec::Kind::kBins;
    for (const auto& bin : j.at("bins")) {
      const auto uv = bin.get<std::vector<int>>();
      if (uv.size() != 2) throw ConfigError("band bins are [row, column] pairs");
      b.bins.emplace_back(uv[0], uv[1]);
    }
  } else {
    throw ConfigError("unknown band kind '" + kind + "' (bar, scatter, bins)");
  }
  return b;
}

}  // namespace

std::string PlantedSpec::hash() const { return hex64(fnv1a64(format_planted_spec(*this))); }

PlantedSpec default_planted_spec() {
  PlantedSpec s;
  const std::pair<int, int> dirs[] = {{0, 1}, {1, 0}, {1, 1}, {1, -1}};
  const char* names[] = {"bar_h", "bar_v", "bar_d", "bar_a"};
  for (int c = 0; c < 4; ++c) {
    PlantedClass cls;
    cls.name = names[c];
    cls.band.kind = BandSpec::Kind::kBar;
    cls.band.direction = dirs[c];
    cls.band.offsets = {1, 2};
    cls.required_fraction = 0.2;
    s.classes.push_back(cls);
  }
  return s;
}

PlantedSpec mixed_planted_spec(int broad) {
  PlantedSpec s = default_planted_spec();
  for (int b = 0; b < broad; ++b) {
    PlantedClass cls;
    cls.name = "broad_" + std::to_string(b);
    cls.band.kind = BandSpec::Kind::kScatter;
    cls.band.pairs = 40;
    cls.band.min_radius = 3;
    cls.required_fraction = 0.8;
    s.classes.push_back(cls);
  }
  return s;
}

PlantedSpec parse_planted_spec(std::string_view text) {
  PlantedSpec s;
  try {
    const json j = json::parse(text);
    if (!j.is_object()) throw ConfigError("planted spec must be a JSON object");
    static const std::set<std::string> known = {
        "classes", "channels", "height", "width", "sigma", "amplitude", "train_per_class",
        "test_per_class", "seed", "gain", "texture_sigma", "rendition_shift"};
    for (const auto& [key, value] : j.items()) {
      if (!known.count(key)) throw ConfigError("unknown planted spec key '" + key + "'");
    }
    s.channels = j.value("channels", s.channels);
    s.height = j.value("height", s.height);
    s.width = j.value("width", s.width);
    s.sigma = j.value("sigma", s.sigma);
    if (j.contains("amplitude")) {
      const auto a = j.at("amplitude").get<std::vector<double>>();
      if (a.size() != 2 || !(a[0] > 0.0) || a[1] < a[0]) {
        throw ConfigError("amplitude must be [min, max] with 0 < min <= max");
      }
      s.amplitude_min = a[0];
      s.amplitude_max = a[1];
    }
    s.train_per_class = j.value("train_per_class", s.train_per_class);
    s.test_per_class = j.value("test_per_class", s.test_per_class);
    s.seed = j.value("seed", s.seed);
    s.gain = j.value("gain", s.gain);
    s.texture_sigma = j.value("texture_sigma", 2.0 * s.sigma);
    s.rendition_shift = j.value("rendition_shift", s.rendition_shift);
    for (const auto& c : j.at("classes")) {
      PlantedClass cls;
      cls.name = c.at("name").get<std::string>();
      cls.band = band_from(c.at("band"));
      cls.required_fraction = c.value("required_fraction", cls.required_fraction);
      s.classes.push_back(std::move(cls));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed planted spec: ") + e.what());
  }
  if (s.sigma < 0.0 || s.texture_sigma < 0.0) throw ConfigError("noise levels must be >= 0");
  std::set<std::string> names;
  for (const auto& c : s.classes) {
    if (c.name.empty() || c.name.find('/') != std::string::npos || !names.insert(c.name).second) {
      throw ConfigError("class names must be unique, non-empty and free of '/'");
    }
  }
  planted_bands(s);
  return s;
}

std::string format_planted_spec(const PlantedSpec& s) {
  json classes = json::array();
  for (const auto& c : s.classes) {
    classes.push_back(
        {{"name", c.name}, {"band", band_json(c.band)}, {"required_fraction", c.required_fraction}});
  }
  json j = {{"classes", classes},
            {"channels", s.channels},
            {"height", s.height},
            {"width", s.width},
            {"sigma", s.sigma},
            {"amplitude", {s.amplitude_min, s.amplitude_max}},
            {"train_per_class", s.train_per_class},
            {"test_per_class", s.test_per_class},
            {"seed", s.seed},
            {"gain", s.gain},
            {"texture_sigma", s.texture_sigma},
            {"rendition_shift", s.rendition_shift}};
  return j.dump(2) + "\n";
}

std::vector<FrequencyMask> planted_bands(const PlantedSpec& spec) {
  return to_masks(spec, layout(spec).bands);
}

std::vector<FrequencyMask> rendition_bands(const PlantedSpec& spec) {
  return to_masks(spec, layout(spec).rendition);
}

PlantedData generate_planted(const PlantedSpec& spec, int workers) {
  const BandLayout bands = layout(spec);
  PlantedData data;
  data.train = synthesize_split(spec, bands.bands, spec.sigma, kTrainTag, spec.train_per_class,
                                "train", workers);
  data.test = synthesize_split(spec, bands.bands, spec.sigma, kTestTag, spec.test_per_class,
                               "test", workers);
  data.truth = to_masks(spec, bands.bands);
  return data;
}

LabeledDataset generate_planted_ood(const PlantedSpec& spec, OodStyle style, int per_class,
                                    int workers) {
  const BandLayout bands = layout(spec);
  if (style == OodStyle::kTexture) {
    return synthesize_split(spec, bands.bands, spec.texture_sigma, kTextureTag, per_class, "ood",
                            workers);
  }
  return synthesize_split(spec, bands.rendition, spec.sigma, kRenditionTag, per_class, "ood",
                          workers);
}

SpectralLinearClassifier planted_oracle(const PlantedSpec& spec, const LabeledDataset& train) {
  const auto truth = planted_bands(spec);
  std::vector<double> fractions;
  for (const auto& c : spec.classes) fractions.push_back(c.required_fraction);
  return SpectralLinearClassifier::evidence_detector(truth, train.images, fractions, spec.gain);
}

double recovery_score(const FrequencyMask& dfm, const FrequencyMask& truth) {
  if (!dfm.same_dimensions(truth)) throw ConfigError("recovery score needs matching mask sizes");
  const std::size_t total = truth.count();
  if (total == 0) throw ConfigError("recovery score needs a non-empty truth mask");
  return static_cast<double>(mask_intersection(dfm, truth).count()) / static_cast<double>(total);
}

}  // namespace hfss
