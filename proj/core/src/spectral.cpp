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

#include "hfss/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <string>
#include <tuple>

#include "hfss/error.hpp"

namespace hfss {
namespace {

// FFTW planning is not thread-safe; execution with new-array execute is.
// Plans are created once per (height, width, sign) and kept for the
// process lifetime.
class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  fftw_plan get(int height, int width, int sign) {
    std::lock_guard lock(mu_);
    auto key = std::make_tuple(height, width, sign);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<std::complex<double>> in(static_cast<std::size_t>(height) * width);
    std::vector<std::complex<double>> out(in.size());
    fftw_plan plan = fftw_plan_dft_2d(height, width, reinterpret_cast<fftw_complex*>(in.data()),
                                      reinterpret_cast<fftw_complex*>(out.data()), sign,
                                      FFTW_ESTIMATE | FFTW_UNALIGNED);
    if (plan == nullptr) throw ConfigError("FFTW could not plan a transform");
    plans_.emplace(key, plan);
    return plan;
  }

  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

void execute(int height, int width, int sign, std::vector<std::complex<double>>& in,
             std::vector<std::complex<double>>& out) {
  fftw_plan plan = PlanCache::instance().get(height, width, sign);
  fftw_execute_dft(plan, reinterpret_cast<fftw_complex*>(in.data()),
                   reinterpret_cast<fftw_complex*>(out.data()));
}

ChannelSpectrum forward_channel(std::span<const double> plane, int height, int width) {
  std::vector<std::complex<double>> in(plane.begin(), plane.end());
  std::vector<std::complex<double>> out(in.size());
  execute(height, width, FFTW_FORWARD, in, out);
  ChannelSpectrum spectrum(height, width);
  const int hh = height / 2;
  const int hw = width / 2;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      spectrum.at((y + hh) % height, (x + hw) % width) = out[static_cast<std::size_t>(y) * width + x];
    }
  }
  return spectrum;
}

void require_mask_matches(const FrequencyMask& mask, int height, int width) {
  if (mask.height() != height || mask.width() != width) {
    throw ConfigError("mask " + std::to_string(mask.height()) + "x" + std::to_string(mask.width()) +
                      " does not match spectrum " + std::to_string(height) + "x" +
                      std::to_string(width));
  }
}

}  // namespace

ChannelSpectrum::ChannelSpectrum(int height, int width)
    : height_(height), width_(width), bins_(static_cast<std::size_t>(height) * width) {}

FrequencyMask::FrequencyMask(int height, int width, bool fill)
    : height_(height), width_(width), bits_(static_cast<std::size_t>(height) * width, fill ? 1 : 0) {
  if (height <= 0 || width <= 0) throw ConfigError("mask dimensions must be positive");
}

void FrequencyMask::set_rect(int top, int left, int size_h, int size_w) {
  for (int u = top; u < top + size_h; ++u) {
    std::fill_n(bits_.begin() + static_cast<std::ptrdiff_t>(index(u, left)), size_w, 1);
  }
}

std::size_t FrequencyMask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), 1));
}

double FrequencyMask::coverage() const {
  if (bits_.empty()) return 0.0;
  return static_cast<double>(count()) / static_cast<double>(bits_.size());
}

bool FrequencyMask::is_subset_of(const FrequencyMask& other) const {
  if (!same_dimensions(other)) return false;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i] && !other.bits_[i]) return false;
  }
  return true;
}

std::vector<ChannelSpectrum> forward_spectrum(const ImageTensor& image) {
  validate_shape(image.shape());
  image.require_finite();
  std::vector<ChannelSpectrum> spectra;
  spectra.reserve(image.channels());
  for (int c = 0; c < image.channels(); ++c) {
    spectra.push_back(forward_channel(image.channel(c), image.height(), image.width()));
  }
  return spectra;
}

std::vector<std::complex<double>> inverse_channel_complex(const ChannelSpectrum& spectrum) {
  const int height = spectrum.height();
  const int width = spectrum.width();
  const int hh = height / 2;
  const int hw = width / 2;
  std::vector<std::complex<double>> in(static_cast<std::size_t>(height) * width);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      in[static_cast<std::size_t>(y) * width + x] = spectrum.at((y + hh) % height, (x + hw) % width);
    }
  }
  std::vector<std::complex<double>> out(in.size());
  execute(height, width, FFTW_BACKWARD, in, out);
  const double scale = 1.0 / static_cast<double>(out.size());
  for (auto& v : out) v *= scale;
  return out;
}

ImageTensor inverse_spectrum(std::span<const ChannelSpectrum> spectra, std::optional<int> label) {
  if (spectra.empty()) throw ConfigError("inverse_spectrum needs at least one channel");
  ImageShape shape{static_cast<int>(spectra.size()), spectra[0].height(), spectra[0].width()};
  ImageTensor image = ImageTensor::zeros(shape, label);
  for (int c = 0; c < shape.channels; ++c) {
    if (spectra[c].height() != shape.height || spectra[c].width() != shape.width) {
      throw ConfigError("channel spectra differ in size");
    }
    auto complex_plane = inverse_channel_complex(spectra[c]);
    auto plane = image.channel(c);
    std::transform(complex_plane.begin(), complex_plane.end(), plane.begin(),
                   [](const std::complex<double>& z) { return z.real(); });
  }
  return image;
}

void apply_mask(ChannelSpectrum& spectrum, const FrequencyMask& mask) {
  require_mask_matches(mask, spectrum.height(), spectrum.width());
  auto bins = spectrum.bins();
  auto bits = mask.bits();
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!bits[i]) bins[i] = 0.0;
  }
}

ImageTensor filter_spectra(std::span<const ChannelSpectrum> spectra, const FrequencyMask& mask,
                           std::optional<int> label) {
  std::vector<ChannelSpectrum> masked(spectra.begin(), spectra.end());
  for (auto& s : masked) apply_mask(s, mask);
  return inverse_spectrum(masked, label);
}

ImageTensor filter_image(const ImageTensor& image, const FrequencyMask& mask) {
  require_mask_matches(mask, image.height(), image.width());
  return filter_spectra(forward_spectrum(image), mask, image.label());
}

double retained_energy(std::span<const ChannelSpectrum> spectra, const FrequencyMask& mask) {
  double energy = 0.0;
  for (const auto& s : spectra) {
    require_mask_matches(mask, s.height(), s.width());
    auto bins = s.bins();
    auto bits = mask.bits();
    for (std::size_t i = 0; i < bins.size(); ++i) {
      if (bits[i]) energy += std::norm(bins[i]);
    }
  }
  return energy;
}

FrequencyMask mask_union(std::span<const FrequencyMask> masks) {
  if (masks.empty()) throw ConfigError("mask_union of an empty list");
  FrequencyMask out = FrequencyMask::zeros(masks[0].height(), masks[0].width());
  for (const auto& m : masks) {
    if (!m.same_dimensions(out)) throw ConfigError("mask_union: masks differ in dimensions");
    auto bits = m.bits();
    for (int u = 0; u < out.height(); ++u) {
      for (int v = 0; v < out.width(); ++v) {
        if (bits[static_cast<std::size_t>(u) * out.width() + v]) out.set(u, v);
      }
    }
  }
  return out;
}

FrequencyMask mask_intersection(const FrequencyMask& a, const FrequencyMask& b) {
  if (!a.same_dimensions(b)) throw ConfigError("mask_intersection: masks differ in dimensions");
  FrequencyMask out = FrequencyMask::zeros(a.height(), a.width());
  for (int u = 0; u < a.height(); ++u) {
    for (int v = 0; v < a.width(); ++v) {
      if (a.test(u, v) && b.test(u, v)) out.set(u, v);
    }
  }
  return out;
}

}  // namespace hfss
