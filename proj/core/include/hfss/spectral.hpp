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

#ifndef HFSS_SPECTRAL_HPP_
#define HFSS_SPECTRAL_HPP_

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hfss/image.hpp"

namespace hfss {

// 2D DFT of one channel, center-shifted: the zero-frequency bin sits at
// (height/2, width/2).
class ChannelSpectrum {
 public:
  ChannelSpectrum() = default;
  ChannelSpectrum(int height, int width);

  int height() const { return height_; }
  int width() const { return width_; }

  std::complex<double> at(int u, int v) const { return bins_[index(u, v)]; }
  std::complex<double>& at(int u, int v) { return bins_[index(u, v)]; }
  std::span<const std::complex<double>> bins() const { return bins_; }
  std::span<std::complex<double>> bins() { return bins_; }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(u) * width_ + v;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::complex<double>> bins_;
};

struct MaskProvenance {
  int stage = 0;
  std::optional<std::int64_t> parent_id;

  friend bool operator==(const MaskProvenance&, const MaskProvenance&) = default;
};

// Binary map over the center-shifted spectrum. Equality compares geometry
// and bits only; provenance is informational.
class FrequencyMask {
 public:
  FrequencyMask() = default;
  FrequencyMask(int height, int width, bool fill = false);

  static FrequencyMask ones(int height, int width) { return {height, width, true}; }
  static FrequencyMask zeros(int height, int width) { return {height, width, false}; }

  int height() const { return height_; }
  int width() const { return width_; }
  std::size_t size() const { return bits_.size(); }

  bool test(int u, int v) const { return bits_[index(u, v)] != 0; }
  void set(int u, int v, bool on = true) { bits_[index(u, v)] = on ? 1 : 0; }
  // Sets a size_h x size_w rectangle with top-left corner (top, left).
  void set_rect(int top, int left, int size_h, int size_w);

  std::span<const std::uint8_t> bits() const { return bits_; }

  std::size_t count() const;
  double coverage() const;
  bool is_subset_of(const FrequencyMask& other) const;
  bool same_dimensions(const FrequencyMask& other) const {
    return height_ == other.height_ && width_ == other.width_;
  }

  const std::optional<MaskProvenance>& provenance() const { return provenance_; }
  void set_provenance(std::optional<MaskProvenance> p) { provenance_ = p; }

  friend bool operator==(const FrequencyMask& a, const FrequencyMask& b) {
    return a.height_ == b.height_ && a.width_ == b.width_ && a.bits_ == b.bits_;
  }

 private:
  std::size_t index(int u, int v) const {
    return static_cast<std::size_t>(u) * width_ + v;
  }

  int height_ = 0;
  int width_ = 0;
  std::vector<std::uint8_t> bits_;
  std::optional<MaskProvenance> provenance_;
};

// One center-shifted spectrum per channel. Rejects non-finite input with
// DataError.
std::vector<ChannelSpectrum> forward_spectrum(const ImageTensor& image);

// Inverse of forward_spectrum; the real part of each channel is kept.
ImageTensor inverse_spectrum(std::span<const ChannelSpectrum> spectra,
                             std::optional<int> label = std::nullopt);

// Complex inverse of a single channel, row-major spatial layout.
std::vector<std::complex<double>> inverse_channel_complex(const ChannelSpectrum& spectrum);

// Zeroes every bin outside `mask`, inverts and keeps the real part. The
// same mask applies to all channels; the result is neither clipped nor
// renormalized.
ImageTensor filter_image(const ImageTensor& image, const FrequencyMask& mask);

// As filter_image, starting from precomputed spectra.
ImageTensor filter_spectra(std::span<const ChannelSpectrum> spectra,
                           const FrequencyMask& mask,
                           std::optional<int> label = std::nullopt);

// Zeroes every bin outside `mask` in place.
void apply_mask(ChannelSpectrum& spectrum, const FrequencyMask& mask);

// Sum over channels of |F|^2 on the bins kept by `mask`.
double retained_energy(std::span<const ChannelSpectrum> spectra, const FrequencyMask& mask);

// Bitwise OR. Throws ConfigError on an empty list or mismatched shapes.
FrequencyMask mask_union(std::span<const FrequencyMask> masks);
FrequencyMask mask_intersection(const FrequencyMask& a, const FrequencyMask& b);

}  // namespace hfss

#endif  // HFSS_SPECTRAL_HPP_
