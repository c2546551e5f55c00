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

#ifndef HFSS_DATA_HPP_
#define HFSS_DATA_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hfss/image.hpp"
#include "hfss/image_io.hpp"

namespace hfss {

class LabeledDataset {
 public:
  std::vector<std::string> class_names;
  std::vector<ImageTensor> images;  // every image labeled
  std::vector<std::string> files;  // relative paths, empty for generated sets
  std::string split;  // train / test / ood
  std::string source;
  std::uint64_t checksum = 0;
  std::vector<std::string> warnings;

  int class_count() const { return static_cast<int>(class_names.size()); }
  std::size_t size() const { return images.size(); }
  ImageShape shape() const;
  std::vector<std::size_t> class_counts() const;
  std::vector<int> labels() const;
  // Shape and label checks; throws DataError.
  void validate() const;
  LabeledDataset subset(std::span<const std::size_t> indices) const;
};

enum class ChannelPolicy {
  kKeep,  // native gray or RGB, every file must agree
  kReplicateTo3,  // gray replicated, alpha dropped
  kLuminance,  // single channel, ITU-R BT.601 weights
};

enum class ResizePolicy {
  kResizeCrop,  // scale the shorter side to fit, then center crop
  kCenterCrop,  // crop only; smaller images are scaled up first
};

struct LoadOptions {
  int height = 32;
  int width = 32;
  ChannelPolicy channels = ChannelPolicy::kKeep;
  ResizePolicy resize = ResizePolicy::kResizeCrop;
  int workers = 1;
};

ChannelPolicy parse_channel_policy(std::string_view text);

// One subdirectory per class, classes in lexicographic order, files
// within a class in lexicographic order. Empty class directories are
// skipped with a warning; a file that fails to decode raises DataError
// naming it.
LabeledDataset load_folder_dataset(const std::filesystem::path& root, const LoadOptions& options);

// Bilinear resample (half-pixel centers) then center crop to height x width.
ImageTensor fit_image(const RawImage& raw, int height, int width, ChannelPolicy channels,
                      ResizePolicy resize);

// dir/<class>/<NNNNN>.png as 16-bit PNG (values clipped to [0,1]).
void save_image_tree(const LabeledDataset& dataset, const std::filesystem::path& dir);

// JSON manifest: class list, per-class counts, image shape, checksum.
std::string dataset_manifest(const LabeledDataset& dataset);
void write_manifest(const LabeledDataset& dataset, const std::filesystem::path& path);

// FNV-1a over the float64 pixel values and labels.
std::uint64_t content_checksum(const LabeledDataset& dataset);

}  // namespace hfss

#endif  // HFSS_DATA_HPP_
