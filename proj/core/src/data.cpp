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

#include "hfss/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <optional>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/worker_pool.hpp"

namespace hfss {
namespace fs = std::filesystem;
namespace {

// planes[c][y * w + x]
using Planes = std::vector<std::vector<double>>;

Planes to_planes(const RawImage& raw, ChannelPolicy policy) {
  const std::size_t n = static_cast<std::size_t>(raw.width) * raw.height;
  const bool color = raw.channels >= 3;
  auto gray = [&](std::size_t i) {
    if (!color) return raw.values[i * raw.channels];
    const double* p = raw.values.data() + i * raw.channels;
    return 0.299 * p[0] + 0.587 * p[1] + 0.114 * p[2];
  };
  Planes planes;
  const int out = policy == ChannelPolicy::kLuminance       ? 1
                  : policy == ChannelPolicy::kReplicateTo3 ? 3
                  : color                                   ? 3
                                                            : 1;
  planes.assign(out, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    if (out == 1) {
      planes[0][i] = gray(i);
    } else {
      for (int c = 0; c < 3; ++c) {
        planes[c][i] = color ? raw.values[i * raw.channels + c] : raw.values[i * raw.channels];
      }
    }
  }
  return planes;
}

std::vector<double> bilinear(const std::vector<double>& src, int h, int w, int nh, int nw) {
  if (h == nh && w == nw) return src;
  std::vector<double> dst(static_cast<std::size_t>(nh) * nw);
  const double sy = static_cast<double>(h) / nh;
  const double sx = static_cast<double>(w) / nw;
  for (int y = 0; y < nh; ++y) {
    const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, static_cast<double>(h - 1));
    const int y0 = static_cast<int>(fy);
    const int y1 = std::min(y0 + 1, h - 1);
    const double ay = fy - y0;
    for (int x = 0; x < nw; ++x) {
      const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, static_cast<double>(w - 1));
      const int x0 = static_cast<int>(fx);
      const int x1 = std::min(x0 + 1, w - 1);
      const double ax = fx - x0;
      const double top = src[y0 * w + x0] * (1 - ax) + src[y0 * w + x1] * ax;
      const double bot = src[y1 * w + x0] * (1 - ax) + src[y1 * w + x1] * ax;
      dst[static_cast<std::size_t>(y) * nw + x] = top * (1 - ay) + bot * ay;
    }
  }
  return dst;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (const auto& n : names) out += (out.empty() ? "" : ", ") + n;
  return out;
}

}  // namespace

ImageShape LabeledDataset::shape() const {
  if (images.empty()) throw DataError("dataset is empty");
  return images.front().shape();
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(class_names.size(), 0);
  for (const auto& image : images) ++counts.at(static_cast<std::size_t>(*image.label()));
  return counts;
}

std::vector<int> LabeledDataset::labels() const {
  std::vector<int> out;
  out.reserve(images.size());
  for (const auto& image : images) out.push_back(*image.label());
  return out;
}

void LabeledDataset::validate() const {
  if (images.empty()) return;
  const ImageShape first = images.front().shape();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const std::string where = i < files.size() ? files[i] : "image " + std::to_string(i);
    if (images[i].shape() != first) {
      throw DataError(where + " is " + images[i].shape().to_string() + ", expected " +
                      first.to_string());
    }
    const auto label = images[i].label();
    if (!label || *label < 0 || *label >= class_count()) {
      throw DataError(where + " has no valid label");
    }
  }
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.class_names = class_names;
  out.split = split;
  out.source = source;
  for (std::size_t i : indices) {
    out.images.push_back(images.at(i));
    if (!files.empty()) out.files.push_back(files.at(i));
  }
  out.checksum = content_checksum(out);
  return out;
}

ChannelPolicy parse_channel_policy(std::string_view text) {
  if (text == "keep") return ChannelPolicy::kKeep;
  if (text == "replicate-to-3") return ChannelPolicy::kReplicateTo3;
  if (text == "luminance") return ChannelPolicy::kLuminance;
  throw ConfigError("unknown channel policy '" + std::string(text) +
                    "' (keep, replicate-to-3, luminance)");
}

ImageTensor fit_image(const RawImage& raw, int height, int width, ChannelPolicy channels,
                      ResizePolicy resize) {
  if (raw.width <= 0 || raw.height <= 0) throw DataError("image has no pixels");
  Planes planes = to_planes(raw, channels);
  int h = raw.height;
  int w = raw.width;
  const bool crop_only = resize == ResizePolicy::kCenterCrop && h >= height && w >= width;
  if (!crop_only) {
    const double scale = std::max(static_cast<double>(height) / h, static_cast<double>(width) / w);
    const int nh = std::max(height, static_cast<int>(std::lround(h * scale)));
    const int nw = std::max(width, static_cast<int>(std::lround(w * scale)));
    for (auto& p : planes) p = bilinear(p, h, w, nh, nw);
    h = nh;
    w = nw;
  }
  const int top = (h - height) / 2;
  const int left = (w - width) / 2;
  const ImageShape shape{static_cast<int>(planes.size()), height, width};
  std::vector<double> values(shape.size());
  for (std::size_t c = 0; c < planes.size(); ++c) {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        values[(c * height + y) * width + x] = planes[c][(y + top) * w + x + left];
      }
    }
  }
  return ImageTensor(shape, std::move(values));
}

LabeledDataset load_folder_dataset(const fs::path& root, const LoadOptions& options) {
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  std::vector<fs::path> class_dirs;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory() && entry.path().filename().string().front() != '.') {
      class_dirs.push_back(entry.path());
    }
  }
  std::sort(class_dirs.begin(), class_dirs.end());

  LabeledDataset dataset;
  dataset.source = root.string();
  std::vector<std::pair<fs::path, int>> files;
  for (const auto& dir : class_dirs) {
    std::vector<fs::path> images;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_regular_file() && is_image_file(entry.path())) images.push_back(entry.path());
    }
    const std::string name = dir.filename().string();
    if (images.empty()) {
      dataset.warnings.push_back("class directory '" + name + "' has no images; skipped");
      continue;
    }
    std::sort(images.begin(), images.end());
    const int label = dataset.class_count();
    dataset.class_names.push_back(name);
    for (auto& p : images) files.emplace_back(std::move(p), label);
  }
  if (files.empty()) throw DataError(root.string() + " contains no class directories with images");

  std::vector<std::optional<ImageTensor>> decoded(files.size());
  std::vector<std::uint64_t> hashes(files.size());
  std::vector<std::string> errors(files.size());
  parallel_for(files.size(), options.workers, [&](std::size_t i) {
    try {
      const std::string bytes = read_file(files[i].first);
      hashes[i] = fnv1a64(bytes);
      auto raw = decode_image_bytes(bytes, files[i].first.string());
      decoded[i] = fit_image(raw, options.height, options.width, options.channels, options.resize);
      decoded[i]->set_label(files[i].second);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < files.size(); ++i) {
    if (!errors[i].empty()) throw DataError(errors[i]);
  }

  std::uint64_t checksum = fnv1a64(join_names(dataset.class_names));
  for (std::size_t i = 0; i < files.size(); ++i) {
    const std::string rel = fs::relative(files[i].first, root).generic_string();
    dataset.files.push_back(rel);
    dataset.images.push_back(std::move(*decoded[i]));
    checksum = fnv1a64(rel, checksum);
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hashes[i]));
    checksum = fnv1a64(buf, checksum);
  }
  dataset.checksum = checksum;
  dataset.validate();
  return dataset;
}

void save_image_tree(const LabeledDataset& dataset, const fs::path& dir) {
  std::vector<std::size_t> next(dataset.class_names.size(), 0);
  for (const auto& name : dataset.class_names) fs::create_directories(dir / name);
  for (const auto& image : dataset.images) {
    const int c = *image.label();
    char file[32];
    std::snprintf(file, sizeof file, "%05zu.png", next[c]++);
    write_png16(dir / dataset.class_names[c] / file, image);
  }
}

std::uint64_t content_checksum(const LabeledDataset& dataset) {
  std::uint64_t h = fnv1a64(join_names(dataset.class_names));
  for (const auto& image : dataset.images) {
    const auto values = image.values();
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(values.data()),
                                 values.size() * sizeof(double)),
                h);
    const int label = *image.label();
    h = fnv1a64(std::string_view(reinterpret_cast<const char*>(&label), sizeof label), h);
  }
  return h;
}

std::string dataset_manifest(const LabeledDataset& dataset) {
  nlohmann::json classes = nlohmann::json::array();
  const auto counts = dataset.class_counts();
  for (std::size_t c = 0; c < dataset.class_names.size(); ++c) {
    classes.push_back({{"name", dataset.class_names[c]}, {"count", counts[c]}});
  }
  nlohmann::json manifest = {{"split", dataset.split},
                             {"source", dataset.source},
                             {"classes", classes},
                             {"images", dataset.size()},
                             {"checksum", hex64(dataset.checksum)}};
  if (!dataset.images.empty()) {
    const ImageShape s = dataset.shape();
    manifest["shape"] = {{"channels", s.channels}, {"height", s.height}, {"width", s.width}};
  }
  return manifest.dump(2) + "\n";
}

void write_manifest(const LabeledDataset& dataset, const fs::path& path) {
  write_file(path, dataset_manifest(dataset));
}

}  // namespace hfss
