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

#ifndef HFSS_IMAGE_HPP_
#define HFSS_IMAGE_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hfss {

struct ImageShape {
  int channels = 1;
  int height = 0;
  int width = 0;

  std::size_t plane_size() const {
    return static_cast<std::size_t>(height) * static_cast<std::size_t>(width);
  }
  std::size_t size() const { return plane_size() * static_cast<std::size_t>(channels); }
  std::string to_string() const;

  friend bool operator==(const ImageShape&, const ImageShape&) = default;
};

// Throws ConfigError unless channels is 1 or 3 and height/width are even
// and at least 8.
void validate_shape(const ImageShape& shape);

// One image, channel-major (channels x height x width), nominal range [0,1].
class ImageTensor {
 public:
  ImageTensor() = default;
  ImageTensor(ImageShape shape, std::vector<double> values,
              std::optional<int> label = std::nullopt);

  static ImageTensor zeros(ImageShape shape, std::optional<int> label = std::nullopt);

  const ImageShape& shape() const { return shape_; }
  int channels() const { return shape_.channels; }
  int height() const { return shape_.height; }
  int width() const { return shape_.width; }

  std::optional<int> label() const { return label_; }
  void set_label(std::optional<int> label) { label_ = label; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::span<const double> channel(int c) const;
  std::span<double> channel(int c);

  double at(int c, int y, int x) const { return values_[index(c, y, x)]; }
  double& at(int c, int y, int x) { return values_[index(c, y, x)]; }

  // Throws DataError if any value is NaN or infinite.
  void require_finite() const;

 private:
  std::size_t index(int c, int y, int x) const {
    return (static_cast<std::size_t>(c) * shape_.height + y) * shape_.width + x;
  }

  ImageShape shape_;
  std::vector<double> values_;
  std::optional<int> label_;
};

}  // namespace hfss

#endif  // HFSS_IMAGE_HPP_
