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

#include "hfss/image.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "hfss/error.hpp"

namespace hfss {

std::string ImageShape::to_string() const {
  return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
}

void validate_shape(const ImageShape& shape) {
  if (shape.channels != 1 && shape.channels != 3) {
    throw ConfigError("image must have 1 or 3 channels, got " + std::to_string(shape.channels));
  }
  if (shape.height < 8 || shape.width < 8 || shape.height % 2 != 0 || shape.width % 2 != 0) {
    throw ConfigError("image height and width must be even and >= 8, got " + shape.to_string());
  }
}

ImageTensor::ImageTensor(ImageShape shape, std::vector<double> values, std::optional<int> label)
    : shape_(shape), values_(std::move(values)), label_(label) {
  validate_shape(shape_);
  if (values_.size() != shape_.size()) {
    throw ConfigError("image " + shape_.to_string() + " expects " + std::to_string(shape_.size()) +
                      " values, got " + std::to_string(values_.size()));
  }
}

ImageTensor ImageTensor::zeros(ImageShape shape, std::optional<int> label) {
  return ImageTensor(shape, std::vector<double>(shape.size(), 0.0), label);
}

std::span<const double> ImageTensor::channel(int c) const {
  return std::span<const double>(values_).subspan(c * shape_.plane_size(), shape_.plane_size());
}

std::span<double> ImageTensor::channel(int c) {
  return std::span<double>(values_).subspan(c * shape_.plane_size(), shape_.plane_size());
}

void ImageTensor::require_finite() const {
  for (std::size_t i = 0; i < values_.size(); ++i) {
    if (!std::isfinite(values_[i])) {
      throw DataError("image contains a non-finite value at flat index " + std::to_string(i));
    }
  }
}

}  // namespace hfss
