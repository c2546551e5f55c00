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

#ifndef HFSS_IMAGE_IO_HPP_
#define HFSS_IMAGE_IO_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "hfss/image.hpp"

namespace hfss {

// Decoded pixels scaled to [0,1], interleaved, 1 to 4 channels.
struct RawImage {
  int width = 0;
  int height = 0;
  int channels = 0;
  std::vector<double> values;

  double at(int y, int x, int c) const {
    return values[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

// PNG (8/16-bit, any color type) or JPEG, chosen by content. Throws
// DataError naming the file when it cannot be decoded.
RawImage decode_image_file(const std::filesystem::path& path);
RawImage decode_image_bytes(const std::string& bytes, const std::string& name);

// 16-bit PNG, values clipped to [0,1]. Gray for 1 channel, RGB for 3.
std::string encode_png16(const ImageTensor& image);
void write_png16(const std::filesystem::path& path, const ImageTensor& image);

// 8-bit PNG / baseline JPEG from interleaved [0,1] data, used for fixtures.
void write_png8(const std::filesystem::path& path, const RawImage& image);
void write_jpeg(const std::filesystem::path& path, const RawImage& image, int quality);

bool is_image_file(const std::filesystem::path& path);

}  // namespace hfss

#endif  // HFSS_IMAGE_IO_HPP_
