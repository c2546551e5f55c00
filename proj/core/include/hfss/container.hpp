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

#ifndef HFSS_CONTAINER_HPP_
#define HFSS_CONTAINER_HPP_

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace hfss {

// FNV-1a 64-bit.
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t value);

// Container shared by DFM and classifier files: a magic line, one line of
// JSON header, then a raw binary body.
struct HeaderedFile {
  std::string magic;
  std::string header_json;
  std::string body;
};

std::string encode_headered(const HeaderedFile& file);
// Throws IoError if the magic line does not match or the header is
// truncated.
HeaderedFile decode_headered(std::string_view bytes, std::string_view expected_magic);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view bytes);

// Creates `dir`. If it exists and is non-empty, requires `overwrite` and
// then clears it; otherwise throws ConfigError.
void prepare_output_dir(const std::filesystem::path& dir, bool overwrite);

}  // namespace hfss

#endif  // HFSS_CONTAINER_HPP_
