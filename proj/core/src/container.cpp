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

#include "hfss/container.hpp"

#include <cstdio>
#include <fstream>
#include <iterator>
#include <sstream>

#include "hfss/error.hpp"

namespace hfss {

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string encode_headered(const HeaderedFile& file) {
  std::string out;
  out.reserve(file.magic.size() + file.header_json.size() + file.body.size() + 2);
  out += file.magic;
  out += '\n';
  out += file.header_json;
  out += '\n';
  out += file.body;
  return out;
}

HeaderedFile decode_headered(std::string_view bytes, std::string_view expected_magic) {
  const auto first = bytes.find('\n');
  if (first == std::string_view::npos || bytes.substr(0, first) != expected_magic) {
    throw IoError("not a " + std::string(expected_magic) + " file");
  }
  const auto second = bytes.find('\n', first + 1);
  if (second == std::string_view::npos) throw IoError("truncated header");
  HeaderedFile file;
  file.magic = std::string(expected_magic);
  file.header_json = std::string(bytes.substr(first + 1, second - first - 1));
  file.body = std::string(bytes.substr(second + 1));
  return file;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path.string());
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view bytes) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create " + path.parent_path().string() + ": " + ec.message());
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

void prepare_output_dir(const std::filesystem::path& dir, bool overwrite) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (fs::exists(dir, ec)) {
    if (!fs::is_directory(dir, ec)) throw ConfigError(dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir, ec)) {
      if (!overwrite) {
        throw ConfigError("output directory " + dir.string() +
                          " is not empty (pass --overwrite to replace it)");
      }
      fs::remove_all(dir, ec);
      if (ec) throw IoError("cannot clear " + dir.string() + ": " + ec.message());
    }
  }
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

}  // namespace hfss
