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

#include "hfss/protocol.hpp"

#include <bit>
#include <cstring>
#include <initializer_list>
#include <optional>

#include "hfss/error.hpp"

namespace hfss::protocol {
namespace {

static_assert(std::endian::native == std::endian::little,
              "wire encoding assumes a little-endian host");

template <typename T>
void put(std::string& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.append(buf, sizeof(T));
}

template <typename T>
T get(std::string_view in, std::size_t offset) {
  T value;
  std::memcpy(&value, in.data() + offset, sizeof(T));
  return value;
}

void put_floats(std::string& out, const std::vector<float>& values) {
  const auto* bytes = reinterpret_cast<const char*>(values.data());
  out.append(bytes, values.size() * sizeof(float));
}

// Product of the dimensions, or nullopt on 64-bit overflow.
std::optional<std::uint64_t> element_count(std::initializer_list<std::uint32_t> dims) {
  std::uint64_t n = 1;
  for (std::uint32_t d : dims) {
    if (__builtin_mul_overflow(n, std::uint64_t{d}, &n)) return std::nullopt;
  }
  return n;
}

std::vector<float> get_floats(std::string_view in, std::size_t offset, std::size_t count) {
  std::vector<float> values(count);
  std::memcpy(values.data(), in.data() + offset, count * sizeof(float));
  return values;
}

}  // namespace

std::string encode_frame(const Frame& frame) {
  std::string out;
  out.reserve(kHeaderSize + frame.payload.size());
  out.append(kMagic);
  put<std::uint8_t>(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(frame.kind));
  put<std::uint64_t>(out, frame.request_id);
  put<std::uint64_t>(out, frame.payload.size());
  out.append(frame.payload);
  return out;
}

DecodeResult decode_frame(std::string_view buffer, std::uint64_t max_payload) {
  DecodeResult result;
  const std::size_t magic_len = std::min(buffer.size(), kMagic.size());
  if (buffer.substr(0, magic_len) != kMagic.substr(0, magic_len)) {
    result.status = DecodeResult::Status::kMalformed;
    result.error = "bad frame magic";
    // Resynchronize at the next 'H' that could start a magic.
    const auto next = buffer.find(kMagic[0], 1);
    result.consumed = next == std::string_view::npos ? buffer.size() : next;
    return result;
  }
  if (buffer.size() < kHeaderSize) return result;

  const auto version = get<std::uint8_t>(buffer, 4);
  const auto kind = get<std::uint8_t>(buffer, 5);
  const auto id = get<std::uint64_t>(buffer, 6);
  const auto length = get<std::uint64_t>(buffer, 14);
  result.request_id = id;

  if (version != kVersion || kind > static_cast<std::uint8_t>(FrameKind::kError) ||
      length > max_payload) {
    result.status = DecodeResult::Status::kMalformed;
    result.error = version != kVersion ? "unsupported protocol version " + std::to_string(version)
                   : length > max_payload ? "payload of " + std::to_string(length) +
                                                " bytes exceeds the limit"
                                          : "unknown frame kind " + std::to_string(kind);
    // The header is untrustworthy; drop it and resynchronize.
    const auto next = buffer.find(kMagic[0], 1);
    result.consumed = next == std::string_view::npos ? buffer.size() : next;
    return result;
  }
  if (buffer.size() - kHeaderSize < length) return result;

  result.status = DecodeResult::Status::kFrame;
  result.frame.kind = static_cast<FrameKind>(kind);
  result.frame.request_id = id;
  result.frame.payload = std::string(buffer.substr(kHeaderSize, length));
  result.consumed = kHeaderSize + length;
  return result;
}

std::string encode_infer_request(const InferRequest& request) {
  std::string out;
  put<std::uint32_t>(out, request.batch);
  put<std::uint32_t>(out, request.channels);
  put<std::uint32_t>(out, request.height);
  put<std::uint32_t>(out, request.width);
  put_floats(out, request.tensor);
  return out;
}

std::string encode_infer_response(const InferResponse& response) {
  std::string out;
  put<std::uint32_t>(out, response.batch);
  put<std::uint32_t>(out, response.classes);
  put_floats(out, response.logits);
  return out;
}

InferRequest decode_infer_request(std::string_view payload) {
  if (payload.size() < 16) throw DataError("infer request shorter than its 16-byte header");
  InferRequest r;
  r.batch = get<std::uint32_t>(payload, 0);
  r.channels = get<std::uint32_t>(payload, 4);
  r.height = get<std::uint32_t>(payload, 8);
  r.width = get<std::uint32_t>(payload, 12);
  const auto count = element_count({r.batch, r.channels, r.height, r.width});
  const std::size_t body = payload.size() - 16;
  if (!count || *count > body / sizeof(float) || body != *count * sizeof(float)) {
    throw DataError("infer request tensor has " + std::to_string(body) +
                    " bytes, which disagrees with its declared shape");
  }
  r.tensor = get_floats(payload, 16, static_cast<std::size_t>(*count));
  return r;
}

InferResponse decode_infer_response(std::string_view payload) {
  if (payload.size() < 8) throw DataError("infer response shorter than its 8-byte header");
  InferResponse r;
  r.batch = get<std::uint32_t>(payload, 0);
  r.classes = get<std::uint32_t>(payload, 4);
  const auto count = element_count({r.batch, r.classes});
  const std::size_t body = payload.size() - 8;
  if (!count || *count > body / sizeof(float) || body != *count * sizeof(float)) {
    throw DataError("infer response logits have " + std::to_string(body) +
                    " bytes, which disagrees with the declared batch x classes");
  }
  r.logits = get_floats(payload, 8, static_cast<std::size_t>(*count));
  return r;
}

Frame error_frame(std::uint64_t request_id, std::string_view message) {
  return Frame{FrameKind::kError, request_id, std::string(message)};
}

}  // namespace hfss::protocol
