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

#ifndef HFSS_PROTOCOL_HPP_
#define HFSS_PROTOCOL_HPP_

// Length-prefixed binary frames for remote inference.
//
//   magic "HFSS" | version u8 = 1 | kind u8 | request id u64 LE |
//   payload length u64 LE | payload
//
// Infer request payload:  batch u32 | channels u32 | height u32 | width u32
//                         | float32 LE tensor, row-major
// Infer response payload: batch u32 | K u32 | float32 LE logits (batch x K)
// Error payload:          UTF-8 message

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace hfss::protocol {

inline constexpr std::string_view kMagic = "HFSS";
inline constexpr std::uint8_t kVersion = 1;
inline constexpr std::size_t kHeaderSize = 4 + 1 + 1 + 8 + 8;
inline constexpr std::uint64_t kDefaultMaxPayload = std::uint64_t{1} << 30;

enum class FrameKind : std::uint8_t {
  kInferRequest = 0,
  kInferResponse = 1,
  kError = 2,
};

struct Frame {
  FrameKind kind = FrameKind::kInferRequest;
  std::uint64_t request_id = 0;
  std::string payload;

  friend bool operator==(const Frame&, const Frame&) = default;
};

std::string encode_frame(const Frame& frame);

struct DecodeResult {
  enum class Status { kNeedMore, kFrame, kMalformed };

  Status status = Status::kNeedMore;
  Frame frame;
  // Bytes of the input consumed (frame length, or bytes to discard when
  // malformed).
  std::size_t consumed = 0;
  std::string error;
  // Request id when the header was readable far enough to recover it.
  std::optional<std::uint64_t> request_id;
};

// Decodes the first frame in `buffer`. Never reads past buffer.size().
// On a bad magic the decoder discards up to the next candidate magic.
DecodeResult decode_frame(std::string_view buffer,
                          std::uint64_t max_payload = kDefaultMaxPayload);

struct InferRequest {
  std::uint32_t batch = 0;
  std::uint32_t channels = 0;
  std::uint32_t height = 0;
  std::uint32_t width = 0;
  std::vector<float> tensor;
};

struct InferResponse {
  std::uint32_t batch = 0;
  std::uint32_t classes = 0;
  std::vector<float> logits;
};

std::string encode_infer_request(const InferRequest& request);
std::string encode_infer_response(const InferResponse& response);
// Both throw DataError on a payload whose size disagrees with its header.
InferRequest decode_infer_request(std::string_view payload);
InferResponse decode_infer_response(std::string_view payload);

Frame error_frame(std::uint64_t request_id, std::string_view message);

}  // namespace hfss::protocol

#endif  // HFSS_PROTOCOL_HPP_
