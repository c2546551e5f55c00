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

#ifndef HFSS_REMOTE_HPP_
#define HFSS_REMOTE_HPP_

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <thread>

#include "hfss/model.hpp"
#include "hfss/protocol.hpp"

namespace hfss {

// Bidirectional byte stream over file descriptors (socket or pipe pair).
class Transport {
 public:
  // Takes ownership of the descriptors. For a socket pass the same fd twice.
  Transport(int read_fd, int write_fd, int child_pid = -1);
  ~Transport();
  Transport(const Transport&) = delete;
  Transport& operator=(const Transport&) = delete;

  // Returns 0 on end of stream. Throws RemoteError (retryable) on failure.
  std::size_t read_some(char* buffer, std::size_t capacity);
  void write_all(std::string_view bytes);
  // Unblocks pending reads; further I/O fails.
  void shutdown();

 private:
  int read_fd_;
  int write_fd_;
  int child_pid_;
};

// Addresses: tcp://host:port, unix:/path/to/socket, exec:<shell command>
// (the command speaks the protocol on its stdin/stdout).
std::unique_ptr<Transport> connect_transport(const std::string& address);

// Connected pair for in-process tests.
std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> transport_pair();

// Client side of the inference protocol. Requests from any number of
// threads are pipelined over one connection and matched by request id.
class RemoteClassifier final : public Classifier {
 public:
  // Sends a one-image probe to learn the class count.
  RemoteClassifier(std::unique_ptr<Transport> transport, ImageShape shape,
                   std::chrono::milliseconds timeout = std::chrono::minutes(5));
  ~RemoteClassifier() override;

  int class_count() const override { return classes_; }
  ImageShape input_shape() const override { return shape_; }
  Logits predict(std::span<const ImageTensor> batch) const override;

  // Raw round trip; throws RemoteError on an error frame or transport loss.
  protocol::InferResponse infer(const protocol::InferRequest& request) const;

 private:
  void reader_loop();
  void fail_all(const std::string& why);

  std::unique_ptr<Transport> transport_;
  ImageShape shape_;
  std::chrono::milliseconds timeout_;
  int classes_ = 0;

  mutable std::mutex mu_;
  mutable std::mutex write_mu_;
  mutable std::uint64_t next_id_ = 1;
  mutable std::map<std::uint64_t, std::promise<protocol::Frame>> pending_;
  bool broken_ = false;
  std::string broken_reason_;
  std::thread reader_;
};

// Server side: answers infer requests with `model` until end of stream.
// Malformed frames and bad payloads get error frames; the connection stays
// usable. Returns the number of frames answered.
std::size_t serve_stream(Transport& transport, const Classifier& model,
                         std::uint32_t max_batch = 4096);

}  // namespace hfss

#endif  // HFSS_REMOTE_HPP_
