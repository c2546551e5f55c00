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

#include "hfss/remote.hpp"

#include <fcntl.h>
#include <netdb.h>
#include <signal.h>
#include <sys/socket.h>
#include <sys/un.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <string>
#include <utility>
#include <vector>

#include "hfss/error.hpp"

namespace hfss {
namespace {

RemoteError transport_error(const std::string& what) {
  return RemoteError(what + ": " + std::strerror(errno), /*retryable=*/true);
}

int connect_tcp(const std::string& host, const std::string& port) {
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* found = nullptr;
  if (int rc = ::getaddrinfo(host.c_str(), port.c_str(), &hints, &found); rc != 0) {
    throw RemoteError("cannot resolve " + host + ":" + port + ": " + ::gai_strerror(rc), true);
  }
  int fd = -1;
  for (addrinfo* ai = found; ai != nullptr; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype | SOCK_CLOEXEC, ai->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(found);
  if (fd < 0) throw transport_error("cannot connect to " + host + ":" + port);
  return fd;
}

int connect_unix(const std::string& path) {
  int fd = ::socket(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0);
  if (fd < 0) throw transport_error("socket");
  sockaddr_un addr{};
  addr.sun_family = AF_UNIX;
  if (path.size() >= sizeof(addr.sun_path)) throw ConfigError("unix socket path too long");
  std::memcpy(addr.sun_path, path.c_str(), path.size() + 1);
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd);
    throw transport_error("cannot connect to unix:" + path);
  }
  return fd;
}

std::unique_ptr<Transport> spawn(const std::string& command) {
  int to_child[2];
  int from_child[2];
  if (::pipe2(to_child, O_CLOEXEC) != 0) throw transport_error("pipe");
  if (::pipe2(from_child, O_CLOEXEC) != 0) {
    ::close(to_child[0]);
    ::close(to_child[1]);
    throw transport_error("pipe");
  }
  ::signal(SIGPIPE, SIG_IGN);
  const pid_t pid = ::fork();
  if (pid < 0) throw transport_error("fork");
  if (pid == 0) {
    ::setpgid(0, 0);
    ::dup2(to_child[0], STDIN_FILENO);
    ::dup2(from_child[1], STDOUT_FILENO);
    ::close(to_child[0]);
    ::close(to_child[1]);
    ::close(from_child[0]);
    ::close(from_child[1]);
    ::execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
    ::_exit(127);
  }
  ::setpgid(pid, pid);
  ::close(to_child[0]);
  ::close(from_child[1]);
  return std::make_unique<Transport>(from_child[0], to_child[1], pid);
}

std::vector<float> to_float_tensor(std::span<const ImageTensor> batch) {
  std::vector<float> out;
  if (batch.empty()) return out;
  out.reserve(batch.size() * batch[0].shape().size());
  for (const auto& image : batch) {
    for (double v : image.values()) out.push_back(static_cast<float>(v));
  }
  return out;
}

}  // namespace

Transport::Transport(int read_fd, int write_fd, int child_pid)
    : read_fd_(read_fd), write_fd_(write_fd), child_pid_(child_pid) {}

Transport::~Transport() {
  shutdown();
  if (read_fd_ >= 0) ::close(read_fd_);
  if (write_fd_ >= 0 && write_fd_ != read_fd_) ::close(write_fd_);
  if (child_pid_ > 0) {
    int status = 0;
    ::waitpid(child_pid_, &status, 0);
  }
}

std::size_t Transport::read_some(char* buffer, std::size_t capacity) {
  while (true) {
    const ssize_t n = ::read(read_fd_, buffer, capacity);
    if (n >= 0) return static_cast<std::size_t>(n);
    if (errno == EINTR) continue;
    throw transport_error("read failed");
  }
}

void Transport::write_all(std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = read_fd_ == write_fd_
                          ? ::send(write_fd_, bytes.data(), bytes.size(), MSG_NOSIGNAL)
                          : ::write(write_fd_, bytes.data(), bytes.size());
    if (n < 0) {
      if (errno == EINTR) continue;
      throw transport_error("write failed");
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
}

void Transport::shutdown() {
  if (read_fd_ == write_fd_) {
    ::shutdown(read_fd_, SHUT_RDWR);
  } else if (child_pid_ > 0) {
    // EOF on stdin first, then the whole process group.
    if (write_fd_ >= 0) {
      ::close(write_fd_);
      write_fd_ = -1;
    }
    ::kill(-child_pid_, SIGTERM);
  } else {
    ::shutdown(read_fd_, SHUT_RDWR);
    ::shutdown(write_fd_, SHUT_RDWR);
  }
}

std::unique_ptr<Transport> connect_transport(const std::string& address) {
  if (address.rfind("tcp://", 0) == 0) {
    const std::string rest = address.substr(6);
    const auto colon = rest.rfind(':');
    if (colon == std::string::npos) throw ConfigError("tcp address needs host:port: " + address);
    const int fd = connect_tcp(rest.substr(0, colon), rest.substr(colon + 1));
    return std::make_unique<Transport>(fd, fd);
  }
  if (address.rfind("unix:", 0) == 0) {
    const int fd = connect_unix(address.substr(5));
    return std::make_unique<Transport>(fd, fd);
  }
  if (address.rfind("exec:", 0) == 0) return spawn(address.substr(5));
  throw ConfigError("unsupported remote address '" + address +
                    "' (expected tcp://host:port, unix:/path or exec:<command>)");
}

std::pair<std::unique_ptr<Transport>, std::unique_ptr<Transport>> transport_pair() {
  int fds[2];
  if (::socketpair(AF_UNIX, SOCK_STREAM | SOCK_CLOEXEC, 0, fds) != 0) throw transport_error("socketpair");
  return {std::make_unique<Transport>(fds[0], fds[0]), std::make_unique<Transport>(fds[1], fds[1])};
}

RemoteClassifier::RemoteClassifier(std::unique_ptr<Transport> transport, ImageShape shape,
                                   std::chrono::milliseconds timeout)
    : transport_(std::move(transport)), shape_(shape), timeout_(timeout) {
  validate_shape(shape_);
  reader_ = std::thread([this] { reader_loop(); });
  protocol::InferRequest probe;
  probe.batch = 1;
  probe.channels = static_cast<std::uint32_t>(shape_.channels);
  probe.height = static_cast<std::uint32_t>(shape_.height);
  probe.width = static_cast<std::uint32_t>(shape_.width);
  probe.tensor.assign(shape_.size(), 0.0f);
  try {
    const auto response = infer(probe);
    if (response.classes == 0) throw RemoteError("remote model reports zero classes", false);
    classes_ = static_cast<int>(response.classes);
  } catch (...) {
    transport_->shutdown();
    reader_.join();
    throw;
  }
}

RemoteClassifier::~RemoteClassifier() {
  transport_->shutdown();
  if (reader_.joinable()) reader_.join();
}

void RemoteClassifier::fail_all(const std::string& why) {
  std::lock_guard lock(mu_);
  broken_ = true;
  broken_reason_ = why;
  for (auto& [id, promise] : pending_) {
    promise.set_exception(std::make_exception_ptr(RemoteError(why, /*retryable=*/true)));
  }
  pending_.clear();
}

void RemoteClassifier::reader_loop() {
  std::string buffer;
  std::vector<char> chunk(1 << 16);
  try {
    while (true) {
      const std::size_t n = transport_->read_some(chunk.data(), chunk.size());
      if (n == 0) {
        fail_all("remote endpoint closed the connection");
        return;
      }
      buffer.append(chunk.data(), n);
      while (true) {
        auto decoded = protocol::decode_frame(buffer);
        if (decoded.status == protocol::DecodeResult::Status::kNeedMore) break;
        buffer.erase(0, decoded.consumed);
        if (decoded.status == protocol::DecodeResult::Status::kMalformed) {
          fail_all("malformed frame from remote endpoint: " + decoded.error);
          return;
        }
        std::lock_guard lock(mu_);
        auto it = pending_.find(decoded.frame.request_id);
        if (it == pending_.end()) continue;  // late reply to a timed-out request
        it->second.set_value(std::move(decoded.frame));
        pending_.erase(it);
      }
    }
  } catch (const std::exception& e) {
    fail_all(e.what());
  }
}

protocol::InferResponse RemoteClassifier::infer(const protocol::InferRequest& request) const {
  std::future<protocol::Frame> reply;
  std::uint64_t id;
  {
    std::lock_guard lock(mu_);
    if (broken_) throw RemoteError(broken_reason_, /*retryable=*/true);
    id = next_id_++;
    reply = pending_[id].get_future();
  }
  const std::string bytes = protocol::encode_frame(
      {protocol::FrameKind::kInferRequest, id, protocol::encode_infer_request(request)});
  try {
    std::lock_guard lock(write_mu_);
    transport_->write_all(bytes);
  } catch (...) {
    std::lock_guard lock(mu_);
    pending_.erase(id);
    throw;
  }
  if (reply.wait_for(timeout_) != std::future_status::ready) {
    std::lock_guard lock(mu_);
    pending_.erase(id);
    throw RemoteError("timed out waiting for request " + std::to_string(id), /*retryable=*/true);
  }
  protocol::Frame frame = reply.get();
  if (frame.kind == protocol::FrameKind::kError) {
    throw RemoteError("remote endpoint error: " + frame.payload, /*retryable=*/false);
  }
  if (frame.kind != protocol::FrameKind::kInferResponse) {
    throw RemoteError("unexpected frame kind in reply", /*retryable=*/false);
  }
  try {
    auto response = protocol::decode_infer_response(frame.payload);
    if (response.batch != request.batch) {
      throw RemoteError("reply batch size " + std::to_string(response.batch) + " != request " +
                            std::to_string(request.batch),
                        false);
    }
    return response;
  } catch (const DataError& e) {
    throw RemoteError(e.what(), /*retryable=*/false);
  }
}

Logits RemoteClassifier::predict(std::span<const ImageTensor> batch) const {
  if (batch.empty()) return Logits(0, static_cast<std::size_t>(classes_));
  protocol::InferRequest request;
  request.batch = static_cast<std::uint32_t>(batch.size());
  request.channels = static_cast<std::uint32_t>(shape_.channels);
  request.height = static_cast<std::uint32_t>(shape_.height);
  request.width = static_cast<std::uint32_t>(shape_.width);
  request.tensor = to_float_tensor(batch);
  const auto response = infer(request);
  if (static_cast<int>(response.classes) != classes_) {
    throw RemoteError("remote class count changed from " + std::to_string(classes_) + " to " +
                          std::to_string(response.classes),
                      false);
  }
  Logits logits(batch.size(), response.classes);
  for (std::size_t r = 0; r < batch.size(); ++r) {
    for (std::size_t c = 0; c < response.classes; ++c) {
      logits.at(r, c) = static_cast<double>(response.logits[r * response.classes + c]);
    }
  }
  return logits;
}

std::size_t serve_stream(Transport& transport, const Classifier& model, std::uint32_t max_batch) {
  const ImageShape shape = model.input_shape();
  std::string buffer;
  std::vector<char> chunk(1 << 16);
  std::size_t answered = 0;

  bool closed = false;
  auto reply = [&](const protocol::Frame& frame) {
    if (closed) return;
    try {
      transport.write_all(protocol::encode_frame(frame));
      ++answered;
    } catch (const RemoteError&) {
      closed = true;
    }
  };

  while (!closed) {
    std::size_t n = 0;
    try {
      n = transport.read_some(chunk.data(), chunk.size());
    } catch (const RemoteError&) {
      return answered;
    }
    if (n == 0) return answered;
    buffer.append(chunk.data(), n);

    while (!closed) {
      auto decoded = protocol::decode_frame(buffer);
      if (decoded.status == protocol::DecodeResult::Status::kNeedMore) break;
      buffer.erase(0, decoded.consumed);
      if (decoded.status == protocol::DecodeResult::Status::kMalformed) {
        reply(protocol::error_frame(decoded.request_id.value_or(0), decoded.error));
        continue;
      }
      const protocol::Frame& frame = decoded.frame;
      if (frame.kind != protocol::FrameKind::kInferRequest) {
        reply(protocol::error_frame(frame.request_id, "expected an infer request"));
        continue;
      }
      try {
        auto request = protocol::decode_infer_request(frame.payload);
        if (request.channels != static_cast<std::uint32_t>(shape.channels) ||
            request.height != static_cast<std::uint32_t>(shape.height) ||
            request.width != static_cast<std::uint32_t>(shape.width)) {
          throw DataError("request shape does not match model input " + shape.to_string());
        }
        if (request.batch > max_batch) {
          throw DataError("batch of " + std::to_string(request.batch) + " exceeds limit " +
                          std::to_string(max_batch));
        }
        std::vector<ImageTensor> images;
        images.reserve(request.batch);
        const std::size_t per = shape.size();
        for (std::uint32_t b = 0; b < request.batch; ++b) {
          std::vector<double> values(request.tensor.begin() + b * per,
                                     request.tensor.begin() + (b + 1) * per);
          images.emplace_back(shape, std::move(values));
        }
        const Logits logits = model.predict(images);
        protocol::InferResponse response;
        response.batch = request.batch;
        response.classes = static_cast<std::uint32_t>(logits.cols());
        response.logits.reserve(logits.rows() * logits.cols());
        for (std::size_t r = 0; r < logits.rows(); ++r) {
          for (double v : logits.row(r)) response.logits.push_back(static_cast<float>(v));
        }
        reply({protocol::FrameKind::kInferResponse, frame.request_id,
               protocol::encode_infer_response(response)});
      } catch (const Error& e) {
        reply(protocol::error_frame(frame.request_id, e.what()));
      }
    }
  }
  return answered;
}

}  // namespace hfss
