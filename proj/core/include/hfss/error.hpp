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

#ifndef HFSS_ERROR_HPP_
#define HFSS_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace hfss {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kConfig = 2,
  kIo = 3,
  kRemote = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kConfig; }
};

// Invalid configuration, schedule, or argument shapes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data failed validation (non-finite values, bad labels, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// Subset sampling could not satisfy its request.
class SamplingError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kIo; }
};

// Remote endpoint failure. Transport failures are retryable; error frames
// returned by the server are not.
class RemoteError : public Error {
 public:
  RemoteError(const std::string& what, bool retryable)
      : Error(what), retryable_(retryable) {}
  bool retryable() const noexcept { return retryable_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kRemote; }

 private:
  bool retryable_;
};

}  // namespace hfss

#endif  // HFSS_ERROR_HPP_
