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

#ifndef HFSS_TOOLS_COMMANDS_HPP_
#define HFSS_TOOLS_COMMANDS_HPP_

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace hfss::cli {

struct SynthArgs {
  std::string config = "default";
  std::filesystem::path out;
  std::optional<std::uint64_t> seed;
  std::optional<int> ood_per_class;
  int workers = 1;
  bool overwrite = false;
};

struct SearchArgs {
  std::string config = "cifar-default";
  std::filesystem::path data;
  std::string endpoint;
  std::filesystem::path out;
  std::optional<std::filesystem::path> eval_like;
  std::optional<int> eval_per_class;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> shape;  // CxHxW, remote endpoints
  std::string channels = "keep";
  int workers = 1;
  bool overwrite = false;
};

struct FilterArgs {
  std::filesystem::path data;
  std::filesystem::path dfm;
  std::filesystem::path out;
  std::string channels = "keep";
  int workers = 1;
  bool overwrite = false;
};

struct EvalArgs {
  std::filesystem::path config;
  std::filesystem::path out;
  std::optional<std::string> thresholds;
  int workers = 1;
  bool overwrite = false;
};

struct ReportArgs {
  std::filesystem::path run;
  std::filesystem::path out;
  std::optional<std::string> thresholds;
  bool overwrite = false;
};

struct ServeArgs {
  std::string endpoint;
};

struct ReferenceArgs {
  std::filesystem::path out;
  std::string shape = "1x32x32";
  int classes = 10;
  std::uint64_t seed = 42;
  float scale = 0.05f;
  bool identity = false;
};

int cmd_synth(const SynthArgs& args);
int cmd_search(const SearchArgs& args);
int cmd_filter(const FilterArgs& args);
int cmd_eval(const EvalArgs& args);
int cmd_report(const ReportArgs& args);
int cmd_presets();
int cmd_serve(const ServeArgs& args);
int cmd_reference(const ReferenceArgs& args);

}  // namespace hfss::cli

#endif  // HFSS_TOOLS_COMMANDS_HPP_
