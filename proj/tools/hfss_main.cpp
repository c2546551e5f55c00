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

#include <exception>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "hfss/error.hpp"

namespace {

int exit_code(const hfss::Error& e) { return static_cast<int>(e.exit_code()); }

}  // namespace

int main(int argc, char** argv) {
  using namespace hfss::cli;
  CLI::App app{"Hierarchical frequency shortcut search"};
  app.require_subcommand(1);

  SynthArgs synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a planted-shortcut dataset");
  synth_cmd->add_option("--config", synth.config, "Planted spec file, or 'default' / 'mixed'");
  synth_cmd->add_option("--out", synth.out, "Output directory")->required();
  synth_cmd->add_option("--seed", synth.seed, "Override the planted-set seed");
  synth_cmd->add_option("--ood-per-class", synth.ood_per_class, "Images per class in OOD sets");
  synth_cmd->add_option("--workers", synth.workers)->check(CLI::PositiveNumber);
  synth_cmd->add_flag("--overwrite", synth.overwrite, "Replace a non-empty output directory");

  SearchArgs search;
  auto* search_cmd = app.add_subcommand("search", "Search dominant frequency maps");
  search_cmd->add_option("--config", search.config, "Preset name or configuration file");
  search_cmd->add_option("--data", search.data, "Folder-per-class training images")->required();
  search_cmd->add_option("--endpoint", search.endpoint, "builtin:<file> or remote:<address>")
      ->required();
  search_cmd->add_option("--out", search.out, "Output directory")->required();
  search_cmd->add_option("--eval-like", search.eval_like,
                         "Sample as many evaluation images per class as this test tree has");
  search_cmd->add_option("--eval-per-class", search.eval_per_class)->check(CLI::PositiveNumber);
  search_cmd->add_option("--seed", search.seed, "Override the configuration seed");
  search_cmd->add_option("--shape", search.shape, "Input shape CxHxW (remote endpoints)");
  search_cmd->add_option("--channels", search.channels, "keep | replicate-to-3 | luminance");
  search_cmd->add_option("--workers", search.workers)->check(CLI::PositiveNumber);
  search_cmd->add_flag("--overwrite", search.overwrite);

  FilterArgs filter;
  auto* filter_cmd = app.add_subcommand("filter", "Write DFM-filtered copies of an image tree");
  filter_cmd->add_option("--data", filter.data)->required();
  filter_cmd->add_option("--dfm", filter.dfm)->required();
  filter_cmd->add_option("--out", filter.out)->required();
  filter_cmd->add_option("--channels", filter.channels);
  filter_cmd->add_option("--workers", filter.workers)->check(CLI::PositiveNumber);
  filter_cmd->add_flag("--overwrite", filter.overwrite);

  EvalArgs eval;
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a run manifest");
  eval_cmd->add_option("--config", eval.config, "Run manifest (JSON)")->required();
  eval_cmd->add_option("--out", eval.out)->required();
  eval_cmd->add_option("--thresholds", eval.thresholds, "Comma-separated thresholds");
  eval_cmd->add_option("--workers", eval.workers)->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--overwrite", eval.overwrite);

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "Rebuild reports from an eval directory");
  report_cmd->add_option("--run", report.run)->required();
  report_cmd->add_option("--out", report.out)->required();
  report_cmd->add_option("--thresholds", report.thresholds);
  report_cmd->add_flag("--overwrite", report.overwrite);

  auto* presets_cmd = app.add_subcommand("presets", "List shipped search presets");

  ServeArgs serve;
  auto* serve_cmd = app.add_subcommand("serve", "Answer inference frames on stdin/stdout");
  serve_cmd->add_option("--endpoint", serve.endpoint, "builtin:<file>")->required();

  ReferenceArgs reference;
  auto* reference_cmd = app.add_subcommand("reference", "Write a float32 reference linear model");
  reference_cmd->add_option("--out", reference.out)->required();
  reference_cmd->add_option("--shape", reference.shape, "CxHxW");
  reference_cmd->add_option("--classes", reference.classes);
  reference_cmd->add_option("--seed", reference.seed);
  reference_cmd->add_option("--scale", reference.scale);
  reference_cmd->add_flag("--identity", reference.identity);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return static_cast<int>(hfss::ExitCode::kConfig);
  }

  try {
    if (*synth_cmd) return cmd_synth(synth);
    if (*search_cmd) return cmd_search(search);
    if (*filter_cmd) return cmd_filter(filter);
    if (*eval_cmd) return cmd_eval(eval);
    if (*report_cmd) return cmd_report(report);
    if (*presets_cmd) return cmd_presets();
    if (*serve_cmd) return cmd_serve(serve);
    if (*reference_cmd) return cmd_reference(reference);
  } catch (const hfss::Error& e) {
    std::cerr << "hfss: error: " << e.what() << std::endl;
    return exit_code(e);
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "hfss: error: " << e.what() << std::endl;
    return static_cast<int>(hfss::ExitCode::kIo);
  } catch (const std::exception& e) {
    std::cerr << "hfss: internal error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}
