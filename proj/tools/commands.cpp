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

#include "commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <iostream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/data.hpp"
#include "hfss/error.hpp"
#include "hfss/harness.hpp"
#include "hfss/image_io.hpp"
#include "hfss/metrics.hpp"
#include "hfss/model.hpp"
#include "hfss/patch_grid.hpp"
#include "hfss/planted.hpp"
#include "hfss/remote.hpp"
#include "hfss/search.hpp"

namespace hfss::cli {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

void progress(const std::string& line) { std::cerr << "hfss: " << line << std::endl; }

void warn(const std::string& line) { std::cerr << "hfss: warning: " << line << std::endl; }

ImageShape parse_shape(const std::string& text) {
  int c = 0, h = 0, w = 0;
  char x1 = 0, x2 = 0;
  std::istringstream in(text);
  if (!(in >> c >> x1 >> h >> x2 >> w) || x1 != 'x' || x2 != 'x' || !in.eof()) {
    throw ConfigError("shape must look like CxHxW, got '" + text + "'");
  }
  ImageShape shape{c, h, w};
  validate_shape(shape);
  return shape;
}

PlantedSpec load_planted(const std::string& spec) {
  if (spec == "default") return default_planted_spec();
  if (spec == "mixed") return mixed_planted_spec();
  return parse_planted_spec(read_file(spec));
}

// Image files per class directory, without decoding.
std::map<std::string, std::size_t> count_class_files(const fs::path& root) {
  if (!fs::is_directory(root)) throw IoError(root.string() + " is not a directory");
  std::map<std::string, std::size_t> counts;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (!entry.is_directory()) continue;
    std::size_t n = 0;
    for (const auto& f : fs::directory_iterator(entry.path())) {
      if (f.is_regular_file() && is_image_file(f.path())) ++n;
    }
    if (n > 0) counts[entry.path().filename().string()] = n;
  }
  return counts;
}

void write_tagged_manifest(const LabeledDataset& ds, const std::string& config_hash,
                           const fs::path& path) {
  json manifest = json::parse(dataset_manifest(ds));
  manifest["config_hash"] = config_hash;
  write_file(path, manifest.dump(2) + "\n");
}

void print_warnings(const LabeledDataset& ds) {
  for (const auto& w : ds.warnings) warn(w);
}

}  // namespace

int cmd_presets() {
  for (const auto& name : preset_names()) {
    const SearchConfig config = preset_config(name);
    std::cout << name << "\tpatch=";
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
      std::cout << (s ? "/" : "") << config.stages[s].patch_size;
    }
    std::cout << "\tB=";
    for (std::size_t s = 0; s < config.stages.size(); ++s) {
      std::cout << (s ? "/" : "") << config.stages[s].candidate_count;
    }
    std::cout << "\ttotal=" << config.total_candidates() << "\n";
  }
  return 0;
}

int cmd_synth(const SynthArgs& args) {
  PlantedSpec spec = load_planted(args.config);
  if (args.seed) spec.seed = *args.seed;
  // folder loads index classes lexicographically; the oracle must agree
  std::stable_sort(spec.classes.begin(), spec.classes.end(),
                   [](const auto& a, const auto& b) { return a.name < b.name; });
  planted_bands(spec);
  prepare_output_dir(args.out, args.overwrite);
  const std::string hash = spec.hash();

  progress("generating " + std::to_string(spec.classes.size()) + " classes, " +
           std::to_string(spec.train_per_class) + " train / " + std::to_string(spec.test_per_class) +
           " test images per class");
  PlantedData data = generate_planted(spec, args.workers);
  const int ood = args.ood_per_class.value_or(spec.test_per_class);
  LabeledDataset texture = generate_planted_ood(spec, OodStyle::kTexture, ood, args.workers);
  LabeledDataset rendition = generate_planted_ood(spec, OodStyle::kRendition, ood, args.workers);

  write_file(args.out / "spec.json", format_planted_spec(spec));
  const std::pair<const char*, LabeledDataset*> splits[] = {
      {"train", &data.train}, {"test", &data.test},
      {"ood-texture", &texture}, {"ood-rendition", &rendition}};
  for (const auto& [name, ds] : splits) {
    save_image_tree(*ds, args.out / name);
    write_tagged_manifest(*ds, hash, args.out / name / "manifest.json");
  }

  DFMSet truth;
  truth.height = spec.height;
  truth.width = spec.width;
  truth.config_hash = hash;
  truth.seed = spec.seed;
  for (std::size_t c = 0; c < spec.classes.size(); ++c) {
    truth.class_names.push_back(spec.classes[c].name);
    ClassDFM dfm;
    dfm.mask = data.truth[c];
    truth.classes.push_back(std::move(dfm));
  }
  save_dfm(truth, args.out / "truth.dfm");
  save_classifier(planted_oracle(spec, data.train), std::nullopt, args.out / "oracle.bin");
  progress("wrote " + args.out.string());
  return 0;
}

int cmd_search(const SearchArgs& args) {
  SearchConfig config = load_search_config(args.config);
  if (args.seed) config.seed = *args.seed;
  config.validate();

  std::optional<ImageShape> shape;
  if (args.shape) shape = parse_shape(*args.shape);
  ClassifierEndpoint endpoint = open_endpoint(args.endpoint, shape);
  const ImageShape input = endpoint.input_shape();
  config.validate_for(input.height, input.width);

  LoadOptions load;
  load.height = input.height;
  load.width = input.width;
  load.channels = parse_channel_policy(args.channels);
  load.workers = args.workers;
  LabeledDataset train = load_folder_dataset(args.data, load);
  print_warnings(train);
  if (train.class_count() != endpoint.class_count()) {
    throw ConfigError("dataset has " + std::to_string(train.class_count()) +
                      " classes but the endpoint has " + std::to_string(endpoint.class_count()));
  }
  if (train.shape() != input) {
    throw ConfigError("dataset images are " + train.shape().to_string() +
                      " but the endpoint expects " + input.to_string());
  }

  std::vector<std::size_t> wanted(train.class_names.size(), 0);
  if (args.eval_like) {
    const auto counts = count_class_files(*args.eval_like);
    for (std::size_t c = 0; c < wanted.size(); ++c) {
      auto it = counts.find(train.class_names[c]);
      if (it == counts.end()) {
        throw DataError("class '" + train.class_names[c] + "' is missing from " +
                        args.eval_like->string());
      }
      wanted[c] = it->second;
    }
  } else if (args.eval_per_class) {
    std::fill(wanted.begin(), wanted.end(), static_cast<std::size_t>(*args.eval_per_class));
  } else {
    wanted = train.class_counts();
  }
  const auto labels = train.labels();
  const auto picked = select_eval_subset(labels, wanted, config.seed, train.class_names);
  LabeledDataset eval = train.subset(picked);

  prepare_output_dir(args.out, args.overwrite);
  progress("searching with " + std::to_string(eval.size()) + " evaluation images, " +
           std::to_string(config.total_candidates()) + " candidates per class chain");
  PreparedImages prepared(eval.images);
  SearchOptions options;
  options.workers = args.workers;
  options.progress = progress;
  const SearchResult result = run_search(config, endpoint, prepared, train.class_names, options);

  save_dfm(result.dfms, args.out / "dfm.bin");
  write_trace_tsv(result.trace, train.class_names, result.dfms.config_hash, args.out / "trace.tsv");
  write_timing_summary(result.trace, config, eval.size(), args.out / "timing.json");
  write_file(args.out / "config.json", format_search_config(config));
  write_tagged_manifest(eval, result.dfms.config_hash, args.out / "eval_manifest.json");
  progress("evaluated " + std::to_string(result.trace.images_processed) + " images in " +
           std::to_string(result.trace.wall_seconds) + " s");
  return 0;
}

int cmd_filter(const FilterArgs& args) {
  const DFMSet dfms = load_dfm(args.dfm);
  LoadOptions load;
  load.height = dfms.height;
  load.width = dfms.width;
  load.channels = parse_channel_policy(args.channels);
  load.workers = args.workers;
  const LabeledDataset ds = load_folder_dataset(args.data, load);
  print_warnings(ds);
  prepare_output_dir(args.out, args.overwrite);

  LabeledDataset written;
  written.split = ds.split;
  written.source = args.out.string();
  std::vector<std::optional<std::size_t>> route(ds.class_names.size());
  for (std::size_t c = 0; c < ds.class_names.size(); ++c) {
    route[c] = dfms.find_class(ds.class_names[c]);
    if (!route[c]) {
      warn("class '" + ds.class_names[c] + "' has no DFM; skipped");
      continue;
    }
    written.class_names.push_back(ds.class_names[c]);
    fs::create_directories(args.out / ds.class_names[c]);
  }
  for (std::size_t i = 0; i < ds.size(); ++i) {
    const int c = *ds.images[i].label();
    if (!route[c]) continue;
    ImageTensor filtered = filter_image(ds.images[i], dfms.classes[*route[c]].mask);
    fs::path rel(ds.files[i]);
    rel.replace_extension(".png");
    write_png16(args.out / rel, filtered);
    filtered.set_label(static_cast<int>(std::find(written.class_names.begin(),
                                                  written.class_names.end(), ds.class_names[c]) -
                                        written.class_names.begin()));
    written.files.push_back(rel.generic_string());
    written.images.push_back(std::move(filtered));
  }
  written.checksum = content_checksum(written);
  write_tagged_manifest(written, dfms.config_hash, args.out / "manifest.json");
  progress("filtered " + std::to_string(written.size()) + " images");
  return 0;
}

int cmd_eval(const EvalArgs& args) {
  const RunManifest manifest =
      parse_run_manifest(read_file(args.config), fs::absolute(args.config).parent_path());
  if (!fs::exists(manifest.dfm)) throw IoError("DFM file " + manifest.dfm.string() + " not found");
  const DFMSet dfms = load_dfm(manifest.dfm);
  const std::vector<double> thresholds =
      args.thresholds ? parse_thresholds(*args.thresholds) : manifest.thresholds;

  LoadOptions load = manifest.load;
  load.height = dfms.height;
  load.width = dfms.width;
  load.workers = args.workers;
  std::vector<DatasetEntry> datasets;
  for (const auto& d : manifest.datasets) {
    DatasetEntry entry;
    entry.name = d.name;
    entry.role = d.role;
    entry.data = load_folder_dataset(d.path, load);
    print_warnings(entry.data);
    if (d.aliases) entry.aliases = load_aliases(*d.aliases);
    datasets.push_back(std::move(entry));
  }
  std::optional<ImageShape> shape = datasets.front().data.shape();
  ClassifierEndpoint endpoint = open_endpoint(manifest.endpoint, shape);

  prepare_output_dir(args.out, args.overwrite);
  progress("evaluating " + std::to_string(datasets.size()) + " datasets");
  const EvaluationRun run = evaluate_datasets(endpoint, dfms, datasets, thresholds, args.workers);
  for (const auto& d : run.datasets) {
    for (const auto& name : d.unmatched_classes) {
      warn("dataset '" + d.name + "': class '" + name + "' has no DFM; excluded");
    }
  }
  write_run_outputs(run, args.out);
  progress("wrote " + args.out.string());
  return 0;
}

int cmd_report(const ReportArgs& args) {
  EvaluationRun run = rebuild_run(args.run);
  if (args.thresholds) {
    run.thresholds = parse_thresholds(*args.thresholds);
    for (const auto& d : run.datasets) {
      if (d.role == DatasetRole::kIdTest) run.grouping = classify_groups(d.tpr_dfm, run.thresholds);
    }
    for (auto& d : run.datasets) d.report = summarize(run.grouping, d.tpr, d.tpr_dfm);
  }
  prepare_output_dir(args.out, args.overwrite);
  for (const auto& d : run.datasets) {
    write_report_tsv(d.report, run.class_names, run.config_hash, args.out / (d.name + ".report.tsv"));
    write_plot_data(d.report, run.config_hash, args.out / (d.name + ".plot.tsv"));
  }
  const auto rows = compare_groups(run);
  write_comparison_tsv(rows, run.config_hash, args.out / "comparison.tsv");
  write_grouping_tsv(run, args.out / "grouping.tsv");

  std::ostringstream summary;
  summary << "config_hash " << run.config_hash << "\n";
  summary << "endpoint " << run.endpoint_id << "\n";
  for (const auto& row : rows) {
    char line[256];
    std::snprintf(line, sizeof line, "%-24s t=%-4g sct=%zu non=%zu  avg_tpr_sct=%s avg_tpr_non_sct=%s",
                  row.dataset.c_str(), row.row.threshold, row.row.shortcut.size(),
                  row.row.non_shortcut.size(), format_value(row.row.tpr_sct).c_str(),
                  format_value(row.row.tpr_non_sct).c_str());
    summary << line << "\n";
  }
  write_file(args.out / "summary.txt", summary.str());
  progress("wrote " + args.out.string());
  return 0;
}

int cmd_serve(const ServeArgs& args) {
  if (args.endpoint.rfind("builtin:", 0) != 0) {
    throw ConfigError("serve needs a builtin:<file> endpoint");
  }
  const ClassifierEndpoint endpoint = load_builtin_endpoint(args.endpoint.substr(8));
  struct EndpointClassifier final : Classifier {
    const ClassifierEndpoint* e;
    int class_count() const override { return e->class_count(); }
    ImageShape input_shape() const override { return e->input_shape(); }
    Logits predict(std::span<const ImageTensor> batch) const override {
      return e->predict_logits(batch);
    }
  } model;
  model.e = &endpoint;
  Transport stdio(::dup(STDIN_FILENO), ::dup(STDOUT_FILENO));
  const std::size_t answered = serve_stream(stdio, model);
  progress("answered " + std::to_string(answered) + " frames");
  return 0;
}

int cmd_reference(const ReferenceArgs& args) {
  const ImageShape shape = parse_shape(args.shape);
  if (args.classes < 1) throw ConfigError("--classes must be positive");
  const ReferenceLinearModel model =
      args.identity ? ReferenceLinearModel::identity(shape, args.classes)
                    : ReferenceLinearModel::random(shape, args.classes, args.seed, args.scale);
  save_classifier(model, args.out);
  return 0;
}

}  // namespace hfss::cli
