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

#include "hfss/harness.hpp"

#include <cstdio>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/worker_pool.hpp"

namespace hfss {
namespace fs = std::filesystem;
namespace {

using nlohmann::json;

std::string names_of(const std::vector<int>& ids, const std::vector<std::string>& names) {
  std::string out;
  for (int c : ids) out += (out.empty() ? "" : ",") + names[c];
  return out.empty() ? "-" : out;
}

const DatasetResult& id_result(const EvaluationRun& run) {
  for (const auto& d : run.datasets) {
    if (d.role == DatasetRole::kIdTest) return d;
  }
  throw ConfigError("run has no id-test dataset");
}

std::size_t id_index(const std::vector<DatasetRole>& roles) {
  std::optional<std::size_t> id;
  for (std::size_t i = 0; i < roles.size(); ++i) {
    if (roles[i] != DatasetRole::kIdTest) continue;
    if (id) throw ConfigError("more than one dataset has the id-test role");
    id = i;
  }
  if (!id) throw ConfigError("one dataset must have the id-test role");
  return *id;
}

}  // namespace

DatasetRole parse_role(std::string_view text) {
  if (text == "id-test") return DatasetRole::kIdTest;
  if (text == "ood-texture-preserving") return DatasetRole::kOodTexture;
  if (text == "ood-rendition") return DatasetRole::kOodRendition;
  if (text == "adversarial") return DatasetRole::kAdversarial;
  throw ConfigError("unknown dataset role '" + std::string(text) +
                    "' (id-test, ood-texture-preserving, ood-rendition, adversarial)");
}

std::string role_name(DatasetRole role) {
  switch (role) {
    case DatasetRole::kIdTest: return "id-test";
    case DatasetRole::kOodTexture: return "ood-texture-preserving";
    case DatasetRole::kOodRendition: return "ood-rendition";
    case DatasetRole::kAdversarial: return "adversarial";
  }
  return "?";
}

EvaluationRun evaluate_datasets(const ClassifierEndpoint& endpoint, const DFMSet& dfms,
                                const std::vector<DatasetEntry>& datasets,
                                std::span<const double> thresholds, int workers) {
  const std::size_t k = dfms.classes.size();
  if (static_cast<std::size_t>(endpoint.class_count()) != k) {
    throw ConfigError("endpoint has " + std::to_string(endpoint.class_count()) +
                      " classes but the DFM set has " + std::to_string(k));
  }
  std::vector<DatasetRole> roles;
  for (const auto& d : datasets) roles.push_back(d.role);
  const std::size_t id = id_index(roles);

  EvaluationRun run;
  run.endpoint_id = endpoint.id();
  run.config_hash = dfms.config_hash;
  run.class_names = dfms.class_names;
  run.thresholds.assign(thresholds.begin(), thresholds.end());

  std::vector<PreparedImages> prepared;
  for (const auto& entry : datasets) {
    DatasetResult result;
    result.name = entry.name;
    result.role = entry.role;
    std::vector<std::optional<int>> map(entry.data.class_names.size());
    bool any = false;
    for (std::size_t c = 0; c < map.size(); ++c) {
      std::string name = entry.data.class_names[c];
      if (auto it = entry.aliases.find(name); it != entry.aliases.end()) name = it->second;
      if (auto found = dfms.find_class(name)) {
        map[c] = static_cast<int>(*found);
        any = true;
      } else {
        result.unmatched_classes.push_back(entry.data.class_names[c]);
      }
    }
    if (!any) throw DataError("dataset '" + entry.name + "' shares no class with the DFM set");
    std::vector<ImageTensor> images;
    for (const auto& image : entry.data.images) {
      const auto target = map.at(static_cast<std::size_t>(*image.label()));
      if (!target) continue;
      if (image.height() != dfms.height || image.width() != dfms.width) {
        throw ConfigError("dataset '" + entry.name + "' images are " + image.shape().to_string() +
                          " but the DFMs are " + std::to_string(dfms.height) + "x" +
                          std::to_string(dfms.width));
      }
      ImageTensor copy = image;
      copy.set_label(*target);
      images.push_back(std::move(copy));
    }
    result.images = images.size();
    prepared.emplace_back(std::move(images));
    result.tpr.assign(k, std::nullopt);
    result.tpr_dfm.assign(k, std::nullopt);
    run.datasets.push_back(std::move(result));
  }

  // one task per (dataset, class), merged by position
  const std::size_t tasks = datasets.size() * k;
  parallel_for(tasks, workers, [&](std::size_t task) {
    const std::size_t d = task / k;
    const int c = static_cast<int>(task % k);
    const auto indices = prepared[d].indices_of(c);
    if (indices.empty()) return;
    const auto full = evaluate_classes(endpoint, prepared[d], indices, nullptr);
    const auto filtered = evaluate_classes(endpoint, prepared[d], indices, &dfms.classes[c].mask);
    run.datasets[d].tpr[c] = full.tpr()[c];
    run.datasets[d].tpr_dfm[c] = filtered.tpr()[c];
  });

  run.grouping = classify_groups(run.datasets[id].tpr_dfm, thresholds);
  for (auto& d : run.datasets) d.report = summarize(run.grouping, d.tpr, d.tpr_dfm);
  return run;
}

std::vector<ComparisonRow> compare_groups(const EvaluationRun& run) {
  const DatasetResult& id = id_result(run);
  std::vector<ComparisonRow> rows;
  for (const auto& d : run.datasets) {
    for (std::size_t i = 0; i < d.report.rows.size(); ++i) {
      ComparisonRow row;
      row.dataset = d.name;
      row.role = d.role;
      row.row = d.report.rows[i];
      const auto& r = row.row;
      if (r.tpr_sct && r.tpr_non_sct) {
        const double diff = *r.tpr_sct - *r.tpr_non_sct;
        row.sign = diff > 0.0 ? 1 : diff < 0.0 ? -1 : 0;
      }
      const auto& ref = id.report.rows[i];
      if (r.tpr_sct && ref.tpr_sct) row.delta_sct = *r.tpr_sct - *ref.tpr_sct;
      if (r.tpr_non_sct && ref.tpr_non_sct) row.delta_non_sct = *r.tpr_non_sct - *ref.tpr_non_sct;
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

void write_comparison_tsv(const std::vector<ComparisonRow>& rows, const std::string& config_hash,
                          const fs::path& path) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "dataset\trole\tthreshold\tn_sct\tn_non_sct\tavg_tpr_sct\tavg_tpr_dfm_sct\t"
         "avg_tpr_non_sct\tavg_tpr_dfm_non_sct\tsign\tdelta_sct_vs_id\tdelta_non_sct_vs_id\n";
  for (const auto& c : rows) {
    char t[32];
    std::snprintf(t, sizeof t, "%g", c.row.threshold);
    out << c.dataset << '\t' << role_name(c.role) << '\t' << t << '\t' << c.row.shortcut.size()
        << '\t' << c.row.non_shortcut.size() << '\t' << format_value(c.row.tpr_sct) << '\t'
        << format_value(c.row.tpr_dfm_sct) << '\t' << format_value(c.row.tpr_non_sct) << '\t'
        << format_value(c.row.tpr_dfm_non_sct) << '\t'
        << (c.sign ? (*c.sign > 0 ? "+" : *c.sign < 0 ? "-" : "0") : "NA") << '\t'
        << format_value(c.delta_sct) << '\t' << format_value(c.delta_non_sct) << '\n';
  }
  write_file(path, out.str());
}

void write_grouping_tsv(const EvaluationRun& run, const fs::path& path) {
  std::ostringstream out;
  out << "# config_hash=" << run.config_hash << "\n";
  out << "# undefined=" << names_of(run.grouping.undefined, run.class_names) << "\n";
  out << "threshold\tshortcut\tnon_shortcut\n";
  for (std::size_t i = 0; i < run.grouping.thresholds.size(); ++i) {
    char t[32];
    std::snprintf(t, sizeof t, "%g", run.grouping.thresholds[i]);
    out << t << '\t' << names_of(run.grouping.shortcut[i], run.class_names) << '\t'
        << names_of(run.grouping.non_shortcut[i], run.class_names) << '\n';
  }
  write_file(path, out.str());
}

std::map<std::string, std::string> load_aliases(const fs::path& path) {
  try {
    const json j = json::parse(read_file(path));
    if (!j.is_object()) throw ConfigError(path.string() + ": alias file must be a JSON object");
    return j.get<std::map<std::string, std::string>>();
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed alias file: " + e.what());
  }
}

RunManifest parse_run_manifest(std::string_view text, const fs::path& base_dir) {
  RunManifest m;
  auto resolve = [&](const std::string& p) {
    fs::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  try {
    const json j = json::parse(text);
    m.endpoint = j.at("endpoint").get<std::string>();
    if (m.endpoint.rfind("builtin:", 0) == 0) {
      m.endpoint = "builtin:" + resolve(m.endpoint.substr(8)).string();
    }
    m.dfm = resolve(j.at("dfm").get<std::string>());
    if (j.contains("thresholds")) {
      m.thresholds = j.at("thresholds").get<std::vector<double>>();
      for (std::size_t i = 0; i < m.thresholds.size(); ++i) {
        const double t = m.thresholds[i];
        if (!(t > 0.0 && t < 1.0) || (i > 0 && t <= m.thresholds[i - 1])) {
          throw ConfigError("manifest thresholds must be increasing values in (0, 1)");
        }
      }
    } else {
      m.thresholds = default_thresholds();
    }
    if (j.contains("image")) {
      const auto& img = j.at("image");
      m.load.height = img.value("height", m.load.height);
      m.load.width = img.value("width", m.load.width);
      m.load.channels = parse_channel_policy(img.value("channels", std::string("keep")));
      const std::string resize = img.value("resize", std::string("resize-crop"));
      if (resize == "resize-crop") {
        m.load.resize = ResizePolicy::kResizeCrop;
      } else if (resize == "center-crop") {
        m.load.resize = ResizePolicy::kCenterCrop;
      } else {
        throw ConfigError("unknown resize policy '" + resize + "' (resize-crop, center-crop)");
      }
    }
    std::set<std::string> names;
    for (const auto& d : j.at("datasets")) {
      ManifestDataset entry;
      entry.name = d.at("name").get<std::string>();
      if (entry.name.empty() || entry.name.find('/') != std::string::npos ||
          !names.insert(entry.name).second) {
        throw ConfigError("dataset names must be unique, non-empty and free of '/'");
      }
      entry.role = parse_role(d.at("role").get<std::string>());
      entry.path = resolve(d.at("path").get<std::string>());
      if (d.contains("aliases")) entry.aliases = resolve(d.at("aliases").get<std::string>());
      m.datasets.push_back(std::move(entry));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed run manifest: ") + e.what());
  }
  if (m.datasets.empty()) throw ConfigError("run manifest lists no datasets");
  return m;
}

void write_run_outputs(const EvaluationRun& run, const fs::path& dir) {
  json datasets = json::array();
  for (const auto& d : run.datasets) {
    write_class_tpr({run.config_hash, run.class_names, d.tpr, d.tpr_dfm},
                    dir / (d.name + ".class_tpr.tsv"));
    write_report_tsv(d.report, run.class_names, run.config_hash, dir / (d.name + ".report.tsv"));
    write_plot_data(d.report, run.config_hash, dir / (d.name + ".plot.tsv"));
    datasets.push_back({{"name", d.name},
                        {"role", role_name(d.role)},
                        {"images", d.images},
                        {"unmatched_classes", d.unmatched_classes},
                        {"class_tpr", d.name + ".class_tpr.tsv"}});
  }
  write_grouping_tsv(run, dir / "grouping.tsv");
  write_comparison_tsv(compare_groups(run), run.config_hash, dir / "comparison.tsv");
  const json manifest = {{"config_hash", run.config_hash},
                         {"endpoint", run.endpoint_id},
                         {"classes", run.class_names},
                         {"thresholds", run.thresholds},
                         {"datasets", datasets}};
  write_file(dir / "run.json", manifest.dump(2) + "\n");
}

EvaluationRun rebuild_run(const fs::path& run_dir) {
  EvaluationRun run;
  std::vector<DatasetRole> roles;
  try {
    const json j = json::parse(read_file(run_dir / "run.json"));
    run.config_hash = j.at("config_hash").get<std::string>();
    run.endpoint_id = j.at("endpoint").get<std::string>();
    run.class_names = j.at("classes").get<std::vector<std::string>>();
    run.thresholds = j.at("thresholds").get<std::vector<double>>();
    for (const auto& d : j.at("datasets")) {
      DatasetResult result;
      result.name = d.at("name").get<std::string>();
      result.role = parse_role(d.at("role").get<std::string>());
      result.images = d.at("images").get<std::size_t>();
      result.unmatched_classes = d.at("unmatched_classes").get<std::vector<std::string>>();
      const auto table = read_class_tpr(run_dir / d.at("class_tpr").get<std::string>());
      if (table.config_hash != run.config_hash) {
        throw ConfigError("refusing mixed inputs: " + result.name + " carries config hash " +
                          table.config_hash + ", run has " + run.config_hash);
      }
      if (table.class_names != run.class_names) {
        throw ConfigError(result.name + ": class list differs from the run's");
      }
      result.tpr = table.tpr;
      result.tpr_dfm = table.tpr_dfm;
      roles.push_back(result.role);
      run.datasets.push_back(std::move(result));
    }
  } catch (const json::exception& e) {
    throw IoError(run_dir.string() + "/run.json is malformed: " + e.what());
  }
  const std::size_t id = id_index(roles);
  run.grouping = classify_groups(run.datasets[id].tpr_dfm, run.thresholds);
  for (auto& d : run.datasets) d.report = summarize(run.grouping, d.tpr, d.tpr_dfm);
  return run;
}

}  // namespace hfss
