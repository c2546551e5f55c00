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

#include "hfss/search.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "hfss/container.hpp"
#include "hfss/error.hpp"
#include "hfss/random.hpp"
#include "hfss/worker_pool.hpp"

namespace hfss {
namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr std::string_view kDfmMagic = "HFSS-DFM 1";
constexpr std::uint64_t kSharedTag = 0;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void report(const SearchOptions& options, const std::string& line) {
  if (options.progress) options.progress(line);
}

std::vector<std::vector<std::size_t>> class_indices(const PreparedImages& eval_set, int classes) {
  std::vector<std::vector<std::size_t>> out(classes);
  std::vector<std::string> missing;
  for (int c = 0; c < classes; ++c) {
    out[c] = eval_set.indices_of(c);
    if (out[c].empty()) missing.push_back(std::to_string(c));
  }
  if (!missing.empty()) {
    std::string list;
    for (const auto& m : missing) list += (list.empty() ? "" : ", ") + m;
    throw DataError("evaluation set has no images for class(es) " + list);
  }
  return out;
}

void record_trace(SearchTrace* trace, int stage, int c, std::vector<double> losses,
                  std::vector<std::size_t> selected) {
  if (trace == nullptr) return;
  StageClassTrace entry;
  entry.stage = stage;
  entry.class_index = c;
  entry.best = best_loss_curve(losses, SearchTrace::kMaxTracePoints);
  entry.candidate_losses = std::move(losses);
  entry.selected = std::move(selected);
  trace->entries.push_back(std::move(entry));
}

void check_loss(double loss, int stage, std::size_t index) {
  if (!std::isfinite(loss) || loss < 0.0) {
    throw DataError("stage " + std::to_string(stage) + " candidate " + std::to_string(index) +
                    " produced a non-finite loss");
  }
}

}  // namespace

std::optional<std::size_t> DFMSet::find_class(std::string_view name) const {
  for (std::size_t i = 0; i < class_names.size(); ++i) {
    if (class_names[i] == name) return i;
  }
  return std::nullopt;
}

std::vector<std::pair<std::size_t, double>> best_loss_curve(std::span<const double> losses,
                                                            std::size_t limit) {
  std::vector<double> running(losses.size());
  double best = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    best = i == 0 ? losses[i] : std::min(best, losses[i]);
    running[i] = best;
  }
  std::vector<std::pair<std::size_t, double>> out;
  const std::size_t n = running.size();
  if (n == 0 || limit == 0) return out;
  if (n <= limit || limit == 1) {
    if (limit == 1) return {{n, running.back()}};
    for (std::size_t i = 0; i < n; ++i) out.emplace_back(i + 1, running[i]);
    return out;
  }
  out.reserve(limit);
  for (std::size_t j = 0; j < limit; ++j) {
    const std::size_t i = j * (n - 1) / (limit - 1);
    out.emplace_back(i + 1, running[i]);
  }
  return out;
}

std::vector<std::size_t> rank_lowest(std::span<const double> values, std::size_t n) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  order.resize(std::min(n, order.size()));
  return order;
}

RankedCandidates run_stage_one(const SearchConfig& config, const ClassifierEndpoint& endpoint,
                               const PreparedImages& eval_set, const SearchOptions& options,
                               SearchTrace* trace) {
  config.validate();
  if (eval_set.size() == 0) throw DataError("evaluation set is empty");
  const ImageShape shape = eval_set.image(0).shape();
  config.validate_for(shape.height, shape.width);
  const int classes = endpoint.class_count();
  class_indices(eval_set, classes);

  const StagePlan& plan = config.stages.front();
  const auto grid = build_grid(shape.height, shape.width, plan.patch_size, true);
  const double base = base_count_in(FrequencyMask::ones(shape.height, shape.width), plan.patch_size);
  std::vector<std::size_t> all(eval_set.size());
  std::iota(all.begin(), all.end(), std::size_t{0});

  const std::size_t count = static_cast<std::size_t>(plan.candidate_count);
  std::vector<CandidateRecord> records(count);
  parallel_for(count, options.workers, [&](std::size_t i) {
    auto rng = RandomStream::derived(config.seed, {1, kSharedTag, i});
    CandidateRecord rec;
    rec.mask = sample_subset(grid, base, plan.sampling_fraction, rng, shape.height, shape.width);
    rec.mask.set_provenance(MaskProvenance{1, std::nullopt});
    const auto losses = evaluate_classes(endpoint, eval_set, all, &rec.mask).mean_loss();
    rec.losses.resize(classes);
    for (int c = 0; c < classes; ++c) {
      rec.losses[c] = *losses[c];
      check_loss(rec.losses[c], 1, i);
    }
    rec.stage = 1;
    rec.index = i;
    records[i] = std::move(rec);
  });

  const std::size_t keep = static_cast<std::size_t>(plan.parent_fanout);
  RankedCandidates ranked(classes);
  for (int c = 0; c < classes; ++c) {
    std::vector<double> losses(count);
    for (std::size_t i = 0; i < count; ++i) losses[i] = records[i].losses[c];
    auto top = rank_lowest(losses, keep);
    for (std::size_t i : top) ranked[c].push_back(records[i]);
    record_trace(trace, 1, c, std::move(losses), std::move(top));
  }
  return ranked;
}

RankedCandidates run_refinement_stage(const StagePlan& plan, const RankedCandidates& parents,
                                      const ClassifierEndpoint& endpoint,
                                      const PreparedImages& eval_set, std::uint64_t seed,
                                      bool final_stage, const SearchOptions& options,
                                      SearchTrace* trace) {
  const int classes = endpoint.class_count();
  if (parents.size() != static_cast<std::size_t>(classes)) {
    throw ConfigError("refinement needs parents for every class");
  }
  for (int c = 0; c < classes; ++c) {
    if (parents[c].empty()) throw ConfigError("class " + std::to_string(c) + " has no parents");
  }
  if (eval_set.size() == 0) throw DataError("evaluation set is empty");
  const ImageShape shape = eval_set.image(0).shape();
  if (shape.height % plan.patch_size != 0 || shape.width % plan.patch_size != 0) {
    throw ConfigError("patch size " + std::to_string(plan.patch_size) + " does not divide " +
                      std::to_string(shape.height) + "x" + std::to_string(shape.width));
  }
  const auto by_class = class_indices(eval_set, classes);
  const auto grid = build_grid(shape.height, shape.width, plan.patch_size, true);

  // eligible sets per (class, parent slot)
  std::vector<std::vector<std::vector<PatchPosition>>> eligible(classes);
  std::vector<std::vector<double>> base(classes);
  for (int c = 0; c < classes; ++c) {
    for (const auto& parent : parents[c]) {
      eligible[c].push_back(eligible_patches(grid, parent.mask));
      base[c].push_back(base_count_in(parent.mask, plan.patch_size));
    }
  }

  const int stage = plan.stage_index;
  const std::size_t budget = static_cast<std::size_t>(plan.candidate_count);
  std::vector<CandidateRecord> records(static_cast<std::size_t>(classes) * budget);
  parallel_for(records.size(), options.workers, [&](std::size_t task) {
    const int c = static_cast<int>(task / budget);
    const std::size_t i = task % budget;
    auto rng = RandomStream::derived(seed, {static_cast<std::uint64_t>(stage),
                                            static_cast<std::uint64_t>(c) + 1, i});
    std::optional<FrequencyMask> mask;
    std::size_t slot = 0;
    for (std::size_t attempt = 0; attempt <= budget && !mask; ++attempt) {
      slot = rng.uniform_index(parents[c].size());
      if (eligible[c][slot].empty()) continue;
      try {
        mask = sample_subset(eligible[c][slot], base[c][slot], plan.sampling_fraction, rng,
                             shape.height, shape.width);
      } catch (const SamplingError&) {
      }
    }
    if (!mask) {
      throw SamplingError("stage " + std::to_string(stage) + ", class " + std::to_string(c) +
                          ": no parent admits a " + std::to_string(plan.patch_size) +
                          "-bin patch sample after " + std::to_string(budget) + " retries");
    }
    const CandidateRecord& parent = parents[c][slot];
    CandidateRecord rec;
    rec.mask = std::move(*mask);
    rec.mask.set_provenance(MaskProvenance{stage, parent.index});
    const auto losses = evaluate_classes(endpoint, eval_set, by_class[c], &rec.mask).mean_loss();
    rec.losses = {*losses[c]};
    check_loss(rec.losses[0], stage, i);
    rec.stage = stage;
    rec.class_index = c;
    rec.parent_id = parent.index;
    rec.index = i;
    records[task] = std::move(rec);
  });

  const std::size_t keep = final_stage ? 1 : static_cast<std::size_t>(plan.parent_fanout);
  RankedCandidates ranked(classes);
  for (int c = 0; c < classes; ++c) {
    std::vector<double> losses(budget);
    for (std::size_t i = 0; i < budget; ++i) losses[i] = records[c * budget + i].losses[0];
    auto top = rank_lowest(losses, keep);
    for (std::size_t i : top) {
      CandidateRecord rec = records[c * budget + i];
      const auto parent = std::find_if(parents[c].begin(), parents[c].end(), [&](const auto& p) {
        return p.index == *rec.parent_id;
      });
      rec.lineage = parent->lineage;
      rec.lineage.push_back(parent->index);
      rec.ancestors = parent->ancestors;
      rec.ancestors.push_back(parent->mask);
      ranked[c].push_back(std::move(rec));
    }
    record_trace(trace, stage, c, std::move(losses), std::move(top));
  }
  return ranked;
}

SearchResult run_search(const SearchConfig& config, const ClassifierEndpoint& endpoint,
                        const PreparedImages& eval_set, std::span<const std::string> class_names,
                        const SearchOptions& options) {
  config.validate();
  if (eval_set.size() == 0) throw DataError("evaluation set is empty");
  const ImageShape shape = eval_set.image(0).shape();
  config.validate_for(shape.height, shape.width);
  if (shape != endpoint.input_shape()) {
    throw ConfigError("evaluation images are " + shape.to_string() + " but the endpoint expects " +
                      endpoint.input_shape().to_string());
  }
  const int classes = endpoint.class_count();
  if (!class_names.empty() && class_names.size() != static_cast<std::size_t>(classes)) {
    throw ConfigError("class name count does not match the endpoint's class count");
  }

  SearchResult result;
  SearchTrace& trace = result.trace;
  const std::size_t before = endpoint.images_processed();
  const auto start = Clock::now();

  auto stage_start = Clock::now();
  RankedCandidates ranked = run_stage_one(config, endpoint, eval_set, options, &trace);
  trace.stage_seconds.push_back(seconds_since(stage_start));
  report(options, "stage 1/" + std::to_string(config.stages.size()) + " done (" +
                      std::to_string(config.stages[0].candidate_count) + " candidates)");

  for (std::size_t s = 1; s < config.stages.size(); ++s) {
    stage_start = Clock::now();
    const bool final_stage = s + 1 == config.stages.size();
    ranked = run_refinement_stage(config.stages[s], ranked, endpoint, eval_set, config.seed,
                                  final_stage, options, &trace);
    trace.stage_seconds.push_back(seconds_since(stage_start));
    report(options, "stage " + std::to_string(s + 1) + "/" + std::to_string(config.stages.size()) +
                        " done (" + std::to_string(config.stages[s].candidate_count) +
                        " candidates per class)");
  }

  trace.wall_seconds = seconds_since(start);
  trace.images_processed = endpoint.images_processed() - before;
  trace.expected_images = eval_set.size() * config.total_candidates();

  DFMSet& dfms = result.dfms;
  dfms.height = shape.height;
  dfms.width = shape.width;
  dfms.config_hash = config.hash();
  dfms.seed = config.seed;
  for (const auto& plan : config.stages) dfms.patch_sizes.push_back(plan.patch_size);
  for (int c = 0; c < classes; ++c) {
    dfms.class_names.push_back(class_names.empty() ? std::to_string(c) : class_names[c]);
    const CandidateRecord& best = ranked[c].front();
    ClassDFM dfm;
    dfm.mask = best.mask;
    dfm.loss = best.losses.front();
    dfm.lineage = best.lineage;
    dfm.lineage.push_back(best.index);
    dfm.ancestors = best.ancestors;
    dfms.classes.push_back(std::move(dfm));
  }
  return result;
}

std::vector<std::size_t> select_eval_subset(std::span<const int> labels,
                                            std::span<const std::size_t> wanted,
                                            std::uint64_t seed,
                                            std::span<const std::string> class_names) {
  std::vector<std::vector<std::size_t>> pools(wanted.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const int c = labels[i];
    if (c >= 0 && static_cast<std::size_t>(c) < pools.size()) pools[c].push_back(i);
  }
  std::string deficient;
  for (std::size_t c = 0; c < wanted.size(); ++c) {
    if (pools[c].size() < wanted[c]) {
      const std::string name = c < class_names.size() ? class_names[c] : std::to_string(c);
      deficient += (deficient.empty() ? "" : ", ") + name + " (" + std::to_string(pools[c].size()) +
                   " < " + std::to_string(wanted[c]) + ")";
    }
  }
  if (!deficient.empty()) throw DataError("not enough training images for: " + deficient);

  std::vector<std::size_t> out;
  for (std::size_t c = 0; c < wanted.size(); ++c) {
    auto rng = RandomStream::derived(seed, {0x5e1ec7, c});
    auto& pool = pools[c];
    for (std::size_t k = 0; k < wanted[c]; ++k) {
      const std::size_t j = k + rng.uniform_index(pool.size() - k);
      std::swap(pool[k], pool[j]);
      out.push_back(pool[k]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string pack_mask_rows(const FrequencyMask& mask) {
  const std::size_t row_bytes = (static_cast<std::size_t>(mask.width()) + 7) / 8;
  std::string out(row_bytes * mask.height(), '\0');
  for (int u = 0; u < mask.height(); ++u) {
    for (int v = 0; v < mask.width(); ++v) {
      if (mask.test(u, v)) out[u * row_bytes + v / 8] |= static_cast<char>(0x80u >> (v % 8));
    }
  }
  return out;
}

FrequencyMask unpack_mask_rows(std::string_view bytes, int height, int width) {
  const std::size_t row_bytes = (static_cast<std::size_t>(width) + 7) / 8;
  if (bytes.size() != row_bytes * height) throw IoError("packed mask has the wrong size");
  FrequencyMask mask(height, width);
  for (int u = 0; u < height; ++u) {
    for (int v = 0; v < width; ++v) {
      const auto byte = static_cast<unsigned char>(bytes[u * row_bytes + v / 8]);
      if (byte & (0x80u >> (v % 8))) mask.set(u, v);
    }
  }
  return mask;
}

std::string encode_dfm(const DFMSet& dfms) {
  json classes = json::array();
  std::string body;
  for (std::size_t c = 0; c < dfms.classes.size(); ++c) {
    const ClassDFM& dfm = dfms.classes[c];
    classes.push_back({{"name", dfms.class_names.at(c)},
                       {"final_loss", dfm.loss},
                       {"coverage", dfm.mask.coverage()},
                       {"lineage", dfm.lineage},
                       {"ancestors", dfm.ancestors.size()}});
    body += pack_mask_rows(dfm.mask);
    for (const auto& a : dfm.ancestors) body += pack_mask_rows(a);
  }
  json header = {{"height", dfms.height},        {"width", dfms.width},
                 {"config_hash", dfms.config_hash}, {"seed", dfms.seed},
                 {"patch_sizes", dfms.patch_sizes}, {"classes", classes},
                 {"bit_order", "rows-msb-first"}};
  return encode_headered({std::string(kDfmMagic), header.dump(), body});
}

DFMSet decode_dfm(std::string_view bytes) {
  const auto file = decode_headered(bytes, kDfmMagic);
  DFMSet dfms;
  try {
    const json header = json::parse(file.header_json);
    dfms.height = header.at("height").get<int>();
    dfms.width = header.at("width").get<int>();
    dfms.config_hash = header.at("config_hash").get<std::string>();
    dfms.seed = header.at("seed").get<std::uint64_t>();
    dfms.patch_sizes = header.at("patch_sizes").get<std::vector<int>>();
    if (dfms.height <= 0 || dfms.width <= 0) throw IoError("DFM file has invalid dimensions");
    const std::size_t mask_bytes = (static_cast<std::size_t>(dfms.width) + 7) / 8 * dfms.height;
    std::size_t offset = 0;
    auto next_mask = [&]() {
      if (offset + mask_bytes > file.body.size()) throw IoError("DFM file body is truncated");
      auto mask = unpack_mask_rows(std::string_view(file.body).substr(offset, mask_bytes),
                                   dfms.height, dfms.width);
      offset += mask_bytes;
      return mask;
    };
    for (const auto& entry : header.at("classes")) {
      dfms.class_names.push_back(entry.at("name").get<std::string>());
      ClassDFM dfm;
      dfm.loss = entry.at("final_loss").get<double>();
      dfm.lineage = entry.at("lineage").get<std::vector<std::size_t>>();
      dfm.mask = next_mask();
      const auto ancestors = entry.at("ancestors").get<std::size_t>();
      for (std::size_t a = 0; a < ancestors; ++a) dfm.ancestors.push_back(next_mask());
      dfms.classes.push_back(std::move(dfm));
    }
    if (offset != file.body.size()) throw IoError("DFM file has trailing bytes");
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed DFM header: ") + e.what());
  }
  return dfms;
}

void save_dfm(const DFMSet& dfms, const std::filesystem::path& path) {
  write_file(path, encode_dfm(dfms));
}

DFMSet load_dfm(const std::filesystem::path& path) {
  try {
    return decode_dfm(read_file(path));
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

void write_trace_tsv(const SearchTrace& trace, std::span<const std::string> class_names,
                     const std::string& config_hash, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "stage\tclass\tcandidates\tbest_loss\n";
  char buf[64];
  for (const auto& entry : trace.entries) {
    const std::string name = static_cast<std::size_t>(entry.class_index) < class_names.size()
                                 ? class_names[entry.class_index]
                                 : std::to_string(entry.class_index);
    for (const auto& [n, loss] : entry.best) {
      std::snprintf(buf, sizeof buf, "%.17g", loss);
      out << entry.stage << '\t' << name << '\t' << n << '\t' << buf << '\n';
    }
  }
  write_file(path, out.str());
}

void write_timing_summary(const SearchTrace& trace, const SearchConfig& config,
                          std::size_t eval_size, const std::filesystem::path& path) {
  json summary = {{"config_hash", config.hash()},
                  {"seed", config.seed},
                  {"eval_images", eval_size},
                  {"candidates_total", config.total_candidates()},
                  {"expected_images", trace.expected_images},
                  {"images_processed", trace.images_processed},
                  {"wall_seconds", trace.wall_seconds},
                  {"stage_seconds", trace.stage_seconds}};
  write_file(path, summary.dump(2) + "\n");
}

}  // namespace hfss
