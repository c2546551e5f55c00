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

#include "hfss/metrics.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "hfss/container.hpp"
#include "hfss/error.hpp"

namespace hfss {
namespace {

std::optional<double> mean_of(const ClassValues& values, const std::vector<int>& members) {
  if (members.empty()) return std::nullopt;
  double sum = 0.0;
  for (int c : members) sum += *values[c];
  return sum / static_cast<double>(members.size());
}

std::string join(const std::vector<int>& ids, std::span<const std::string> names) {
  std::string out;
  for (int c : ids) {
    if (!out.empty()) out += ',';
    out += static_cast<std::size_t>(c) < names.size() ? names[c] : std::to_string(c);
  }
  return out.empty() ? "-" : out;
}

std::optional<double> parse_value(const std::string& text, const std::string& where) {
  if (text == "NA") return std::nullopt;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc() || ptr != text.data() + text.size()) {
    throw IoError("bad number '" + text + "' in " + where);
  }
  return v;
}

std::string format_threshold(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", t);
  return buf;
}

}  // namespace

std::vector<double> default_thresholds() {
  std::vector<double> out;
  for (int i = 1; i <= 9; ++i) out.push_back(i / 10.0);
  return out;
}

std::vector<double> parse_thresholds(std::string_view text) {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) {
    double t = 0.0;
    auto [ptr, ec] = std::from_chars(item.data(), item.data() + item.size(), t);
    if (ec != std::errc() || ptr != item.data() + item.size() || !(t > 0.0 && t < 1.0)) {
      throw ConfigError("threshold '" + item + "' is not a number in (0, 1)");
    }
    if (!out.empty() && t <= out.back()) throw ConfigError("thresholds must be increasing");
    out.push_back(t);
  }
  if (out.empty()) throw ConfigError("no thresholds given");
  return out;
}

Grouping classify_groups(const ClassValues& tpr_dfm, std::span<const double> thresholds) {
  Grouping g;
  g.thresholds.assign(thresholds.begin(), thresholds.end());
  g.classes = tpr_dfm.size();
  for (std::size_t c = 0; c < tpr_dfm.size(); ++c) {
    if (!tpr_dfm[c]) g.undefined.push_back(static_cast<int>(c));
  }
  for (double t : thresholds) {
    auto& sct = g.shortcut.emplace_back();
    auto& non = g.non_shortcut.emplace_back();
    for (std::size_t c = 0; c < tpr_dfm.size(); ++c) {
      if (!tpr_dfm[c]) continue;
      (*tpr_dfm[c] > t ? sct : non).push_back(static_cast<int>(c));
    }
  }
  return g;
}

ShortcutReport summarize(const Grouping& grouping, const ClassValues& tpr,
                         const ClassValues& tpr_dfm) {
  if (tpr.size() != grouping.classes || tpr_dfm.size() != grouping.classes) {
    throw ConfigError("TPR vectors have " + std::to_string(tpr.size()) + "/" +
                      std::to_string(tpr_dfm.size()) + " entries, grouping has " +
                      std::to_string(grouping.classes) + " classes");
  }
  auto defined = [&](int c) { return tpr[c].has_value() && tpr_dfm[c].has_value(); };
  ShortcutReport report;
  for (std::size_t c = 0; c < grouping.classes; ++c) {
    if (!defined(static_cast<int>(c))) report.undefined.push_back(static_cast<int>(c));
  }
  for (std::size_t i = 0; i < grouping.thresholds.size(); ++i) {
    ThresholdRow row;
    row.threshold = grouping.thresholds[i];
    for (int c : grouping.shortcut[i]) {
      if (defined(c)) row.shortcut.push_back(c);
    }
    for (int c : grouping.non_shortcut[i]) {
      if (defined(c)) row.non_shortcut.push_back(c);
    }
    row.tpr_sct = mean_of(tpr, row.shortcut);
    row.tpr_dfm_sct = mean_of(tpr_dfm, row.shortcut);
    row.tpr_non_sct = mean_of(tpr, row.non_shortcut);
    row.tpr_dfm_non_sct = mean_of(tpr_dfm, row.non_shortcut);
    row.dfm_exceeds_full = row.tpr_sct && *row.tpr_dfm_sct > *row.tpr_sct;
    report.rows.push_back(std::move(row));
  }
  return report;
}

ShortcutReport group_and_average(const ClassValues& tpr, const ClassValues& tpr_dfm,
                                 std::span<const double> thresholds) {
  if (tpr.size() != tpr_dfm.size()) {
    throw ConfigError("TPR and TPR^DFM vectors differ in length");
  }
  return summarize(classify_groups(tpr_dfm, thresholds), tpr, tpr_dfm);
}

std::vector<std::vector<std::size_t>> shortcut_class_counts(
    std::span<const ShortcutReport> reports) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& report : reports) {
    auto& row = out.emplace_back();
    for (const auto& r : report.rows) row.push_back(r.shortcut.size());
  }
  return out;
}

std::string format_value(const std::optional<double>& value) {
  if (!value) return "NA";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", *value);
  return buf;
}

void write_report_tsv(const ShortcutReport& report, std::span<const std::string> class_names,
                      const std::string& config_hash, const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "# undefined=" << join(report.undefined, class_names) << "\n";
  out << "threshold\tn_sct\tn_non_sct\tavg_tpr_sct\tavg_tpr_dfm_sct\tavg_tpr_non_sct\t"
         "avg_tpr_dfm_non_sct\tdfm_exceeds_full\tshortcut_classes\n";
  for (const auto& r : report.rows) {
    out << format_threshold(r.threshold) << '\t' << r.shortcut.size() << '\t'
        << r.non_shortcut.size() << '\t' << format_value(r.tpr_sct) << '\t'
        << format_value(r.tpr_dfm_sct) << '\t' << format_value(r.tpr_non_sct) << '\t'
        << format_value(r.tpr_dfm_non_sct) << '\t' << (r.dfm_exceeds_full ? 1 : 0) << '\t'
        << join(r.shortcut, class_names) << '\n';
  }
  write_file(path, out.str());
}

void write_plot_data(const ShortcutReport& report, const std::string& config_hash,
                     const std::filesystem::path& path) {
  std::ostringstream out;
  out << "# config_hash=" << config_hash << "\n";
  out << "threshold\tavg_tpr_sct\tavg_tpr_dfm_sct\tavg_tpr_non_sct\tavg_tpr_dfm_non_sct\t"
         "size_sct\tsize_non_sct\n";
  for (const auto& r : report.rows) {
    out << format_threshold(r.threshold) << '\t' << format_value(r.tpr_sct) << '\t'
        << format_value(r.tpr_dfm_sct) << '\t' << format_value(r.tpr_non_sct) << '\t'
        << format_value(r.tpr_dfm_non_sct) << '\t' << r.shortcut.size() << '\t'
        << r.non_shortcut.size() << '\n';
  }
  write_file(path, out.str());
}

void write_class_tpr(const ClassTprTable& table, const std::filesystem::path& path) {
  if (table.tpr.size() != table.class_names.size() ||
      table.tpr_dfm.size() != table.class_names.size()) {
    throw ConfigError("class TPR table columns differ in length");
  }
  std::ostringstream out;
  out << "# config_hash=" << table.config_hash << "\n";
  out << "class\ttpr\ttpr_dfm\n";
  for (std::size_t c = 0; c < table.class_names.size(); ++c) {
    out << table.class_names[c] << '\t' << format_value(table.tpr[c]) << '\t'
        << format_value(table.tpr_dfm[c]) << '\n';
  }
  write_file(path, out.str());
}

ClassTprTable read_class_tpr(const std::filesystem::path& path) {
  std::istringstream in(read_file(path));
  ClassTprTable table;
  std::string line;
  const std::string where = path.string();
  if (!std::getline(in, line) || line.rfind("# config_hash=", 0) != 0) {
    throw IoError(where + " lacks a config hash line");
  }
  table.config_hash = line.substr(14);
  if (!std::getline(in, line) || line != "class\ttpr\ttpr_dfm") {
    throw IoError(where + " has an unexpected column header");
  }
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream fields(line);
    std::string name, a, b;
    if (!std::getline(fields, name, '\t') || !std::getline(fields, a, '\t') ||
        !std::getline(fields, b, '\t')) {
      throw IoError(where + ": malformed row '" + line + "'");
    }
    table.class_names.push_back(name);
    table.tpr.push_back(parse_value(a, where));
    table.tpr_dfm.push_back(parse_value(b, where));
  }
  return table;
}

}  // namespace hfss
