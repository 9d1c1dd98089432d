#include "actionscore/render.hpp"

#include <cstdio>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace actionscore {

namespace {

using nlohmann::json;

std::string fmt6(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

// Two-space separated columns, each padded to its widest cell.
std::string layout(const std::vector<std::vector<std::string>>& rows) {
  std::vector<std::size_t> widths;
  for (const auto& row : rows) {
    if (widths.size() < row.size()) widths.resize(row.size(), 0);
    for (std::size_t i = 0; i < row.size(); ++i) {
      widths[i] = std::max(widths[i], row[i].size());
    }
  }
  std::string out;
  for (const auto& row : rows) {
    std::string line;
    for (std::size_t i = 0; i < row.size(); ++i) {
      line += row[i];
      if (i + 1 < row.size()) {
        line.append(widths[i] - row[i].size() + 2, ' ');
      }
    }
    out += line;
    out += '\n';
  }
  return out;
}

std::string quote(const std::string& text) { return json(text).dump(); }

}  // namespace

std::string render_validation_summary(const ValidationSummary& summary) {
  std::ostringstream out;
  if (!summary.fatal.empty()) {
    out << "fatal: " << summary.fatal << "\n";
    out << "status: INVALID\n";
    return out.str();
  }
  out << "run: " << summary.header.run_id
      << "  split: " << summary.header.split << "\n";
  out << "components declared:";
  for (const auto& c : summary.header.declared_components) out << " " << c;
  out << "\n";
  if (!summary.header.label_map_path.empty()) {
    out << "label map: " << summary.header.label_map_path << "\n";
  }
  out << "records: " << summary.total_records
      << "  distinct samples: " << summary.distinct_samples << "\n";
  for (const auto& [component, range] : summary.per_component) {
    out << "  " << component << ": records=" << range.records << " epochs=["
        << range.epoch_min << "," << range.epoch_max << "]\n";
  }
  out << "duplicates: " << summary.duplicates.size() << "\n";
  for (const auto& d : summary.duplicates) {
    out << "  (epoch " << d.epoch << ", sample \"" << d.sample
        << "\", component \"" << d.component << "\") first at line "
        << d.first_line << ", again at line " << d.duplicate_line << "\n";
  }
  out << "malformed lines: " << summary.malformed.size() << "\n";
  for (const auto& m : summary.malformed) {
    out << "  line " << m.line << ": " << m.message << "\n";
  }
  for (const auto& w : summary.warnings) {
    out << "warning: " << w << "\n";
  }
  out << "status: " << (summary.valid() ? "VALID" : "INVALID") << "\n";
  return out.str();
}

std::string render_rank_report(const RankReport& report) {
  std::ostringstream out;
  out << direction_name(report.direction) << " by " << report.component
      << ": k=" << report.k << " of " << report.population << "\n";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"rank", "sample", "label", "action", "caption"});
  for (const auto& e : report.entries) {
    rows.push_back({std::to_string(e.rank), e.sample,
                    e.label ? *e.label : "-", fmt6(e.action), caption(e)});
  }
  out << layout(rows);
  return out.str();
}

std::string render_class_stats(const ClassStats& stats) {
  std::ostringstream out;
  out << "class stats by " << stats.component << ": " << stats.labeled_samples
      << " labeled samples\n";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"label", "count", "mean", "median", "min", "max"});
  for (const auto& [label, ls] : stats.per_label) {
    rows.push_back({label, std::to_string(ls.count), fmt6(ls.mean),
                    fmt6(ls.median), fmt6(ls.min), fmt6(ls.max)});
  }
  out << layout(rows);
  return out.str();
}

std::string render_enrichment(const EnrichmentReport& report) {
  std::ostringstream out;
  out << "enrichment (" << direction_name(report.direction)
      << " k=" << report.k << ") by " << report.component << ": population "
      << report.population << "\n";
  std::vector<std::vector<std::string>> rows;
  rows.push_back({"label", "count", "k_obs", "expected", "ratio", "p_value"});
  for (const auto& [label, e] : report.per_label) {
    rows.push_back({label, std::to_string(e.class_count),
                    std::to_string(e.k_in_extreme), fmt6(e.expected),
                    fmt6(e.ratio), fmt6(e.p_value)});
  }
  out << layout(rows);
  return out.str();
}

std::string rank_report_lines(const RankReport& report) {
  std::string out;
  for (const auto& e : report.entries) {
    out += "{\"kind\":\"rank\",\"component\":\"" + report.component +
           "\",\"direction\":\"" + std::string(direction_name(report.direction)) +
           "\",\"rank\":" + std::to_string(e.rank) + ",\"s\":" + quote(e.sample) +
           ",\"a\":" + format_double17(e.action);
    if (e.label) out += ",\"y\":" + quote(*e.label);
    out += "}\n";
  }
  return out;
}

std::string class_stats_lines(const ClassStats& stats) {
  std::string out;
  for (const auto& [label, ls] : stats.per_label) {
    out += "{\"kind\":\"class_stats\",\"component\":\"" + stats.component +
           "\",\"y\":" + quote(label) + ",\"count\":" + std::to_string(ls.count) +
           ",\"mean\":" + format_double17(ls.mean) +
           ",\"median\":" + format_double17(ls.median) +
           ",\"min\":" + format_double17(ls.min) +
           ",\"max\":" + format_double17(ls.max) + "}\n";
  }
  return out;
}

std::string enrichment_lines(const EnrichmentReport& report) {
  std::string out;
  for (const auto& [label, e] : report.per_label) {
    out += "{\"kind\":\"enrichment\",\"component\":\"" + report.component +
           "\",\"direction\":\"" + std::string(direction_name(report.direction)) +
           "\",\"k\":" + std::to_string(report.k) +
           ",\"population\":" + std::to_string(report.population) +
           ",\"y\":" + quote(label) + ",\"m\":" + std::to_string(e.class_count) +
           ",\"k_obs\":" + std::to_string(e.k_in_extreme) +
           ",\"expected\":" + format_double17(e.expected) +
           ",\"ratio\":" + format_double17(e.ratio) +
           ",\"p\":" + format_double17(e.p_value) + "}\n";
  }
  return out;
}

}  // namespace actionscore
