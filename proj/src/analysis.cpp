#include "actionscore/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "actionscore/stats.hpp"

namespace actionscore {

namespace {

std::optional<double> row_action(const SampleActions& row,
                                 const std::string& component) {
  if (component == kTotalComponent) return row.total;
  auto it = row.per_component.find(component);
  if (it == row.per_component.end()) return std::nullopt;
  return it->second;
}

void require_component(const ActionTable& table, const std::string& component) {
  if (table.has_component(component)) return;
  std::string available = "total";
  for (const auto& c : table.components) available += ", " + c;
  throw Error("unknown component \"" + component + "\" (available: " +
              available + ")");
}

// All rows carrying the component, ordered per direction with ties broken by
// ascending sample id.
std::vector<std::pair<std::string, double>> ordered_actions(
    const ActionTable& table, const std::string& component,
    Direction direction) {
  std::vector<std::pair<std::string, double>> actions;
  actions.reserve(table.rows.size());
  for (const auto& [sample, row] : table.rows) {
    if (auto a = row_action(row, component)) actions.emplace_back(sample, *a);
  }
  std::stable_sort(actions.begin(), actions.end(),
                   [direction](const auto& a, const auto& b) {
                     if (a.second != b.second) {
                       return direction == Direction::hardest
                                  ? a.second > b.second
                                  : a.second < b.second;
                     }
                     return a.first < b.first;
                   });
  return actions;
}

}  // namespace

std::string_view direction_name(Direction direction) {
  return direction == Direction::hardest ? "hardest" : "easiest";
}

std::string caption(const RankEntry& entry) {
  const std::string& name = entry.label ? *entry.label : entry.sample;
  return name + " " + format_score_1dp(entry.action);
}

RankReport rank(const ActionTable& table, const std::string& component,
                Direction direction, std::int64_t k, const LabelMap* labels) {
  require_component(table, component);
  if (k < 1) throw Error("rank: k must be >= 1");

  auto actions = ordered_actions(table, component, direction);
  RankReport report;
  report.component = component;
  report.direction = direction;
  report.k = k;
  report.population = static_cast<std::int64_t>(actions.size());

  const std::size_t take =
      std::min<std::size_t>(actions.size(), static_cast<std::size_t>(k));
  report.entries.reserve(take);
  for (std::size_t i = 0; i < take; ++i) {
    RankEntry entry;
    entry.rank = static_cast<std::int64_t>(i + 1);
    entry.sample = actions[i].first;
    entry.action = actions[i].second;
    if (labels != nullptr) {
      if (const LabelEntry* le = labels->find(entry.sample)) {
        entry.label = le->label;
      }
    }
    report.entries.push_back(std::move(entry));
  }
  return report;
}

ClassStats class_stats(const ActionTable& table, const LabelMap& labels,
                       const std::string& component) {
  require_component(table, component);

  std::map<std::string, std::vector<double>> by_label;
  std::int64_t labeled = 0;
  for (const auto& [sample, row] : table.rows) {
    auto a = row_action(row, component);
    if (!a) continue;
    const LabelEntry* le = labels.find(sample);
    if (le != nullptr) {
      by_label[le->label].push_back(*a);
      ++labeled;
    } else {
      by_label[std::string(kUnlabeledBucket)].push_back(*a);
    }
  }
  if (labeled == 0) {
    throw Error("class_stats: no labeled sample appears in the table");
  }

  ClassStats stats;
  stats.component = component;
  stats.labeled_samples = labeled;
  for (auto& [label, values] : by_label) {
    std::sort(values.begin(), values.end());
    LabelStats ls;
    ls.count = static_cast<std::int64_t>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    ls.mean = sum / static_cast<double>(values.size());
    const std::size_t n = values.size();
    ls.median = (n % 2 == 1) ? values[n / 2]
                             : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    ls.min = values.front();
    ls.max = values.back();
    stats.per_label.emplace(label, ls);
  }
  return stats;
}

EnrichmentReport extreme_enrichment(const ActionTable& table,
                                    const LabelMap& labels,
                                    const std::string& component,
                                    Direction direction, std::int64_t k) {
  require_component(table, component);
  if (k < 1) throw Error("extreme_enrichment: k must be >= 1");

  auto actions = ordered_actions(table, component, direction);
  const std::int64_t population = static_cast<std::int64_t>(actions.size());
  if (k > population) {
    throw Error("extreme_enrichment: k=" + std::to_string(k) +
                " exceeds population " + std::to_string(population));
  }

  std::map<std::string, LabelEnrichment> per_label;
  for (std::int64_t i = 0; i < population; ++i) {
    const std::string& sample = actions[static_cast<std::size_t>(i)].first;
    const LabelEntry* le = labels.find(sample);
    if (le == nullptr) {
      throw Error("extreme_enrichment: sample \"" + sample + "\" is unlabeled");
    }
    auto& e = per_label[le->label];
    ++e.class_count;
    if (i < k) ++e.k_in_extreme;
  }

  for (auto& [label, e] : per_label) {
    e.expected = static_cast<double>(k) * static_cast<double>(e.class_count) /
                 static_cast<double>(population);
    e.ratio = static_cast<double>(e.k_in_extreme) / e.expected;
    e.p_value =
        hypergeom_upper_tail(population, e.class_count, k, e.k_in_extreme);
  }

  EnrichmentReport report;
  report.component = component;
  report.direction = direction;
  report.k = k;
  report.population = population;
  report.per_label = std::move(per_label);
  return report;
}

}  // namespace actionscore
