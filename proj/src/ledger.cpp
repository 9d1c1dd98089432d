#include "actionscore/ledger.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>

#include <json.hpp>

namespace actionscore {

namespace {

using nlohmann::json;

std::string key_name(const std::string& sample, const std::string& component,
                     std::int64_t epoch) {
  return "(epoch " + std::to_string(epoch) + ", sample \"" + sample +
         "\", component \"" + component + "\")";
}

}  // namespace

std::string_view score_mode_name(ScoreMode mode) {
  return mode == ScoreMode::sum ? "sum" : "mean";
}

std::string_view coverage_rule_name(CoverageRule rule) {
  return rule == CoverageRule::allow ? "allow" : "full";
}

double action_score(std::span<const EpochLoss> losses) {
  if (losses.empty()) throw Error("action_score: empty loss sequence");
  std::vector<EpochLoss> ordered(losses.begin(), losses.end());
  std::sort(ordered.begin(), ordered.end(),
            [](const EpochLoss& a, const EpochLoss& b) { return a.epoch < b.epoch; });
  double sum = 0.0;
  for (std::size_t i = 0; i < ordered.size(); ++i) {
    if (i > 0 && ordered[i].epoch == ordered[i - 1].epoch) {
      throw Error("action_score: duplicate epoch " +
                  std::to_string(ordered[i].epoch));
    }
    if (!std::isfinite(ordered[i].loss)) {
      throw Error("action_score: non-finite loss at epoch " +
                  std::to_string(ordered[i].epoch));
    }
    sum += ordered[i].loss;
  }
  return sum;
}

bool ActionTable::has_component(const std::string& name) const {
  if (name == kTotalComponent) return true;
  return std::find(components.begin(), components.end(), name) !=
         components.end();
}

void ActionLedger::accumulate(const TraceRecord& record) {
  validate_record(record);
  Cell& cell = cells_[record.sample][record.component];
  auto [it, inserted] = cell.losses.emplace(record.epoch, record.loss);
  if (!inserted) {
    throw Error("duplicate record " +
                key_name(record.sample, record.component, record.epoch));
  }
  cell.running_sum += record.loss;
  components_seen_.insert(record.component);
  epochs_seen_.insert(record.epoch);
}

bool ActionLedger::contains(const std::string& sample,
                            const std::string& component,
                            std::int64_t epoch) const {
  auto sit = cells_.find(sample);
  if (sit == cells_.end()) return false;
  auto cit = sit->second.find(component);
  if (cit == sit->second.end()) return false;
  return cit->second.losses.contains(epoch);
}

double ActionLedger::running_sum(const std::string& sample,
                                 const std::string& component) const {
  auto sit = cells_.find(sample);
  if (sit == cells_.end()) return 0.0;
  auto cit = sit->second.find(component);
  return cit == sit->second.end() ? 0.0 : cit->second.running_sum;
}

std::size_t ActionLedger::record_count(const std::string& sample,
                                       const std::string& component) const {
  auto sit = cells_.find(sample);
  if (sit == cells_.end()) return 0;
  auto cit = sit->second.find(component);
  return cit == sit->second.end() ? 0 : cit->second.losses.size();
}

ActionTable ActionLedger::finalize(FinalizePolicy policy) const {
  if (empty()) throw Error("finalize: ledger is empty");

  if (policy.coverage == CoverageRule::require_full) {
    std::vector<std::string> offenders;
    std::size_t offender_count = 0;
    for (const auto& [sample, comps] : cells_) {
      for (const auto& component : components_seen_) {
        auto cit = comps.find(component);
        const std::size_t have =
            cit == comps.end() ? 0 : cit->second.losses.size();
        if (have != epochs_seen_.size()) {
          ++offender_count;
          if (offenders.size() < 10) {
            offenders.push_back("(\"" + sample + "\", \"" + component +
                                "\"): " + std::to_string(have) + " of " +
                                std::to_string(epochs_seen_.size()) +
                                " epochs");
          }
        }
      }
    }
    if (offender_count > 0) {
      std::string msg = "finalize: coverage violation for " +
                        std::to_string(offender_count) + " (sample, component) pair" +
                        (offender_count == 1 ? "" : "s") + ":";
      for (const auto& o : offenders) msg += "\n  " + o;
      if (offender_count > offenders.size()) msg += "\n  ...";
      throw Error(msg);
    }
  }

  ActionTable table;
  table.policy = policy;
  table.components.assign(components_seen_.begin(), components_seen_.end());

  for (const auto& [sample, comps] : cells_) {
    SampleActions row;
    std::set<std::int64_t> epochs_union;
    for (const auto& [component, cell] : comps) {
      double sum = 0.0;
      for (const auto& [epoch, loss] : cell.losses) {  // ascending epoch
        sum += loss;
        epochs_union.insert(epoch);
      }
      const double action = policy.mode == ScoreMode::mean
                                ? sum / static_cast<double>(cell.losses.size())
                                : sum;
      if (!std::isfinite(action)) {
        throw Error("finalize: action overflow for sample \"" + sample +
                    "\", component \"" + component + "\"");
      }
      row.per_component[component] = action;
    }
    for (const auto& [component, action] : row.per_component) {
      row.total += action;  // ascending component order
    }
    if (!std::isfinite(row.total)) {
      throw Error("finalize: total action overflow for sample \"" + sample +
                  "\"");
    }
    row.epochs_observed = static_cast<std::int64_t>(epochs_union.size());
    table.rows.emplace(sample, std::move(row));
  }
  return table;
}

ActionLedger merge(const ActionLedger& a, const ActionLedger& b) {
  ActionLedger merged = a;
  for (const auto& [sample, comps] : b.cells_) {
    auto& dst_comps = merged.cells_[sample];
    for (const auto& [component, cell] : comps) {
      auto& dst = dst_comps[component];
      for (const auto& [epoch, loss] : cell.losses) {
        if (!dst.losses.emplace(epoch, loss).second) {
          throw Error("merge: overlapping key " +
                      key_name(sample, component, epoch));
        }
      }
      dst.running_sum += cell.running_sum;
    }
  }
  merged.components_seen_.insert(b.components_seen_.begin(),
                                 b.components_seen_.end());
  merged.epochs_seen_.insert(b.epochs_seen_.begin(), b.epochs_seen_.end());
  return merged;
}

void write_action_table(std::ostream& out, const ActionTable& table) {
  out << "{\"h\":1,\"policy\":\"" << score_mode_name(table.policy.mode)
      << "\",\"coverage\":\"" << coverage_rule_name(table.policy.coverage)
      << "\",\"components\":[";
  for (std::size_t i = 0; i < table.components.size(); ++i) {
    if (i > 0) out << ",";
    out << "\"" << table.components[i] << "\"";
  }
  out << "]}\n";
  for (const auto& [sample, row] : table.rows) {
    out << "{\"s\":" << json(sample).dump() << ",\"a\":{";
    bool first = true;
    for (const auto& [component, action] : row.per_component) {
      if (!first) out << ",";
      first = false;
      out << "\"" << component << "\":" << format_double17(action);
    }
    out << "},\"t\":" << format_double17(row.total) << ",\"n\":"
        << row.epochs_observed << "}\n";
  }
  if (!out) throw Error("action table write failure");
}

ActionTable read_action_table(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    throw Error("missing action table header");
  }
  json h = json::parse(line, nullptr, false);
  if (h.is_discarded() || !h.is_object() || h.value("h", 0) != 1) {
    throw Error("malformed action table header");
  }

  ActionTable table;
  const std::string mode = h.value("policy", "sum");
  if (mode == "sum") {
    table.policy.mode = ScoreMode::sum;
  } else if (mode == "mean") {
    table.policy.mode = ScoreMode::mean;
  } else {
    throw Error("unknown policy \"" + mode + "\" in action table header");
  }
  const std::string coverage = h.value("coverage", "allow");
  if (coverage == "allow") {
    table.policy.coverage = CoverageRule::allow;
  } else if (coverage == "full") {
    table.policy.coverage = CoverageRule::require_full;
  } else {
    throw Error("unknown coverage \"" + coverage + "\" in action table header");
  }
  auto comps = h.find("components");
  if (comps == h.end() || !comps->is_array()) {
    throw Error("action table header has no \"components\" array");
  }
  for (const auto& c : *comps) {
    if (!c.is_string() || !is_valid_component_name(c.get<std::string>())) {
      throw Error("action table header has an invalid component name");
    }
    table.components.push_back(c.get<std::string>());
  }
  std::sort(table.components.begin(), table.components.end());

  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      throw Error("line " + std::to_string(line_no) +
                  ": malformed action table row");
    }
    try {
      SampleActions row;
      const std::string sample = j.at("s").get<std::string>();
      if (!is_valid_sample_id(sample)) {
        throw Error("invalid sample id");
      }
      const json& actions = j.at("a");
      if (!actions.is_object()) throw Error("\"a\" is not an object");
      for (const auto& [component, value] : actions.items()) {
        if (!table.has_component(component) ||
            component == kTotalComponent) {
          throw Error("component \"" + component +
                      "\" is not declared in the table header");
        }
        if (!value.is_number() || !std::isfinite(value.get<double>())) {
          throw Error("action is not a finite number");
        }
        row.per_component[component] = value.get<double>();
      }
      row.total = j.at("t").get<double>();
      if (!std::isfinite(row.total)) {
        throw Error("total is not a finite number");
      }
      row.epochs_observed = j.at("n").get<std::int64_t>();
      if (!table.rows.emplace(sample, std::move(row)).second) {
        throw Error("duplicate row for sample \"" + sample + "\"");
      }
    } catch (const json::exception& e) {
      throw Error("line " + std::to_string(line_no) +
                  ": malformed action table row: " + e.what());
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (table.rows.empty()) throw Error("action table has no rows");
  return table;
}

}  // namespace actionscore
