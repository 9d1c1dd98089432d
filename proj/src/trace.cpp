#include "actionscore/trace.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <set>
#include <tuple>
#include <utility>

#include <json.hpp>

namespace actionscore {

namespace {

using nlohmann::json;

std::string quote(std::string_view text) {
  return json(text).dump();
}

json parse_object(std::string_view line, const char* what) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded() || !j.is_object()) {
    throw Error(std::string("malformed ") + what + ": not a JSON object");
  }
  return j;
}

std::int64_t require_int(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(std::string("malformed ") + what + ": missing \"" + key + "\"");
  }
  if (!it->is_number_integer() && !it->is_number_unsigned()) {
    throw Error(std::string("malformed ") + what + ": \"" + key +
                "\" is not an integer");
  }
  return it->get<std::int64_t>();
}

std::string require_string(const json& j, const char* key, const char* what) {
  auto it = j.find(key);
  if (it == j.end()) {
    throw Error(std::string("malformed ") + what + ": missing \"" + key + "\"");
  }
  if (!it->is_string()) {
    throw Error(std::string("malformed ") + what + ": \"" + key +
                "\" is not a string");
  }
  return it->get<std::string>();
}

}  // namespace

void validate_record(const TraceRecord& record) {
  if (record.epoch < 0) {
    throw Error("negative epoch " + std::to_string(record.epoch) +
                " for sample " + quote(record.sample));
  }
  if (!is_valid_sample_id(record.sample)) {
    throw Error("invalid sample id " + quote(record.sample) +
                " (non-empty, no whitespace, at most 256 bytes)");
  }
  if (!is_valid_component_name(record.component)) {
    throw Error("invalid component name " + quote(record.component) +
                " (must match [a-z0-9_]{1,64}; \"total\" is reserved)");
  }
  if (!std::isfinite(record.loss)) {
    throw Error("non-finite loss for sample " + quote(record.sample) +
                " at epoch " + std::to_string(record.epoch));
  }
}

void validate_header(const TraceHeader& header) {
  if (header.format_version != 1) {
    throw Error("unsupported format_version " +
                std::to_string(header.format_version));
  }
  if (header.declared_components.empty()) {
    throw Error("header declares no components");
  }
  std::set<std::string> seen;
  for (const auto& c : header.declared_components) {
    if (!is_valid_component_name(c)) {
      throw Error("header declares invalid component name " + quote(c));
    }
    if (!seen.insert(c).second) {
      throw Error("header declares duplicate component " + quote(c));
    }
  }
}

std::string encode_record(const TraceRecord& record) {
  validate_record(record);
  std::string line = "{\"e\":";
  line += std::to_string(record.epoch);
  line += ",\"s\":";
  line += quote(record.sample);
  line += ",\"c\":\"";
  line += record.component;  // [a-z0-9_] needs no escaping
  line += "\",\"l\":";
  line += format_double17(record.loss);
  line += "}";
  return line;
}

std::string encode_header(const TraceHeader& header) {
  validate_header(header);
  std::string line = "{\"h\":";
  line += std::to_string(header.format_version);
  line += ",\"run\":";
  line += quote(header.run_id);
  line += ",\"split\":";
  line += quote(header.split);
  line += ",\"components\":[";
  for (std::size_t i = 0; i < header.declared_components.size(); ++i) {
    if (i > 0) line += ",";
    line += "\"" + header.declared_components[i] + "\"";
  }
  line += "]";
  if (!header.label_map_path.empty()) {
    line += ",\"labels\":" + quote(header.label_map_path);
  }
  line += "}";
  return line;
}

TraceRecord decode_record(std::string_view line) {
  const json j = parse_object(line, "record");
  TraceRecord record;
  record.epoch = require_int(j, "e", "record");
  record.sample = require_string(j, "s", "record");
  record.component = require_string(j, "c", "record");
  auto it = j.find("l");
  if (it == j.end()) throw Error("malformed record: missing \"l\"");
  if (!it->is_number()) throw Error("malformed record: \"l\" is not a number");
  record.loss = it->get<double>();
  validate_record(record);
  return record;
}

TraceHeader decode_header(std::string_view line) {
  const json j = parse_object(line, "header");
  if (!j.contains("h")) {
    throw Error("malformed header: missing \"h\"");
  }
  TraceHeader header;
  header.format_version = static_cast<int>(require_int(j, "h", "header"));
  header.run_id = require_string(j, "run", "header");
  header.split = require_string(j, "split", "header");
  auto comps = j.find("components");
  if (comps == j.end() || !comps->is_array()) {
    throw Error("malformed header: missing \"components\" array");
  }
  for (const auto& c : *comps) {
    if (!c.is_string()) {
      throw Error("malformed header: component name is not a string");
    }
    header.declared_components.push_back(c.get<std::string>());
  }
  if (auto labels = j.find("labels"); labels != j.end()) {
    if (!labels->is_string()) {
      throw Error("malformed header: \"labels\" is not a string");
    }
    header.label_map_path = labels->get<std::string>();
  }
  validate_header(header);
  return header;
}

TraceWriter::TraceWriter(std::ostream& out, TraceHeader header)
    : out_(out), header_(std::move(header)) {
  out_ << encode_header(header_) << '\n';
  if (!out_) throw Error("trace sink write failure while writing header");
}

void TraceWriter::append(const TraceRecord& record) {
  out_ << encode_record(record) << '\n';
  if (!out_) {
    throw Error("trace sink write failure at record " +
                std::to_string(records_ + 1));
  }
  ++records_;
}

TraceReader::TraceReader(std::istream& in) : in_(in) {
  std::string line;
  if (!std::getline(in_, line) || line.empty()) {
    throw Error("missing header");
  }
  line_ = 1;
  try {
    header_ = decode_header(line);
  } catch (const Error& e) {
    throw Error("line 1: " + std::string(e.what()));
  }
}

std::optional<TraceRecord> TraceReader::next() {
  std::string line;
  if (!std::getline(in_, line)) return std::nullopt;
  ++line_;
  try {
    return decode_record(line);
  } catch (const Error& e) {
    throw Error("line " + std::to_string(line_) + ": " + e.what());
  }
}

ValidationSummary validate_trace(std::istream& in) {
  ValidationSummary summary;

  std::string line;
  if (!std::getline(in, line) || line.empty()) {
    summary.fatal = "missing header";
    return summary;
  }
  try {
    summary.header = decode_header(line);
  } catch (const Error& e) {
    summary.fatal = e.what();
    return summary;
  }
  const std::set<std::string> declared(summary.header.declared_components.begin(),
                                       summary.header.declared_components.end());

  struct ComponentScan {
    std::set<std::string> samples;
    std::set<std::int64_t> epochs;
    std::int64_t unique_records = 0;
  };
  std::map<std::string, ComponentScan> scans;
  std::map<std::tuple<std::int64_t, std::string, std::string>, std::int64_t>
      first_seen;
  std::set<std::string> samples;

  std::int64_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    TraceRecord record;
    try {
      record = decode_record(line);
    } catch (const Error& e) {
      summary.malformed.push_back({line_no, e.what()});
      continue;
    }
    if (!declared.contains(record.component)) {
      summary.malformed.push_back(
          {line_no, "component \"" + record.component +
                        "\" is not declared in the header"});
      continue;
    }

    auto [it, inserted] = first_seen.try_emplace(
        {record.epoch, record.sample, record.component}, line_no);
    if (!inserted) {
      summary.duplicates.push_back({record.epoch, record.sample,
                                    record.component, it->second, line_no});
      continue;
    }

    ++summary.total_records;
    samples.insert(record.sample);
    auto& scan = scans[record.component];
    scan.samples.insert(record.sample);
    scan.epochs.insert(record.epoch);
    ++scan.unique_records;

    auto& range = summary.per_component[record.component];
    if (range.records == 0) {
      range.epoch_min = record.epoch;
      range.epoch_max = record.epoch;
    } else {
      range.epoch_min = std::min(range.epoch_min, record.epoch);
      range.epoch_max = std::max(range.epoch_max, record.epoch);
    }
    ++range.records;
  }
  summary.distinct_samples = static_cast<std::int64_t>(samples.size());

  for (const auto& [component, scan] : scans) {
    const std::int64_t full =
        static_cast<std::int64_t>(scan.samples.size()) *
        static_cast<std::int64_t>(scan.epochs.size());
    if (scan.unique_records < full) {
      summary.warnings.push_back(
          "component \"" + component + "\": epoch coverage incomplete (" +
          std::to_string(scan.unique_records) + " of " + std::to_string(full) +
          " sample-epoch pairs)");
    }
  }
  return summary;
}

LabelMap load_label_map(std::istream& in) {
  LabelMap labels;
  std::string line;
  std::int64_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = parse_object(line, "label entry");
      LabelEntry entry;
      const std::string sample = require_string(j, "s", "label entry");
      entry.label = require_string(j, "y", "label entry");
      if (auto asset = j.find("asset"); asset != j.end()) {
        if (!asset->is_string()) {
          throw Error("malformed label entry: \"asset\" is not a string");
        }
        entry.asset_path = asset->get<std::string>();
      }
      if (!is_valid_sample_id(sample)) {
        throw Error("invalid sample id " + quote(sample));
      }
      if (!labels.entries.emplace(sample, std::move(entry)).second) {
        throw Error("duplicate label entry for sample " + quote(sample));
      }
    } catch (const Error& e) {
      throw Error("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return labels;
}

void save_label_map(std::ostream& out, const LabelMap& labels) {
  for (const auto& [sample, entry] : labels.entries) {
    out << "{\"s\":" << quote(sample) << ",\"y\":" << quote(entry.label);
    if (!entry.asset_path.empty()) {
      out << ",\"asset\":" << quote(entry.asset_path);
    }
    out << "}\n";
  }
  if (!out) throw Error("label map write failure");
}

}  // namespace actionscore
