#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actionscore/common.hpp"

namespace actionscore {

// One (epoch, sample, component, loss) observation. The triple
// (epoch, sample, component) is the unique key within a trace.
struct TraceRecord {
  std::int64_t epoch = 0;
  std::string sample;
  std::string component;
  double loss = 0.0;

  bool operator==(const TraceRecord&) const = default;
};

struct TraceHeader {
  int format_version = 1;
  std::string run_id;
  std::string split;
  std::vector<std::string> declared_components;
  std::string label_map_path;  // empty = none declared
};

// Throw Error on any invariant violation (non-finite loss, bad id, bad
// component name, negative epoch).
void validate_record(const TraceRecord& record);
void validate_header(const TraceHeader& header);

// Wire format (.aclt), one UTF-8 object per '\n'-terminated line:
//   {"h":1,"run":"<run_id>","split":"<split>","components":["c1",...]}
//   {"e":<int>,"s":"<id>","c":"<component>","l":<number>}
// Losses are rendered with 17 significant digits so decode(encode(r)) == r
// bit-exactly. Returned lines carry no trailing newline.
std::string encode_record(const TraceRecord& record);
std::string encode_header(const TraceHeader& header);

// Unknown extra fields are ignored (forward compatibility).
TraceRecord decode_record(std::string_view line);
TraceHeader decode_header(std::string_view line);

// Append-only trace writer usable from any training loop. Single-writer
// contract: concurrent producers must write separate shard files.
class TraceWriter {
 public:
  // Validates and writes the header line immediately.
  TraceWriter(std::ostream& out, TraceHeader header);

  // Validates, encodes and appends one record. Stream failures throw.
  void append(const TraceRecord& record);

  const TraceHeader& header() const { return header_; }
  std::int64_t records_written() const { return records_; }

 private:
  std::ostream& out_;
  TraceHeader header_;
  std::int64_t records_ = 0;
};

// Streaming reader: header is consumed by the constructor, records by next().
// Malformed lines throw Error with the 1-based line number.
class TraceReader {
 public:
  explicit TraceReader(std::istream& in);

  std::optional<TraceRecord> next();

  const TraceHeader& header() const { return header_; }
  std::int64_t line() const { return line_; }

 private:
  std::istream& in_;
  TraceHeader header_;
  std::int64_t line_ = 0;
};

struct DuplicateRecord {
  std::int64_t epoch = 0;
  std::string sample;
  std::string component;
  std::int64_t first_line = 0;
  std::int64_t duplicate_line = 0;
};

struct MalformedLine {
  std::int64_t line = 0;
  std::string message;
};

struct ComponentRange {
  std::int64_t records = 0;  // unique keys only; duplicates are not re-counted
  std::int64_t epoch_min = 0;
  std::int64_t epoch_max = 0;
};

struct ValidationSummary {
  std::string fatal;  // nonempty: missing or unparseable header
  TraceHeader header;
  std::int64_t total_records = 0;
  std::int64_t distinct_samples = 0;
  std::map<std::string, ComponentRange> per_component;
  std::vector<DuplicateRecord> duplicates;
  std::vector<MalformedLine> malformed;
  std::vector<std::string> warnings;  // e.g. incomplete epoch coverage

  bool valid() const {
    return fatal.empty() && duplicates.empty() && malformed.empty();
  }
};

// Scans a whole trace. A trace is valid iff the header parses and there are
// zero duplicates and zero malformed lines. Incomplete epoch coverage is a
// warning only, so any prefix of a valid trace still validates.
ValidationSummary validate_trace(std::istream& in);

// Label map (.aclm): {"s":"<id>","y":"<label>"} with optional "asset".
struct LabelEntry {
  std::string label;
  std::string asset_path;  // empty = none
};

struct LabelMap {
  std::map<std::string, LabelEntry> entries;

  const LabelEntry* find(const std::string& sample) const {
    auto it = entries.find(sample);
    return it == entries.end() ? nullptr : &it->second;
  }
};

LabelMap load_label_map(std::istream& in);
void save_label_map(std::ostream& out, const LabelMap& labels);

}  // namespace actionscore
