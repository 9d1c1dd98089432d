#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "actionscore/common.hpp"
#include "actionscore/trace.hpp"

namespace actionscore {

enum class ScoreMode { sum, mean };
enum class CoverageRule { allow, require_full };

struct FinalizePolicy {
  ScoreMode mode = ScoreMode::sum;          // sum is the action score proper
  CoverageRule coverage = CoverageRule::allow;
};

std::string_view score_mode_name(ScoreMode mode);
std::string_view coverage_rule_name(CoverageRule rule);

struct EpochLoss {
  std::int64_t epoch = 0;
  double loss = 0.0;
};

// Sum of losses in ascending-epoch order; the pure form of the action score
// and the oracle for the streaming ledger. Throws on empty input, duplicate
// epochs, or non-finite losses.
double action_score(std::span<const EpochLoss> losses);

// Finalized per-sample scores. Rows and components iterate in ascending byte
// order, which is also the canonical summation order for totals.
struct SampleActions {
  std::map<std::string, double> per_component;
  double total = 0.0;
  std::int64_t epochs_observed = 0;
};

struct ActionTable {
  FinalizePolicy policy;
  std::vector<std::string> components;  // ascending, no "total"
  std::map<std::string, SampleActions> rows;

  bool has_component(const std::string& name) const;
};

// Streaming per-(sample, component) accumulator with epoch bookkeeping.
// A value type: move it between threads, shard it, merge the shards.
class ActionLedger {
 public:
  // Adds one record. The (epoch, sample, component) key must be new.
  void accumulate(const TraceRecord& record);

  bool empty() const { return cells_.empty(); }
  std::size_t sample_count() const { return cells_.size(); }
  const std::set<std::string>& components_seen() const { return components_seen_; }
  const std::set<std::int64_t>& epochs_seen() const { return epochs_seen_; }

  bool contains(const std::string& sample, const std::string& component,
                std::int64_t epoch) const;

  // Left-to-right sum in ingestion order for one key; 0 record count when the
  // key is absent.
  double running_sum(const std::string& sample,
                     const std::string& component) const;
  std::size_t record_count(const std::string& sample,
                           const std::string& component) const;

  // Per-component action per policy; total = sum of per-component actions in
  // ascending component order; all sums re-run in ascending-epoch order, so
  // equal ledger contents finalize bit-identically regardless of how the
  // records were sharded or interleaved.
  ActionTable finalize(FinalizePolicy policy) const;

  friend ActionLedger merge(const ActionLedger& a, const ActionLedger& b);

 private:
  struct Cell {
    double running_sum = 0.0;
    std::map<std::int64_t, double> losses;  // epoch -> loss
  };

  std::map<std::string, std::map<std::string, Cell>> cells_;  // sample -> component
  std::set<std::string> components_seen_;
  std::set<std::int64_t> epochs_seen_;
};

// Disjoint union of two ledgers; any shared (epoch, sample, component) key is
// an error naming one witness.
ActionLedger merge(const ActionLedger& a, const ActionLedger& b);

// ActionTable file (.acts): a header line echoing the policy, then one line
// per sample in ascending id order:
//   {"s":"<id>","a":{"<component>":<num>,...},"t":<num>,"n":<epochs_observed>}
void write_action_table(std::ostream& out, const ActionTable& table);
ActionTable read_action_table(std::istream& in);

}  // namespace actionscore
