#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "actionscore/ledger.hpp"
#include "actionscore/trace.hpp"

namespace actionscore {

enum class Direction { hardest, easiest };

std::string_view direction_name(Direction direction);

// Bucket for table samples with no label map entry in class_stats.
inline constexpr std::string_view kUnlabeledBucket = "∅";

struct RankEntry {
  std::int64_t rank = 0;  // 1-based
  std::string sample;
  double action = 0.0;
  std::optional<std::string> label;
};

struct RankReport {
  std::string component;  // a table component or "total"
  Direction direction = Direction::hardest;
  std::int64_t k = 0;           // requested k
  std::int64_t population = 0;  // rows carrying this component
  std::vector<RankEntry> entries;
};

// Figure-style caption: "<label-or-sample> <score at one decimal>".
std::string caption(const RankEntry& entry);

// Top-k (hardest: descending) or bottom-k (easiest: ascending) by action.
// Ties break by ascending sample id byte order. k beyond the population
// returns all rows.
RankReport rank(const ActionTable& table, const std::string& component,
                Direction direction, std::int64_t k,
                const LabelMap* labels = nullptr);

struct LabelStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double median = 0.0;
  double min = 0.0;
  double max = 0.0;
};

struct ClassStats {
  std::string component;
  std::int64_t labeled_samples = 0;
  std::map<std::string, LabelStats> per_label;  // unlabeled under kUnlabeledBucket
};

// Per-label action summaries; requires at least one labeled sample in the
// table.
ClassStats class_stats(const ActionTable& table, const LabelMap& labels,
                       const std::string& component);

struct LabelEnrichment {
  std::int64_t class_count = 0;   // m: label size in the population
  std::int64_t k_in_extreme = 0;  // observed in the extreme-k set
  double expected = 0.0;          // k * m / N
  double ratio = 0.0;             // k_in_extreme / expected
  double p_value = 1.0;           // hypergeometric upper tail P[X >= k_obs]
};

struct EnrichmentReport {
  std::string component;
  Direction direction = Direction::hardest;
  std::int64_t k = 0;
  std::int64_t population = 0;
  std::map<std::string, LabelEnrichment> per_label;
};

// Class over-representation among the extreme-k samples under the
// hypergeometric null. Every table sample must be labeled; requires
// 1 <= k <= population.
EnrichmentReport extreme_enrichment(const ActionTable& table,
                                    const LabelMap& labels,
                                    const std::string& component,
                                    Direction direction, std::int64_t k);

}  // namespace actionscore
