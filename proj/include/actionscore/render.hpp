#pragma once

#include <string>

#include "actionscore/analysis.hpp"
#include "actionscore/trace.hpp"

namespace actionscore {

// Human-readable fixed-width renderings. Full precision lives in the
// machine-readable lines; text output shows 6 significant digits plus the
// one-decimal figure captions.
std::string render_validation_summary(const ValidationSummary& summary);
std::string render_rank_report(const RankReport& report);
std::string render_class_stats(const ClassStats& stats);
std::string render_enrichment(const EnrichmentReport& report);

// Line-delimited objects mirroring each report type, one per entry, numbers
// at 17 significant digits.
std::string rank_report_lines(const RankReport& report);
std::string class_stats_lines(const ClassStats& stats);
std::string enrichment_lines(const EnrichmentReport& report);

}  // namespace actionscore
