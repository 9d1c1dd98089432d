#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "actionscore/analysis.hpp"
#include "actionscore/ledger.hpp"
#include "actionscore/trace.hpp"

namespace actionscore {

// Figure-style manifest: a hardest row and an easiest row of k samples each.
// The rows never share a sample; when the table holds fewer than 2k samples
// the easiest row shrinks to whatever is left.
struct GalleryEntry {
  std::string row;  // "hardest" | "easiest"
  std::int64_t rank = 0;
  std::string sample;
  std::string label;          // empty when unknown
  std::string score_display;  // one-decimal caption score
  std::string asset_path;     // empty when the label map has none
};

struct GalleryManifest {
  std::string component;
  std::int64_t requested_k = 0;
  std::int64_t hardest_count = 0;
  std::int64_t easiest_count = 0;
  std::vector<GalleryEntry> entries;  // hardest row first, then easiest
};

GalleryManifest build_gallery(const ActionTable& table,
                              const std::string& component, std::int64_t k,
                              const LabelMap* labels);

// One JSON object per entry.
std::string gallery_lines(const GalleryManifest& manifest);

}  // namespace actionscore
