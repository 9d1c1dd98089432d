#include "gallery.hpp"

#include <set>

#include <json.hpp>

namespace actionscore {

namespace {

GalleryEntry make_entry(const char* row, std::int64_t rank,
                        const RankEntry& ranked, const LabelMap* labels) {
  GalleryEntry entry;
  entry.row = row;
  entry.rank = rank;
  entry.sample = ranked.sample;
  entry.label = ranked.label.value_or("");
  entry.score_display = format_score_1dp(ranked.action);
  if (labels != nullptr) {
    if (const LabelEntry* le = labels->find(ranked.sample)) {
      entry.asset_path = le->asset_path;
    }
  }
  return entry;
}

}  // namespace

GalleryManifest build_gallery(const ActionTable& table,
                              const std::string& component, std::int64_t k,
                              const LabelMap* labels) {
  GalleryManifest manifest;
  manifest.component = component;
  manifest.requested_k = k;

  const RankReport hardest =
      rank(table, component, Direction::hardest, k, labels);
  std::set<std::string> taken;
  for (const auto& e : hardest.entries) {
    taken.insert(e.sample);
    manifest.entries.push_back(
        make_entry("hardest", e.rank, e, labels));
  }
  manifest.hardest_count = static_cast<std::int64_t>(hardest.entries.size());

  // Full ascending order, then skip anything already shown as hardest.
  const RankReport easiest =
      rank(table, component, Direction::easiest, hardest.population, labels);
  std::int64_t placed = 0;
  for (const auto& e : easiest.entries) {
    if (placed == k) break;
    if (taken.contains(e.sample)) continue;
    manifest.entries.push_back(make_entry("easiest", ++placed, e, labels));
  }
  manifest.easiest_count = placed;
  return manifest;
}

std::string gallery_lines(const GalleryManifest& manifest) {
  std::string out;
  for (const auto& e : manifest.entries) {
    out += "{\"row\":\"" + e.row + "\",\"rank\":" + std::to_string(e.rank) +
           ",\"s\":" + nlohmann::json(e.sample).dump() +
           ",\"y\":" + nlohmann::json(e.label).dump() + ",\"score\":\"" +
           e.score_display + "\",\"asset\":" +
           nlohmann::json(e.asset_path).dump() + "}\n";
  }
  return out;
}

}  // namespace actionscore
