#pragma once

#include <array>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

namespace figmine::manifest {

struct MentionSummary {
  std::string term;
  std::string category;  // symptom | finding
  std::string polarity;  // positive | negated
  std::string source;    // caption | referring_text
  int count = 1;

  bool operator==(const MentionSummary&) const = default;
};

struct ManifestEntry {
  std::string pmcid;
  std::string doi;
  std::string title;
  std::string journal;
  std::string pub_date;
  std::string license;
  int figure_number = 0;
  int subfigure_index = 0;
  std::string image_path;  // relative to the manifest's directory
  int width = 0;
  int height = 0;
  std::string modality;          // CT | CXR | Other
  std::array<double, 3> probs{};  // CT, CXR, Other
  std::string caption;
  std::string referring_text;    // passages joined with "\n\n"
  std::vector<MentionSummary> mentions;

  bool operator==(const ManifestEntry&) const = default;
};

/// Field names in serialization order, shared by JSONL keys and CSV columns.
const std::vector<std::string>& manifest_field_names();

nlohmann::ordered_json entry_to_json(const ManifestEntry& entry);
ManifestEntry entry_from_json(const nlohmann::json& j);

void write_jsonl(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
void write_csv(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_jsonl(const std::filesystem::path& path);
std::vector<ManifestEntry> read_csv(const std::filesystem::path& path);

struct Violation {
  int line = 0;  // 1-based manifest line (JSONL) or row (CSV, header = 1)
  std::string message;
};

struct ValidationReport {
  std::size_t entries_checked = 0;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks entry invariants (224 filter, modality vocabulary, prob simplex),
/// duplicate (pmcid, figure, subfigure) keys, and — when check_images is set —
/// that each image exists and decodes to the recorded dimensions.
ValidationReport validate_manifest(const std::filesystem::path& manifest_path,
                                   bool check_images = true, int min_panel = 224);

}  // namespace figmine::manifest
