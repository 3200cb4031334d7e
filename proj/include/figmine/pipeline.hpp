#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "figmine/config.hpp"
#include "figmine/manifest.hpp"

namespace figmine::pipeline {

struct StageCounts {
  std::uint64_t articles_requested = 0;
  std::uint64_t articles_parsed = 0;
  std::uint64_t articles_failed = 0;
  std::uint64_t figures = 0;
  std::uint64_t figures_with_images = 0;
  std::uint64_t subfigures_before_filter = 0;
  std::uint64_t subfigures_after_filter = 0;
  std::uint64_t modality_ct = 0;
  std::uint64_t modality_cxr = 0;
  std::uint64_t modality_other = 0;
  std::uint64_t mentions_positive = 0;
  std::uint64_t mentions_negated = 0;
};

struct ArticleOutcome {
  std::string pmcid;
  bool ok = false;
  std::string detail;  // fetch/parse failure reason, or per-stage counts
};

struct RunSummary {
  StageCounts counts;
  std::vector<ArticleOutcome> outcomes;  // input order
  std::vector<manifest::ManifestEntry> entries;
};

nlohmann::ordered_json summary_to_json(const RunSummary& summary);

/// Full pipeline: ingest -> link -> split -> filter -> classify -> mine ->
/// report. Writes manifest.jsonl/csv, report.json, the two report SVGs, and
/// run_summary.json under config.out_dir. Individual article failures are
/// recorded and skipped. Identical config + fixtures + seed produce
/// byte-identical outputs.
RunSummary run_pipeline(const config::PipelineConfig& config);

}  // namespace figmine::pipeline
