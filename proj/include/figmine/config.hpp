#pragma once

#include <map>
#include <optional>
#include <string>

#include "figmine/classifier.hpp"
#include "figmine/fetch.hpp"
#include "figmine/splitter.hpp"

namespace figmine::config {

/// Flat "section.key" -> raw string view of a TOML-style config file:
/// [section] headers, key = value lines, "#" comments, quoted strings,
/// numbers, booleans.
using KeyValueMap = std::map<std::string, std::string>;

KeyValueMap parse_config_file(const std::string& path);
KeyValueMap parse_config_text(const std::string& text, const std::string& origin);

struct PipelineConfig {
  // [source]
  fetch::SourceMode mode = fetch::SourceMode::fixture;
  std::string fixture_dir;
  std::string ids_file;
  std::string query;
  int query_max = 100;
  std::string api_base;
  std::string cache_dir;
  std::string images_dir;
  int rate_delay_ms = 350;

  // [split]
  split::SplitParams split_params;

  // [classifier]
  std::string model_path;
  std::string train_dir;
  classify::Hyperparams hyperparams;

  // [lexicon]
  std::string lexicon_path;
  std::string pre_triggers_path;
  std::string post_triggers_path;
  std::string terminators_path;
  int scope_window = 6;

  // [output]
  std::string out_dir;
  std::string cohort = "covid19";
  std::string compare_manifest;
  std::string compare_label = "comparison";

  // [run]
  std::uint64_t seed = 0;
  int workers = 0;  // 0 = hardware concurrency
  bool quiet = false;
  bool verbose = false;
};

PipelineConfig config_from_map(const KeyValueMap& map);
PipelineConfig load_config_file(const std::string& path);

/// Throws ConfigError unless exactly one article source and one classifier
/// source are specified, and the output dir is set.
void validate(const PipelineConfig& config);

}  // namespace figmine::config
