#include "figmine/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "figmine/errors.hpp"

namespace figmine::config {

namespace {

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return {};
  std::size_t end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

std::string parse_value(const std::string& raw, const std::string& where) {
  if (raw.empty()) return raw;
  if (raw.front() == '"') {
    if (raw.size() < 2 || raw.back() != '"') {
      raise(Errc::ConfigError, where + ": unterminated string");
    }
    std::string out;
    for (std::size_t i = 1; i + 1 < raw.size(); ++i) {
      if (raw[i] == '\\' && i + 2 < raw.size()) {
        ++i;
        switch (raw[i]) {
          case '"': out.push_back('"'); break;
          case '\\': out.push_back('\\'); break;
          case 'n': out.push_back('\n'); break;
          case 't': out.push_back('\t'); break;
          default: raise(Errc::ConfigError, where + ": unsupported escape");
        }
      } else {
        out.push_back(raw[i]);
      }
    }
    return out;
  }
  return raw;  // bare number / bool / path
}

}  // namespace

KeyValueMap parse_config_text(const std::string& text, const std::string& origin) {
  KeyValueMap map;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string where = origin + ":" + std::to_string(line_no);
    // strip comments outside of quotes
    bool in_quotes = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"' && (i == 0 || line[i - 1] != '\\')) in_quotes = !in_quotes;
      if (line[i] == '#' && !in_quotes) {
        line.erase(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) raise(Errc::ConfigError, where + ": bad section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) raise(Errc::ConfigError, where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) raise(Errc::ConfigError, where + ": empty key");
    const std::string value = parse_value(trim(line.substr(eq + 1)), where);
    map[section.empty() ? key : section + "." + key] = value;
  }
  return map;
}

KeyValueMap parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::ConfigError, "cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path);
}

namespace {

class MapReader {
 public:
  explicit MapReader(const KeyValueMap& map) : map_(map) {}

  std::string str(const std::string& key, std::string fallback = "") {
    consumed_.insert(key);
    auto it = map_.find(key);
    return it == map_.end() ? fallback : it->second;
  }

  double number(const std::string& key, double fallback) {
    consumed_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    try {
      std::size_t pos = 0;
      const double v = std::stod(it->second, &pos);
      if (pos != it->second.size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      raise(Errc::ConfigError, key + ": not a number: " + it->second);
    }
  }

  long integer(const std::string& key, long fallback) {
    const double v = number(key, static_cast<double>(fallback));
    const long i = static_cast<long>(v);
    if (static_cast<double>(i) != v) raise(Errc::ConfigError, key + ": expected an integer");
    return i;
  }

  bool boolean(const std::string& key, bool fallback) {
    consumed_.insert(key);
    auto it = map_.find(key);
    if (it == map_.end()) return fallback;
    if (it->second == "true") return true;
    if (it->second == "false") return false;
    raise(Errc::ConfigError, key + ": expected true or false");
  }

  void reject_unknown() const {
    for (const auto& [key, value] : map_) {
      if (!consumed_.count(key)) raise(Errc::ConfigError, "unknown config key: " + key);
    }
  }

 private:
  const KeyValueMap& map_;
  std::set<std::string> consumed_;
};

}  // namespace

PipelineConfig config_from_map(const KeyValueMap& map) {
  MapReader reader(map);
  PipelineConfig cfg;

  const std::string mode = reader.str("source.mode", "fixture");
  if (mode == "fixture") {
    cfg.mode = fetch::SourceMode::fixture;
  } else if (mode == "live") {
    cfg.mode = fetch::SourceMode::live;
  } else {
    raise(Errc::ConfigError, "source.mode must be fixture or live");
  }
  cfg.fixture_dir = reader.str("source.fixture_dir");
  cfg.ids_file = reader.str("source.ids");
  cfg.query = reader.str("source.query");
  cfg.query_max = static_cast<int>(reader.integer("source.query_max", 100));
  cfg.api_base = reader.str("source.api_base");
  cfg.cache_dir = reader.str("source.cache_dir");
  cfg.images_dir = reader.str("source.images_dir");
  cfg.rate_delay_ms = static_cast<int>(reader.integer("source.rate_delay_ms", 350));

  cfg.split_params.uniformity_threshold =
      reader.number("split.uniformity_threshold", cfg.split_params.uniformity_threshold);
  cfg.split_params.border_match = reader.number("split.border_match", cfg.split_params.border_match);
  cfg.split_params.min_gutter =
      static_cast<int>(reader.integer("split.min_gutter", cfg.split_params.min_gutter));
  cfg.split_params.max_depth =
      static_cast<int>(reader.integer("split.max_depth", cfg.split_params.max_depth));
  cfg.split_params.min_panel =
      static_cast<int>(reader.integer("split.min_panel", cfg.split_params.min_panel));

  cfg.model_path = reader.str("classifier.model");
  cfg.train_dir = reader.str("classifier.train_dir");
  cfg.hyperparams.learning_rate =
      reader.number("classifier.learning_rate", cfg.hyperparams.learning_rate);
  cfg.hyperparams.batch_size =
      static_cast<int>(reader.integer("classifier.batch_size", cfg.hyperparams.batch_size));
  cfg.hyperparams.epochs =
      static_cast<int>(reader.integer("classifier.epochs", cfg.hyperparams.epochs));
  cfg.hyperparams.validation_fraction =
      reader.number("classifier.validation_fraction", cfg.hyperparams.validation_fraction);

  cfg.lexicon_path = reader.str("lexicon.lexicon");
  cfg.pre_triggers_path = reader.str("lexicon.pre_triggers");
  cfg.post_triggers_path = reader.str("lexicon.post_triggers");
  cfg.terminators_path = reader.str("lexicon.terminators");
  cfg.scope_window = static_cast<int>(reader.integer("lexicon.scope_window", cfg.scope_window));

  cfg.out_dir = reader.str("output.dir");
  cfg.cohort = reader.str("output.cohort", cfg.cohort);
  cfg.compare_manifest = reader.str("output.compare_manifest");
  cfg.compare_label = reader.str("output.compare_label", cfg.compare_label);

  cfg.seed = static_cast<std::uint64_t>(reader.integer("run.seed", 0));
  cfg.hyperparams.seed = cfg.seed;
  cfg.workers = static_cast<int>(reader.integer("run.workers", 0));
  cfg.quiet = reader.boolean("run.quiet", false);
  cfg.verbose = reader.boolean("run.verbose", false);

  reader.reject_unknown();
  return cfg;
}

PipelineConfig load_config_file(const std::string& path) {
  return config_from_map(parse_config_file(path));
}

void validate(const PipelineConfig& cfg) {
  const bool has_ids = !cfg.ids_file.empty();
  const bool has_query = !cfg.query.empty();
  if (has_ids == has_query) {
    raise(Errc::ConfigError, "exactly one of source.ids and source.query must be set");
  }
  if (has_query && cfg.mode != fetch::SourceMode::live) {
    raise(Errc::ConfigError, "query resolution requires live mode");
  }
  if (cfg.mode == fetch::SourceMode::fixture && cfg.fixture_dir.empty()) {
    raise(Errc::ConfigError, "fixture mode requires source.fixture_dir");
  }
  if (cfg.images_dir.empty()) raise(Errc::ConfigError, "source.images_dir is required");
  if (cfg.out_dir.empty()) raise(Errc::ConfigError, "output.dir is required");
  const bool has_model = !cfg.model_path.empty();
  const bool has_train = !cfg.train_dir.empty();
  if (has_model == has_train) {
    raise(Errc::ConfigError, "exactly one of classifier.model and classifier.train_dir must be set");
  }
  if (cfg.split_params.uniformity_threshold <= 0 || cfg.split_params.min_gutter < 1 ||
      cfg.split_params.max_depth < 1 || cfg.split_params.min_panel < 1) {
    raise(Errc::ConfigError, "split parameters must be positive");
  }
  if (cfg.scope_window < 1) raise(Errc::ConfigError, "lexicon.scope_window must be >= 1");
  if (cfg.workers < 0) raise(Errc::ConfigError, "run.workers must be >= 0");
}

}  // namespace figmine::config
