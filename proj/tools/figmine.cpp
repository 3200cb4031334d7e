// figmine: mine radiology figures, captions, and clinical text from
// full-text biomedical articles.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "figmine/classifier.hpp"
#include "figmine/config.hpp"
#include "figmine/errors.hpp"
#include "figmine/fetch.hpp"
#include "figmine/linker.hpp"
#include "figmine/manifest.hpp"
#include "figmine/pipeline.hpp"
#include "figmine/report.hpp"
#include "figmine/splitter.hpp"
#include "figmine/stats.hpp"
#include "figmine/textmine.hpp"

namespace fs = std::filesystem;
using namespace figmine;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitValidation = 2;
constexpr int kExitIo = 3;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case Errc::ConfigError:
    case Errc::DegenerateDataset:
    case Errc::DimensionMismatch:
    case Errc::EmptyCohort:
    case Errc::EmptyRuns:
    case Errc::EmptyTable:
    case Errc::SingleClass:
      return kExitConfig;
    case Errc::SchemaError:
    case Errc::MalformedXml:
    case Errc::MissingRequiredField:
    case Errc::EncodingError:
      return kExitValidation;
    default:
      return kExitIo;
  }
}

std::string read_file_or_die(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open: " + path);
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

text::Lexicon lexicon_from_flag(const std::string& path) {
  return path.empty() ? text::load_default_lexicon() : text::load_lexicon_tsv(path);
}

struct FetchArgs {
  std::string ids_file;
  std::string source = "fixture";
  std::string fixture_dir;
  std::string cache_dir;
  std::string api_base;
  std::string out_dir = ".";
  int delay_ms = 350;
};

int run_fetch(const FetchArgs& args) {
  fetch::FetchOptions options;
  options.mode = args.source == "live" ? fetch::SourceMode::live : fetch::SourceMode::fixture;
  options.fixture_dir = args.fixture_dir;
  options.cache_dir = args.cache_dir;
  options.api_base = args.api_base;
  options.min_delay_ms = args.delay_ms;

  const auto ids = fetch::read_id_list(args.ids_file);
  if (ids.empty()) raise(Errc::ConfigError, "id list is empty");
  fs::create_directories(args.out_dir);

  nlohmann::ordered_json statuses = nlohmann::ordered_json::array();
  int failures = 0;
  for (const auto& pmcid : ids) {
    try {
      const std::string bytes = fetch::fetch_article(pmcid, options);
      std::ofstream out(fs::path(args.out_dir) / (pmcid + ".xml"), std::ios::binary);
      out << bytes;
      statuses.push_back({{"pmcid", pmcid}, {"ok", true}});
      std::cerr << "[figmine] fetched " << pmcid << " (" << bytes.size() << " bytes)\n";
    } catch (const Error& e) {
      ++failures;
      statuses.push_back({{"pmcid", pmcid}, {"ok", false}, {"reason", e.what()}});
      std::cerr << "[figmine] " << pmcid << " failed: " << e.what() << "\n";
    }
  }
  std::ofstream status_out(fs::path(args.out_dir) / "fetch_status.json");
  status_out << statuses.dump(2) << "\n";
  std::cout << (ids.size() - failures) << "/" << ids.size() << " articles fetched\n";
  return kExitOk;
}

int run_extract(const std::string& input, bool linked) {
  const auto doc = bioc::parse_bioc(read_file_or_die(input));
  if (!linked) {
    nlohmann::json j = doc;
    std::cout << j.dump(2) << "\n";
    return kExitOk;
  }
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& figure : link::link_figures(doc)) {
    nlohmann::ordered_json item;
    item["pmcid"] = figure.article.pmcid;
    item["figure_number"] = figure.figure.figure_number;
    item["raw_label"] = figure.figure.raw_label;
    item["graphic_ref"] = figure.figure.graphic_ref;
    item["caption"] = figure.figure.caption_text;
    item["referring_text"] = figure.referring_text;
    nlohmann::ordered_json refs = nlohmann::ordered_json::array();
    for (const auto& reference : figure.references) {
      refs.push_back({{"passage_index", reference.passage_index},
                      {"begin", reference.begin},
                      {"end", reference.end}});
    }
    item["references"] = refs;
    out.push_back(std::move(item));
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct SplitArgs {
  std::string image;
  std::string out_dir;
  split::SplitParams params;
};

int run_split(const SplitArgs& args) {
  const auto image = img::load_image(args.image);
  const auto boxes = split::split_compound(image, args.params);
  const auto kept = split::filter_min_size(boxes, args.params);

  nlohmann::ordered_json out;
  out["image"] = args.image;
  out["width"] = image.width;
  out["height"] = image.height;
  out["boxes"] = nlohmann::ordered_json::array();
  for (const auto& box : boxes) {
    out["boxes"].push_back(
        {{"x", box.x}, {"y", box.y}, {"w", box.w}, {"h", box.h}, {"depth", box.depth},
         {"kept", box.w >= args.params.min_panel && box.h >= args.params.min_panel}});
  }
  if (!args.out_dir.empty()) {
    fs::create_directories(args.out_dir);
    const std::string stem = fs::path(args.image).stem().string();
    for (std::size_t k = 0; k < kept.size(); ++k) {
      img::save_png(split::crop(image, kept[k]),
                    fs::path(args.out_dir) / (stem + "_" + std::to_string(k) + ".png"));
    }
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct ClassifyArgs {
  std::string model;
  std::string train_dir;
  std::string save_model;
  std::vector<std::string> images;
  classify::Hyperparams hp;
};

int run_classify(const ClassifyArgs& args) {
  classify::ModelParams model;
  if (!args.train_dir.empty()) {
    std::vector<classify::Sample> samples;
    for (int c = 0; c < 3; ++c) {
      const fs::path class_dir = fs::path(args.train_dir) / classify::kClassNames[c];
      if (!fs::is_directory(class_dir)) continue;
      std::vector<fs::path> files;
      for (const auto& entry : fs::directory_iterator(class_dir)) {
        if (entry.is_regular_file()) files.push_back(entry.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        samples.push_back(
            {classify::extract_features(img::load_image(file)), static_cast<classify::Modality>(c)});
      }
    }
    auto result = classify::train(samples, args.hp);
    std::cerr << "[figmine] trained on " << samples.size() << " images, best epoch "
              << result.best_epoch << ", final loss " << result.loss_trace.back() << "\n";
    model = std::move(result.params);
    if (!args.save_model.empty()) classify::save_model(model, args.hp, args.save_model);
  } else if (!args.model.empty()) {
    model = classify::load_model(args.model);
  } else {
    raise(Errc::ConfigError, "classify needs --model or --train-dir");
  }

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& path : args.images) {
    const auto prediction = classify::predict(model, img::load_image(path));
    out.push_back({{"image", path},
                   {"label", classify::to_string(prediction.label)},
                   {"prob_ct", prediction.probs[0]},
                   {"prob_cxr", prediction.probs[1]},
                   {"prob_other", prediction.probs[2]}});
  }
  if (!out.empty()) std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct MineArgs {
  std::string text;
  std::string file;
  std::string lexicon;
  std::string export_lexicon;
  int scope_window = 6;
};

int run_mine(const MineArgs& args) {
  if (!args.export_lexicon.empty()) {
    text::save_lexicon_tsv(text::load_default_lexicon(), args.export_lexicon);
    std::cout << "default lexicon written to " << args.export_lexicon << "\n";
    if (args.text.empty() && args.file.empty()) return kExitOk;
  }
  const std::string content = !args.file.empty() ? read_file_or_die(args.file) : args.text;
  auto rules = text::default_negation_rules();
  rules.scope_window = args.scope_window;
  const auto mentions = text::mine_text(content, lexicon_from_flag(args.lexicon), rules);

  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const auto& mention : mentions) {
    out.push_back({{"term", mention.term},
                   {"category", text::to_string(mention.category)},
                   {"begin", mention.begin},
                   {"end", mention.end},
                   {"text", content.substr(mention.begin, mention.end - mention.begin)},
                   {"polarity", text::to_string(mention.polarity)}});
  }
  std::cout << out.dump(2) << "\n";
  return kExitOk;
}

struct ReportArgs {
  std::string manifest_a;
  std::string manifest_b;
  std::string label_a = "cohort_a";
  std::string label_b = "cohort_b";
  std::string lexicon;
  std::string out_dir = ".";
};

std::vector<std::set<std::string>> cohort_from_manifest(const std::string& path) {
  std::map<std::string, std::set<std::string>> by_article;
  for (const auto& entry : manifest::read_jsonl(path)) {
    by_article.try_emplace(entry.pmcid);
    for (const auto& mention : entry.mentions) {
      if (mention.polarity == "positive") by_article[entry.pmcid].insert(mention.term);
    }
  }
  std::vector<std::set<std::string>> cohort;
  for (auto& [pmcid, terms] : by_article) cohort.push_back(terms);
  return cohort;
}

int run_report(const ReportArgs& args) {
  const auto lexicon = lexicon_from_flag(args.lexicon);
  const auto cohort_a = cohort_from_manifest(args.manifest_a);
  const auto cohort_b = cohort_from_manifest(args.manifest_b);
  const auto comparison = stats::frequency_comparison(cohort_a, cohort_b, lexicon);

  const auto symptoms = report::rows_from_comparison(comparison, text::Category::symptom);
  const auto findings = report::rows_from_comparison(comparison, text::Category::finding);
  const auto doc = report::report_json(args.label_a, args.label_b, cohort_a.size(),
                                       cohort_b.size(), symptoms, findings);

  fs::create_directories(args.out_dir);
  std::ofstream(fs::path(args.out_dir) / "report.json") << doc.dump(2) << "\n";
  std::ofstream(fs::path(args.out_dir) / "report_symptoms.svg")
      << report::render_frequency_svg("Symptom frequency", symptoms, args.label_a, args.label_b);
  std::ofstream(fs::path(args.out_dir) / "report_findings.svg")
      << report::render_frequency_svg("Finding frequency", findings, args.label_a, args.label_b);
  std::cout << "report written to " << args.out_dir << "\n";
  return kExitOk;
}

int run_validate(const std::string& manifest_path, bool check_images, int min_panel) {
  const auto report = manifest::validate_manifest(manifest_path, check_images, min_panel);
  for (const auto& violation : report.violations) {
    std::cout << manifest_path << ":" << violation.line << ": " << violation.message << "\n";
  }
  std::cout << report.entries_checked << " entries checked, " << report.violations.size()
            << " violations\n";
  return report.ok() ? kExitOk : kExitValidation;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"figmine: radiology figure and text mining for PMC-OA articles"};
  app.set_version_flag("--version", "figmine 0.1.0");
  app.require_subcommand(1);

  // fetch
  FetchArgs fetch_args;
  auto* fetch_cmd = app.add_subcommand("fetch", "Download or copy BioC XML for an id list");
  fetch_cmd->add_option("--ids", fetch_args.ids_file, "file with one PMCID per line")->required();
  fetch_cmd->add_option("--source", fetch_args.source, "live|fixture")
      ->check(CLI::IsMember({"live", "fixture"}));
  fetch_cmd->add_option("--fixture-dir", fetch_args.fixture_dir, "fixture directory");
  fetch_cmd->add_option("--cache-dir", fetch_args.cache_dir, "raw XML cache directory");
  fetch_cmd->add_option("--api-base", fetch_args.api_base, "override the BioC endpoint");
  fetch_cmd->add_option("--out-dir", fetch_args.out_dir, "where to write the XML files");
  fetch_cmd->add_option("--delay-ms", fetch_args.delay_ms, "min delay between live requests");

  // extract
  std::string extract_input;
  bool extract_linked = false;
  auto* extract_cmd = app.add_subcommand("extract", "Parse BioC XML into the article model");
  extract_cmd->add_option("--in", extract_input, "BioC XML file")->required();
  extract_cmd->add_flag("--linked", extract_linked, "emit linked figures instead of the raw model");

  // split
  SplitArgs split_args;
  auto* split_cmd = app.add_subcommand("split", "Split a compound figure into subfigure crops");
  split_cmd->add_option("--image", split_args.image, "PNG or JPEG file")->required();
  split_cmd->add_option("--out-dir", split_args.out_dir, "write kept crops here");
  split_cmd->add_option("--uniformity-threshold", split_args.params.uniformity_threshold);
  split_cmd->add_option("--border-match", split_args.params.border_match);
  split_cmd->add_option("--min-gutter", split_args.params.min_gutter);
  split_cmd->add_option("--max-depth", split_args.params.max_depth);
  split_cmd->add_option("--min-panel", split_args.params.min_panel);

  // classify
  ClassifyArgs classify_args;
  auto* classify_cmd = app.add_subcommand("classify", "Train or apply the modality classifier");
  classify_cmd->add_option("--model", classify_args.model, "model JSON to apply");
  classify_cmd->add_option("--train-dir", classify_args.train_dir,
                           "directory with CT/ CXR/ Other/ image subdirs");
  classify_cmd->add_option("--save-model", classify_args.save_model, "write trained model here");
  classify_cmd->add_option("--images", classify_args.images, "images to classify");
  classify_cmd->add_option("--learning-rate", classify_args.hp.learning_rate);
  classify_cmd->add_option("--batch-size", classify_args.hp.batch_size);
  classify_cmd->add_option("--epochs", classify_args.hp.epochs);
  classify_cmd->add_option("--seed", classify_args.hp.seed);

  // mine
  MineArgs mine_args;
  auto* mine_cmd = app.add_subcommand("mine", "Extract negation-aware symptom/finding mentions");
  mine_cmd->add_option("--text", mine_args.text, "text to mine");
  mine_cmd->add_option("--file", mine_args.file, "file to mine");
  mine_cmd->add_option("--lexicon", mine_args.lexicon, "lexicon TSV override");
  mine_cmd->add_option("--export-lexicon", mine_args.export_lexicon,
                       "write the built-in lexicon as an editable TSV");
  mine_cmd->add_option("--scope-window", mine_args.scope_window, "negation scope in tokens");

  // report
  ReportArgs report_args;
  auto* report_cmd = app.add_subcommand("report", "Compare two cohort manifests");
  report_cmd->add_option("--manifest-a", report_args.manifest_a, "cohort A manifest.jsonl")->required();
  report_cmd->add_option("--manifest-b", report_args.manifest_b, "cohort B manifest.jsonl")->required();
  report_cmd->add_option("--label-a", report_args.label_a);
  report_cmd->add_option("--label-b", report_args.label_b);
  report_cmd->add_option("--lexicon", report_args.lexicon, "lexicon TSV override");
  report_cmd->add_option("--out-dir", report_args.out_dir);

  // run
  std::string config_path;
  bool run_quiet = false, run_verbose = false;
  config::KeyValueMap overrides;
  auto* run_cmd = app.add_subcommand("run", "Run the whole pipeline from a config file");
  run_cmd->add_option("--config", config_path, "TOML-style config file")->required();
  run_cmd->add_flag("--quiet", run_quiet, "suppress per-article log lines");
  run_cmd->add_flag("--verbose", run_verbose, "log every manifest entry");
  run_cmd->add_option_function<std::vector<std::string>>(
      "--set", [&overrides](const std::vector<std::string>& pairs) {
        for (const auto& pair : pairs) {
          const auto eq = pair.find('=');
          if (eq == std::string::npos) {
            throw CLI::ValidationError("--set expects section.key=value");
          }
          overrides[pair.substr(0, eq)] = pair.substr(eq + 1);
        }
      },
      "override config keys, e.g. --set output.dir=out2");

  // validate
  std::string validate_manifest_path;
  bool no_check_images = false;
  int validate_min_panel = 224;
  auto* validate_cmd = app.add_subcommand("validate", "Check a manifest against its invariants");
  validate_cmd->add_option("--manifest", validate_manifest_path, "manifest.jsonl path")->required();
  validate_cmd->add_flag("--no-check-images", no_check_images, "skip image decode checks");
  validate_cmd->add_option("--min-panel", validate_min_panel, "dimension floor");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*fetch_cmd) return run_fetch(fetch_args);
    if (*extract_cmd) return run_extract(extract_input, extract_linked);
    if (*split_cmd) return run_split(split_args);
    if (*classify_cmd) return run_classify(classify_args);
    if (*mine_cmd) return run_mine(mine_args);
    if (*report_cmd) return run_report(report_args);
    if (*run_cmd) {
      auto map = config::parse_config_file(config_path);
      for (const auto& [key, value] : overrides) map[key] = value;
      if (run_quiet) map["run.quiet"] = "true";
      if (run_verbose) map["run.verbose"] = "true";
      const auto cfg = config::config_from_map(map);
      const auto summary = pipeline::run_pipeline(cfg);
      std::cout << pipeline::summary_to_json(summary)["counts"].dump(2) << "\n";
      return kExitOk;
    }
    if (*validate_cmd) {
      return run_validate(validate_manifest_path, !no_check_images, validate_min_panel);
    }
  } catch (const Error& e) {
    std::cerr << "figmine: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "figmine: " << e.what() << "\n";
    return kExitIo;
  }
  return kExitConfig;
}
