#include "figmine/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "figmine/errors.hpp"
#include "figmine/linker.hpp"
#include "figmine/report.hpp"
#include "figmine/splitter.hpp"
#include "figmine/stats.hpp"
#include "figmine/textmine.hpp"

namespace fs = std::filesystem;

namespace figmine::pipeline {

namespace {

// Ordered fan-out: results land at their input index no matter which worker
// finishes first, keeping downstream output deterministic.
template <typename In, typename Out, typename Fn>
std::vector<Out> parallel_map(const std::vector<In>& inputs, int workers, Fn&& fn) {
  std::vector<Out> outputs(inputs.size());
  if (workers <= 1 || inputs.size() <= 1) {
    for (std::size_t i = 0; i < inputs.size(); ++i) outputs[i] = fn(inputs[i]);
    return outputs;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= inputs.size()) return;
      outputs[i] = fn(inputs[i]);
    }
  };
  std::vector<std::thread> pool;
  const int count = std::min<int>(workers, static_cast<int>(inputs.size()));
  pool.reserve(count);
  for (int t = 0; t < count; ++t) pool.emplace_back(worker);
  for (auto& thread : pool) thread.join();
  return outputs;
}

struct ArticleWork {
  const bioc::ArticleDocument* doc = nullptr;
};

struct FigureCounts {
  std::uint64_t figures = 0;
  std::uint64_t with_images = 0;
  std::uint64_t before_filter = 0;
  std::uint64_t after_filter = 0;
};

struct ArticleResult {
  FigureCounts counts;
  std::vector<manifest::ManifestEntry> entries;
  std::set<std::string> positive_terms;
  std::uint64_t mentions_positive = 0;
  std::uint64_t mentions_negated = 0;
  std::string log_line;
  bool failed = false;
  std::string failure;
};

fs::path locate_graphic(const fs::path& images_dir, const std::string& pmcid,
                        const std::string& graphic_ref) {
  const fs::path per_article = images_dir / pmcid / graphic_ref;
  if (fs::exists(per_article)) return per_article;
  const fs::path flat = images_dir / graphic_ref;
  if (fs::exists(flat)) return flat;
  return {};
}

std::vector<manifest::MentionSummary> summarize_mentions(
    const std::vector<text::Mention>& mentions) {
  // Collapse duplicates (term, polarity, source) with a count; keep the
  // output ordered for byte-stable manifests.
  std::map<std::tuple<std::string, std::string, std::string>, manifest::MentionSummary> grouped;
  for (const auto& mention : mentions) {
    auto key = std::make_tuple(mention.term, std::string(text::to_string(mention.polarity)),
                               std::string(text::to_string(mention.source)));
    auto it = grouped.find(key);
    if (it == grouped.end()) {
      manifest::MentionSummary summary;
      summary.term = mention.term;
      summary.category = text::to_string(mention.category);
      summary.polarity = text::to_string(mention.polarity);
      summary.source = text::to_string(mention.source);
      grouped.emplace(std::move(key), std::move(summary));
    } else {
      ++it->second.count;
    }
  }
  std::vector<manifest::MentionSummary> summaries;
  summaries.reserve(grouped.size());
  for (auto& [key, summary] : grouped) summaries.push_back(std::move(summary));
  return summaries;
}

ArticleResult process_article(const bioc::ArticleDocument& doc,
                              const config::PipelineConfig& cfg,
                              const classify::ModelParams& model, const text::Lexicon& lexicon,
                              const text::NegationRules& rules, const fs::path& crops_dir) {
  ArticleResult result;
  std::ostringstream log;
  log << doc.pmcid;

  const auto linked = link::link_figures(doc);
  result.counts.figures = linked.size();

  for (const auto& figure : linked) {
    const auto mentions = text::mine_linked_figure(figure, lexicon, rules);
    for (const auto& mention : mentions) {
      (mention.polarity == text::Polarity::positive ? result.mentions_positive
                                                    : result.mentions_negated) += 1;
    }
    auto positive = text::positive_terms(mentions);
    result.positive_terms.insert(positive.begin(), positive.end());

    const fs::path source_image =
        locate_graphic(cfg.images_dir, doc.pmcid, figure.figure.graphic_ref);
    if (source_image.empty()) {
      log << " fig" << figure.figure.figure_number << "=missing-image";
      continue;
    }

    img::RasterImage image;
    try {
      image = img::load_image(source_image);
    } catch (const Error& e) {
      log << " fig" << figure.figure.figure_number << "=decode-error";
      continue;
    }
    ++result.counts.with_images;

    const auto boxes = split::split_compound(image, cfg.split_params);
    result.counts.before_filter += boxes.size();
    const auto kept = split::filter_min_size(boxes, cfg.split_params);
    result.counts.after_filter += kept.size();

    const auto mention_summaries = summarize_mentions(mentions);
    std::string referring_text;
    for (std::size_t i = 0; i < figure.referring_text.size(); ++i) {
      if (i) referring_text += "\n\n";
      referring_text += figure.referring_text[i];
    }

    for (std::size_t k = 0; k < kept.size(); ++k) {
      const auto& box = kept[k];
      const img::RasterImage panel = split::crop(image, box);
      const std::string file_name = doc.pmcid + "_fig" +
                                    std::to_string(figure.figure.figure_number) + "_" +
                                    std::to_string(k) + ".png";
      img::save_png(panel, crops_dir / file_name);

      const auto prediction = classify::predict(model, panel);

      manifest::ManifestEntry entry;
      entry.pmcid = doc.pmcid;
      entry.doi = doc.doi;
      entry.title = doc.title;
      entry.journal = doc.journal;
      entry.pub_date = doc.pub_date;
      entry.license = doc.license;
      entry.figure_number = figure.figure.figure_number;
      entry.subfigure_index = static_cast<int>(k);
      entry.image_path = "images/" + file_name;
      entry.width = box.w;
      entry.height = box.h;
      entry.modality = classify::to_string(prediction.label);
      entry.probs = prediction.probs;
      entry.caption = figure.figure.caption_text;
      entry.referring_text = referring_text;
      entry.mentions = mention_summaries;
      result.entries.push_back(std::move(entry));
    }
    log << " fig" << figure.figure.figure_number << "=" << kept.size() << "/" << boxes.size();
  }

  log << " mentions=" << (result.mentions_positive + result.mentions_negated);
  result.log_line = log.str();
  return result;
}

classify::ModelParams prepare_model(const config::PipelineConfig& cfg, const fs::path& out_dir) {
  if (!cfg.model_path.empty()) return classify::load_model(cfg.model_path);

  // Train from a directory of labeled images: <train_dir>/{CT,CXR,Other}/*
  std::vector<classify::Sample> samples;
  for (int c = 0; c < 3; ++c) {
    const fs::path class_dir = fs::path(cfg.train_dir) / classify::kClassNames[c];
    if (!fs::is_directory(class_dir)) continue;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(class_dir)) {
      if (entry.is_regular_file()) files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      classify::Sample sample;
      sample.features = classify::extract_features(img::load_image(file));
      sample.label = static_cast<classify::Modality>(c);
      samples.push_back(std::move(sample));
    }
  }
  auto trained = classify::train(samples, cfg.hyperparams);
  classify::save_model(trained.params, cfg.hyperparams, out_dir / "model.json");
  return std::move(trained.params);
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open for write: " + path.string());
  out << content;
  if (!out) raise(Errc::IoError, "short write: " + path.string());
}

}  // namespace

nlohmann::ordered_json summary_to_json(const RunSummary& summary) {
  nlohmann::ordered_json counts;
  counts["articles_requested"] = summary.counts.articles_requested;
  counts["articles_parsed"] = summary.counts.articles_parsed;
  counts["articles_failed"] = summary.counts.articles_failed;
  counts["figures"] = summary.counts.figures;
  counts["figures_with_images"] = summary.counts.figures_with_images;
  counts["subfigures_before_filter"] = summary.counts.subfigures_before_filter;
  counts["subfigures_after_filter"] = summary.counts.subfigures_after_filter;
  counts["modality_ct"] = summary.counts.modality_ct;
  counts["modality_cxr"] = summary.counts.modality_cxr;
  counts["modality_other"] = summary.counts.modality_other;
  counts["mentions_positive"] = summary.counts.mentions_positive;
  counts["mentions_negated"] = summary.counts.mentions_negated;

  nlohmann::ordered_json outcomes = nlohmann::ordered_json::array();
  for (const auto& outcome : summary.outcomes) {
    outcomes.push_back({{"pmcid", outcome.pmcid}, {"ok", outcome.ok}, {"detail", outcome.detail}});
  }
  return nlohmann::ordered_json{{"counts", counts}, {"articles", outcomes}};
}

RunSummary run_pipeline(const config::PipelineConfig& cfg) {
  config::validate(cfg);

  const fs::path out_dir(cfg.out_dir);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  const fs::path crops_dir = out_dir / "images";
  fs::create_directories(crops_dir, ec);
  if (!fs::is_directory(out_dir) || !fs::is_directory(crops_dir)) {
    raise(Errc::IoError, "output directory not writable: " + cfg.out_dir);
  }

  fetch::FetchOptions fetch_options;
  fetch_options.mode = cfg.mode;
  fetch_options.fixture_dir = cfg.fixture_dir;
  fetch_options.api_base = cfg.api_base;
  fetch_options.cache_dir = cfg.cache_dir;
  fetch_options.min_delay_ms = cfg.rate_delay_ms;

  std::vector<std::string> ids;
  if (!cfg.ids_file.empty()) {
    ids = fetch::read_id_list(cfg.ids_file);
  } else {
    ids = fetch::resolve_query({cfg.query, cfg.query_max}, fetch_options);
  }
  if (ids.empty()) raise(Errc::ConfigError, "article id list is empty");

  const auto corpus = fetch::collect_corpus(ids, fetch_options);

  const classify::ModelParams model = prepare_model(cfg, out_dir);
  const text::Lexicon lexicon =
      cfg.lexicon_path.empty() ? text::load_default_lexicon() : text::load_lexicon_tsv(cfg.lexicon_path);
  text::NegationRules rules;
  if (!cfg.pre_triggers_path.empty() || !cfg.post_triggers_path.empty() ||
      !cfg.terminators_path.empty()) {
    rules = text::load_negation_rules(cfg.pre_triggers_path, cfg.post_triggers_path,
                                      cfg.terminators_path, cfg.scope_window);
  } else {
    rules = text::default_negation_rules();
    rules.scope_window = cfg.scope_window;
  }

  const int workers = cfg.workers > 0
                          ? cfg.workers
                          : std::max(1u, std::thread::hardware_concurrency());
  std::vector<const bioc::ArticleDocument*> docs;
  for (const auto& doc : corpus.documents) docs.push_back(&doc);
  const auto results = parallel_map<const bioc::ArticleDocument*, ArticleResult>(
      docs, workers, [&](const bioc::ArticleDocument* doc) {
        try {
          return process_article(*doc, cfg, model, lexicon, rules, crops_dir);
        } catch (const std::exception& e) {
          // a broken article must never take the run down
          ArticleResult result;
          result.failed = true;
          result.failure = e.what();
          return result;
        }
      });

  RunSummary summary;
  summary.counts.articles_requested = ids.size();

  std::vector<std::set<std::string>> cohort_items;
  std::size_t result_index = 0;
  for (const auto& status : corpus.statuses) {
    ArticleOutcome outcome;
    outcome.pmcid = status.pmcid;
    outcome.ok = status.ok;
    if (!status.ok) {
      outcome.detail = status.reason;
      ++summary.counts.articles_failed;
      if (!cfg.quiet) std::cerr << "[figmine] " << status.pmcid << " skipped: " << status.reason << "\n";
    } else if (results[result_index].failed) {
      const ArticleResult& result = results[result_index++];
      outcome.ok = false;
      outcome.detail = result.failure;
      ++summary.counts.articles_failed;
      if (!cfg.quiet) {
        std::cerr << "[figmine] " << status.pmcid << " failed: " << result.failure << "\n";
      }
    } else {
      const ArticleResult& result = results[result_index++];
      ++summary.counts.articles_parsed;
      summary.counts.figures += result.counts.figures;
      summary.counts.figures_with_images += result.counts.with_images;
      summary.counts.subfigures_before_filter += result.counts.before_filter;
      summary.counts.subfigures_after_filter += result.counts.after_filter;
      summary.counts.mentions_positive += result.mentions_positive;
      summary.counts.mentions_negated += result.mentions_negated;
      for (const auto& entry : result.entries) {
        if (entry.modality == "CT") ++summary.counts.modality_ct;
        else if (entry.modality == "CXR") ++summary.counts.modality_cxr;
        else ++summary.counts.modality_other;
        summary.entries.push_back(entry);
      }
      cohort_items.push_back(result.positive_terms);
      outcome.detail = result.log_line;
      if (!cfg.quiet) {
        std::cerr << "[figmine] " << result.log_line << "\n";
        if (cfg.verbose) {
          for (const auto& entry : result.entries) {
            std::cerr << "[figmine]   " << entry.image_path << " " << entry.width << "x"
                      << entry.height << " " << entry.modality << "\n";
          }
        }
      }
    }
    summary.outcomes.push_back(std::move(outcome));
  }

  manifest::write_jsonl(out_dir / "manifest.jsonl", summary.entries);
  manifest::write_csv(out_dir / "manifest.csv", summary.entries);

  // Report: single-cohort frequencies, or a comparison when a second
  // cohort's manifest is supplied.
  nlohmann::ordered_json report_doc;
  std::vector<report::FrequencyRow> symptom_rows, finding_rows;
  if (!cfg.compare_manifest.empty()) {
    const auto other_entries = manifest::read_jsonl(cfg.compare_manifest);
    std::map<std::string, std::set<std::string>> by_article;
    for (const auto& entry : other_entries) {
      for (const auto& mention : entry.mentions) {
        if (mention.polarity == "positive") by_article[entry.pmcid].insert(mention.term);
      }
      by_article.try_emplace(entry.pmcid);
    }
    std::vector<std::set<std::string>> cohort_b;
    for (auto& [pmcid, terms] : by_article) cohort_b.push_back(terms);

    const auto comparison = stats::frequency_comparison(cohort_items, cohort_b, lexicon);
    symptom_rows = report::rows_from_comparison(comparison, text::Category::symptom);
    finding_rows = report::rows_from_comparison(comparison, text::Category::finding);
    report_doc = report::report_json(cfg.cohort, cfg.compare_label, cohort_items.size(),
                                     cohort_b.size(), symptom_rows, finding_rows);
  } else {
    symptom_rows = report::rows_from_counts(cohort_items, lexicon, text::Category::symptom);
    finding_rows = report::rows_from_counts(cohort_items, lexicon, text::Category::finding);
    report_doc = report::report_json(cfg.cohort, std::nullopt, cohort_items.size(), std::nullopt,
                                     symptom_rows, finding_rows);
  }
  write_text_file(out_dir / "report.json", report_doc.dump(2) + "\n");

  const std::optional<std::string> label_b =
      cfg.compare_manifest.empty() ? std::nullopt : std::optional<std::string>(cfg.compare_label);
  write_text_file(out_dir / "report_symptoms.svg",
                  report::render_frequency_svg("Symptom frequency", symptom_rows, cfg.cohort, label_b));
  write_text_file(out_dir / "report_findings.svg",
                  report::render_frequency_svg("Finding frequency", finding_rows, cfg.cohort, label_b));

  write_text_file(out_dir / "run_summary.json", summary_to_json(summary).dump(2) + "\n");
  return summary;
}

}  // namespace figmine::pipeline
