#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>

#include "figmine/errors.hpp"
#include "figmine/pipeline.hpp"
#include "support/synthetic_figures.hpp"

using namespace figmine;
namespace fs = std::filesystem;

namespace {

const std::string kFixtureDir = std::string(FIGMINE_TEST_DATA_DIR) + "/bioc";

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

struct Workspace {
  fs::path root;

  explicit Workspace(const std::string& name) : root(fs::temp_directory_path() / name) {
    fs::remove_all(root);
    fs::create_directories(root / "images");

    // figure assets matching the BioC fixtures: a two-panel compound, an
    // undersized single, and a 2x2 grid
    std::mt19937_64 rng(2024);
    const auto two_panel = testing::make_grid(rng, {290, 290}, {600}, {20}, {});
    img::save_png(two_panel.image, root / "images/PMC7100000_f1.png");
    img::save_png(testing::speckle_panel(rng, 200, 200), root / "images/PMC7100000_f2.png");
    const auto grid = testing::make_grid(rng, {440, 440}, {440, 440}, {20}, {20});
    img::save_png(grid.image, root / "images/PMC7100001_f1.png");

    // a fixed classifier that labels everything Other
    auto params = classify::ModelParams::zeros(classify::kFeatureDim);
    params.bias = {0.0, 0.0, 1.0};
    classify::save_model(params, classify::Hyperparams{}, root / "model.json");

    std::ofstream ids(root / "ids.txt");
    ids << "PMC7100000\nPMC7100001\nPMC7100002\nPMC9999999999\n";
  }

  ~Workspace() { fs::remove_all(root); }

  config::PipelineConfig base_config(const std::string& out_name) const {
    config::PipelineConfig cfg;
    cfg.mode = fetch::SourceMode::fixture;
    cfg.fixture_dir = kFixtureDir;
    cfg.ids_file = (root / "ids.txt").string();
    cfg.images_dir = (root / "images").string();
    cfg.model_path = (root / "model.json").string();
    cfg.out_dir = (root / out_name).string();
    cfg.cohort = "covid19";
    cfg.seed = 1;
    cfg.workers = 2;
    cfg.quiet = true;
    return cfg;
  }
};

}  // namespace

TEST_CASE("config file parsing: sections, types, comments, unknown keys") {
  const std::string toml =
      "# pipeline config\n"
      "[source]\n"
      "mode = \"fixture\"\n"
      "fixture_dir = \"/tmp/fx\"\n"
      "ids = \"/tmp/ids.txt\"\n"
      "images_dir = \"/tmp/img\"  # trailing comment\n"
      "[split]\n"
      "min_gutter = 8\n"
      "uniformity_threshold = 3.5\n"
      "[classifier]\n"
      "model = \"/tmp/m.json\"\n"
      "[output]\n"
      "dir = \"/tmp/out\"\n"
      "cohort = \"covid19\"\n"
      "[run]\n"
      "seed = 7\n"
      "quiet = true\n";
  const auto cfg = config::config_from_map(config::parse_config_text(toml, "inline"));
  CHECK(cfg.mode == fetch::SourceMode::fixture);
  CHECK(cfg.fixture_dir == "/tmp/fx");
  CHECK(cfg.split_params.min_gutter == 8);
  CHECK(cfg.split_params.uniformity_threshold == 3.5);
  CHECK(cfg.seed == 7);
  CHECK(cfg.hyperparams.seed == 7);
  CHECK(cfg.quiet);
  config::validate(cfg);

  CHECK_THROWS_AS(config::config_from_map(config::parse_config_text("[source]\nbogus = 1\n", "x")),
                  Error);
  CHECK_THROWS_AS(config::parse_config_text("[source\nmode = \"fixture\"\n", "x"), Error);
}

TEST_CASE("config validation: source and classifier must be unambiguous") {
  Workspace ws("figmine_cfg_ws");
  auto cfg = ws.base_config("out");

  auto both = cfg;
  both.query = "flu[Title]";
  CHECK_THROWS_AS(config::validate(both), Error);

  auto neither = cfg;
  neither.ids_file.clear();
  CHECK_THROWS_AS(config::validate(neither), Error);

  auto fixture_query = cfg;
  fixture_query.ids_file.clear();
  fixture_query.query = "flu[Title]";
  try {
    config::validate(fixture_query);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("live mode") != std::string::npos);
  }

  auto two_models = cfg;
  two_models.train_dir = "somewhere";
  CHECK_THROWS_AS(config::validate(two_models), Error);
}

TEST_CASE("pipeline run: counts match the hand-tallied fixture truth") {
  Workspace ws("figmine_run_ws");
  const auto summary = pipeline::run_pipeline(ws.base_config("out1"));

  CHECK(summary.counts.articles_requested == 4);
  CHECK(summary.counts.articles_parsed == 3);
  CHECK(summary.counts.articles_failed == 1);
  CHECK(summary.counts.figures == 3);
  CHECK(summary.counts.figures_with_images == 3);
  // two-panel figure -> 2, undersized single -> 1, 2x2 grid -> 4
  CHECK(summary.counts.subfigures_before_filter == 7);
  // the 200x200 single is filtered out
  CHECK(summary.counts.subfigures_after_filter == 6);
  CHECK(summary.counts.modality_other == 6);  // forced-Other model
  CHECK(summary.counts.modality_ct + summary.counts.modality_cxr +
            summary.counts.modality_other ==
        summary.counts.subfigures_after_filter);
  CHECK(summary.counts.mentions_positive > 0);
  CHECK(summary.counts.mentions_negated > 0);

  REQUIRE(summary.outcomes.size() == 4);
  CHECK(summary.outcomes[3].pmcid == "PMC9999999999");
  CHECK(!summary.outcomes[3].ok);

  // manifest rows: every kept panel is on disk with the recorded size
  const fs::path out(ws.base_config("out1").out_dir);
  const auto entries = manifest::read_jsonl(out / "manifest.jsonl");
  REQUIRE(entries.size() == 6);
  for (const auto& entry : entries) {
    CHECK(entry.width >= 224);
    CHECK(entry.height >= 224);
    const auto image = img::load_image(out / entry.image_path);
    CHECK(image.width == entry.width);
    CHECK(image.height == entry.height);
  }
  CHECK(entries[0].image_path == "images/PMC7100000_fig1_0.png");

  // validator agrees
  const auto validated = manifest::validate_manifest(out / "manifest.jsonl");
  CHECK(validated.ok());

  // the single-cohort report counts per-article positive term presence
  const auto report = nlohmann::json::parse(slurp(out / "report.json"));
  CHECK(report.at("comparison") == false);
  CHECK(report.at("cohort_a").at("items") == 3);
  bool saw_fever = false;
  for (const auto& row : report.at("symptoms")) {
    if (row.at("term") == "fever") {
      saw_fever = true;
      CHECK(row.at("present_a") == 1);
      CHECK(row.at("total_a") == 3);
    }
  }
  CHECK(saw_fever);
  CHECK(report.at("symptoms").size() == 15);
  CHECK(report.at("findings").size() == 20);
}

TEST_CASE("pipeline run: reruns with the same seed are byte-identical") {
  Workspace ws("figmine_det_ws");
  pipeline::run_pipeline(ws.base_config("out1"));
  pipeline::run_pipeline(ws.base_config("out2"));

  const fs::path a(ws.base_config("out1").out_dir);
  const fs::path b(ws.base_config("out2").out_dir);
  CHECK(slurp(a / "manifest.jsonl") == slurp(b / "manifest.jsonl"));
  CHECK(slurp(a / "report.json") == slurp(b / "report.json"));
  CHECK(slurp(a / "manifest.csv") == slurp(b / "manifest.csv"));
  CHECK(slurp(a / "report_symptoms.svg") == slurp(b / "report_symptoms.svg"));
  CHECK(slurp(a / "report_findings.svg") == slurp(b / "report_findings.svg"));
  CHECK(slurp(a / "run_summary.json") == slurp(b / "run_summary.json"));
}

TEST_CASE("pipeline run: serial and parallel workers produce identical output") {
  Workspace ws("figmine_par_ws");
  auto serial = ws.base_config("out_serial");
  serial.workers = 1;
  auto parallel = ws.base_config("out_parallel");
  parallel.workers = 4;
  pipeline::run_pipeline(serial);
  pipeline::run_pipeline(parallel);
  CHECK(slurp(fs::path(serial.out_dir) / "manifest.jsonl") ==
        slurp(fs::path(parallel.out_dir) / "manifest.jsonl"));
}

TEST_CASE("pipeline run: comparison mode reports both cohorts") {
  Workspace ws("figmine_cmp_ws");

  // cohort B: the influenza-flavored article only
  auto cfg_b = ws.base_config("out_b");
  std::ofstream(ws.root / "ids_b.txt") << "PMC7100001\n";
  cfg_b.ids_file = (ws.root / "ids_b.txt").string();
  cfg_b.cohort = "influenza";
  pipeline::run_pipeline(cfg_b);

  auto cfg_a = ws.base_config("out_a");
  std::ofstream(ws.root / "ids_a.txt") << "PMC7100000\nPMC7100002\n";
  cfg_a.ids_file = (ws.root / "ids_a.txt").string();
  cfg_a.compare_manifest = (fs::path(cfg_b.out_dir) / "manifest.jsonl").string();
  cfg_a.compare_label = "influenza";
  pipeline::run_pipeline(cfg_a);

  const auto report =
      nlohmann::json::parse(slurp(fs::path(cfg_a.out_dir) / "report.json"));
  CHECK(report.at("comparison") == true);
  CHECK(report.at("cohort_a").at("items") == 2);
  CHECK(report.at("cohort_b").at("items") == 1);
  for (const auto& row : report.at("findings")) {
    if (row.at("term") == "ground-glass opacification") {
      CHECK(row.at("present_a") == 1);  // positive in PMC7100000 only
      CHECK(row.at("present_b") == 0);  // negated in PMC7100001
      CHECK(row.contains("p_value"));
    }
    if (row.at("term") == "infiltration") {
      CHECK(row.at("present_a") == 0);
      CHECK(row.at("present_b") == 1);
    }
  }
}

TEST_CASE("pipeline run: a corrupt image asset skips that figure, not the run") {
  Workspace ws("figmine_corrupt_ws");
  std::ofstream(ws.root / "images/PMC7100000_f1.png", std::ios::binary) << "not an image";
  const auto summary = pipeline::run_pipeline(ws.base_config("out"));
  CHECK(summary.counts.articles_parsed == 3);
  CHECK(summary.counts.figures == 3);
  CHECK(summary.counts.figures_with_images == 2);     // f1 of PMC7100000 dropped
  CHECK(summary.counts.subfigures_after_filter == 4);  // only the 2x2 grid survives
  CHECK(summary.outcomes[0].ok);
  CHECK(summary.outcomes[0].detail.find("decode-error") != std::string::npos);
}

TEST_CASE("pipeline run: empty id list is a config error") {
  Workspace ws("figmine_empty_ws");
  auto cfg = ws.base_config("out");
  std::ofstream(ws.root / "empty.txt") << "# nothing\n";
  cfg.ids_file = (ws.root / "empty.txt").string();
  try {
    pipeline::run_pipeline(cfg);
    FAIL("expected ConfigError");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::ConfigError);
  }
}

TEST_CASE("CLI: run, validate, and exit codes") {
  Workspace ws("figmine_cli_ws");
  const std::string cli = FIGMINE_CLI_PATH;
  REQUIRE(fs::exists(cli));

  std::ofstream cfg_file(ws.root / "run.toml");
  cfg_file << "[source]\n"
           << "mode = \"fixture\"\n"
           << "fixture_dir = \"" << kFixtureDir << "\"\n"
           << "ids = \"" << (ws.root / "ids.txt").string() << "\"\n"
           << "images_dir = \"" << (ws.root / "images").string() << "\"\n"
           << "[classifier]\n"
           << "model = \"" << (ws.root / "model.json").string() << "\"\n"
           << "[output]\n"
           << "dir = \"" << (ws.root / "cli_out").string() << "\"\n"
           << "[run]\n"
           << "seed = 1\n"
           << "quiet = true\n";
  cfg_file.close();

  auto run = [&](const std::string& args) {
    const std::string command = "\"" + cli + "\" " + args + " >/dev/null 2>&1";
    const int status = std::system(command.c_str());
    return WEXITSTATUS(status);
  };

  CHECK(run("run --config \"" + (ws.root / "run.toml").string() + "\"") == 0);
  const fs::path manifest_path = ws.root / "cli_out" / "manifest.jsonl";
  REQUIRE(fs::exists(manifest_path));
  CHECK(run("validate --manifest \"" + manifest_path.string() + "\"") == 0);

  // plant an undersized entry: validation must fail with exit code 2
  auto entries = manifest::read_jsonl(manifest_path);
  REQUIRE(!entries.empty());
  entries[0].height = 200;
  const fs::path tampered = ws.root / "cli_out" / "tampered.jsonl";
  manifest::write_jsonl(tampered, entries);
  CHECK(run("validate --manifest \"" + tampered.string() + "\" --no-check-images") == 2);

  // config errors exit with 1
  CHECK(run("run --config \"" + (ws.root / "missing.toml").string() + "\"") == 1);

  // a stage command: split the two-panel fixture
  CHECK(run("split --image \"" + (ws.root / "images/PMC7100000_f1.png").string() + "\"") == 0);
}
