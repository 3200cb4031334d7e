#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "figmine/errors.hpp"
#include "figmine/stats.hpp"
#include "support/oracles.hpp"

using namespace figmine;
using stats::BinaryConfusion;
using stats::ContingencyTable2x2;

TEST_CASE("fisher: degenerate margins give p = 1") {
  CHECK(stats::fisher_exact({0, 7, 0, 5}) == 1.0);
  CHECK(stats::fisher_exact({3, 0, 9, 0}) == 1.0);
  CHECK(stats::fisher_exact({0, 0, 2, 3}) == 1.0);
}

TEST_CASE("fisher: empty table is an error") {
  CHECK_THROWS_AS(stats::fisher_exact({0, 0, 0, 0}), Error);
}

TEST_CASE("fisher: tea-tasting table matches the enumeration oracle") {
  const ContingencyTable2x2 table{3, 1, 1, 3};
  const double p = stats::fisher_exact(table);
  CHECK(p == doctest::Approx(34.0 / 70.0).epsilon(1e-12));
  CHECK(std::abs(p - testing::fisher_enumeration_oracle(table)) < 1e-12);
}

TEST_CASE("fisher: random small tables match the enumeration oracle") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 300; ++trial) {
    ContingencyTable2x2 table{rng() % 11, rng() % 11, rng() % 11, rng() % 11};
    if (table.total() == 0) continue;
    const double expected = testing::fisher_enumeration_oracle(table);
    const double actual = stats::fisher_exact(table);
    INFO(table.a, " ", table.b, " ", table.c, " ", table.d);
    CHECK(std::abs(actual - expected) < 1e-10);
  }
}

TEST_CASE("fisher: invariant under transpose and row/column swaps") {
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 100; ++trial) {
    ContingencyTable2x2 t{rng() % 13, rng() % 13, rng() % 13, rng() % 13};
    if (t.total() == 0) continue;
    const double p = stats::fisher_exact(t);
    CHECK(std::abs(p - stats::fisher_exact({t.a, t.c, t.b, t.d})) < 1e-12);  // transpose
    CHECK(std::abs(p - stats::fisher_exact({t.c, t.d, t.a, t.b})) < 1e-12);  // swap rows
    CHECK(std::abs(p - stats::fisher_exact({t.d, t.c, t.b, t.a})) < 1e-12);  // swap both
  }
}

TEST_CASE("fisher: large counts stay finite and in range") {
  const double p = stats::fisher_exact({250000, 250000, 250100, 249900});
  CHECK(p >= 0.0);
  CHECK(p <= 1.0);
}

TEST_CASE("metrics: symmetric confusion gives 0.5 everywhere") {
  const auto m = stats::compute_metrics({25, 25, 25, 25});
  CHECK(m.precision == 0.5);
  CHECK(m.recall_sensitivity == 0.5);
  CHECK(m.specificity == 0.5);
  CHECK(m.f1 == 0.5);
  CHECK(m.warnings.empty());
}

TEST_CASE("metrics: perfect classifier") {
  const auto m = stats::compute_metrics({10, 0, 10, 0});
  CHECK(m.precision == 1.0);
  CHECK(m.recall_sensitivity == 1.0);
  CHECK(m.specificity == 1.0);
  CHECK(m.f1 == 1.0);
}

TEST_CASE("metrics: 0/0 denominators report 0 with a warning") {
  const auto m = stats::compute_metrics({0, 0, 5, 5});
  CHECK(m.precision == 0.0);
  CHECK(m.recall_sensitivity == 0.0);
  CHECK(m.specificity == 1.0);
  CHECK(m.f1 == 0.0);
  REQUIRE(!m.warnings.empty());
  CHECK(m.warnings.front() == "precision");
}

TEST_CASE("metrics: class swap maps precision to NPV and recall to specificity") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    BinaryConfusion c{1 + rng() % 50, 1 + rng() % 50, 1 + rng() % 50, 1 + rng() % 50};
    const auto direct = stats::compute_metrics(c);
    const auto swapped = stats::compute_metrics({c.tn, c.fn, c.tp, c.fp});
    const double npv = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fn);
    CHECK(swapped.precision == doctest::Approx(npv).epsilon(1e-12));
    CHECK(swapped.recall_sensitivity == doctest::Approx(direct.specificity).epsilon(1e-12));
    CHECK(swapped.specificity == doctest::Approx(direct.recall_sensitivity).epsilon(1e-12));
  }
}

TEST_CASE("roc: perfectly separated scores give AUC 1") {
  const auto curve = stats::roc_auc({0.9, 0.8, 0.2, 0.1}, {1, 1, 0, 0});
  CHECK(curve.auc == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("roc: constant scores give AUC 0.5 under the tie convention") {
  const auto curve = stats::roc_auc({0.5, 0.5, 0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0, 1, 0});
  CHECK(curve.auc == doctest::Approx(0.5).epsilon(1e-12));
  REQUIRE(curve.points.size() == 2);  // (0,0) then a single tie block to (1,1)
}

TEST_CASE("roc: single class is an error") {
  CHECK_THROWS_AS(stats::roc_auc({0.1, 0.2}, {1, 1}), Error);
  CHECK_THROWS_AS(stats::roc_auc({0.1, 0.2}, {0, 0}), Error);
}

TEST_CASE("roc: curve is monotone from (0,0) to (1,1)") {
  std::mt19937_64 rng(11);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 60; ++i) {
    scores.push_back(static_cast<double>(rng() % 10) / 10.0);
    labels.push_back(static_cast<int>(rng() % 2));
  }
  labels[0] = 1;
  labels[1] = 0;
  const auto curve = stats::roc_auc(scores, labels);
  CHECK(curve.points.front().fpr == 0.0);
  CHECK(curve.points.front().tpr == 0.0);
  CHECK(curve.points.back().fpr == 1.0);
  CHECK(curve.points.back().tpr == 1.0);
  for (std::size_t i = 1; i < curve.points.size(); ++i) {
    CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
    CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
  }
}

TEST_CASE("roc: trapezoid equals the pairwise oracle, with heavy ties") {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 5 + rng() % 120;
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (std::size_t i = 0; i < n; ++i) {
      scores.push_back(static_cast<double>(rng() % 6) / 5.0);  // few distinct values
      const int label = static_cast<int>(rng() % 2);
      labels.push_back(label);
      (label ? has_pos : has_neg) = true;
    }
    if (!has_pos || !has_neg) continue;
    const double expected = testing::auc_pairwise_oracle(scores, labels);
    CHECK(std::abs(stats::roc_auc(scores, labels).auc - expected) < 1e-12);
  }
}

TEST_CASE("roc: AUC of negated scores complements the original") {
  std::mt19937_64 rng(13);
  std::vector<double> scores;
  std::vector<int> labels;
  for (int i = 0; i < 101; ++i) {
    scores.push_back(static_cast<double>(rng() % 17));
    labels.push_back(static_cast<int>(rng() % 2));
  }
  labels[0] = 1;
  labels[1] = 0;
  std::vector<double> negated;
  for (double s : scores) negated.push_back(-s);
  const double sum = stats::roc_auc(scores, labels).auc + stats::roc_auc(negated, labels).auc;
  CHECK(std::abs(sum - 1.0) < 1e-12);
}

TEST_CASE("aggregate: five identical runs have std 0.000") {
  const auto agg = stats::aggregate_values({0.7, 0.7, 0.7, 0.7, 0.7});
  CHECK(agg.mean == doctest::Approx(0.7));
  CHECK(agg.stddev == 0.0);
  CHECK(agg.formatted == "0.700 ± 0.000");
}

TEST_CASE("aggregate: {0.8, 1.0} gives mean 0.900, sample std sqrt(0.02)") {
  const auto agg = stats::aggregate_values({0.8, 1.0});
  CHECK(agg.mean == doctest::Approx(0.9).epsilon(1e-12));
  CHECK(agg.stddev == doctest::Approx(std::sqrt(0.02)).epsilon(1e-12));
  CHECK(agg.formatted == "0.900 ± 0.141");
}

TEST_CASE("aggregate: single run is flagged, empty is an error") {
  const auto agg = stats::aggregate_values({0.42});
  CHECK(agg.mean == 0.42);
  CHECK(agg.stddev == 0.0);
  CHECK(agg.single_run);
  CHECK_THROWS_AS(stats::aggregate_values({}), Error);
  CHECK_THROWS_AS(stats::aggregate_runs({}), Error);
}

TEST_CASE("aggregate_runs: AUC aggregates only when every run has one") {
  stats::MetricSet with_auc;
  with_auc.auc = 0.8;
  stats::MetricSet without;
  const auto agg = stats::aggregate_runs({with_auc, without});
  CHECK(!agg.auc.has_value());
  const auto agg2 = stats::aggregate_runs({with_auc, with_auc});
  REQUIRE(agg2.auc.has_value());
  CHECK(agg2.auc->mean == doctest::Approx(0.8));
}

TEST_CASE("frequency comparison: enriched term is starred, direction correct") {
  const auto lexicon = text::load_default_lexicon();
  std::vector<std::set<std::string>> cohort_a(20, std::set<std::string>{"fever"});
  std::vector<std::set<std::string>> cohort_b(20);

  const auto rows = stats::frequency_comparison(cohort_a, cohort_b, lexicon);
  const auto fever = std::find_if(rows.begin(), rows.end(),
                                  [](const auto& r) { return r.term == "fever"; });
  REQUIRE(fever != rows.end());
  CHECK(fever->prop_a == 1.0);
  CHECK(fever->prop_b == 0.0);
  const double expected = testing::fisher_enumeration_oracle({20, 0, 0, 20});
  CHECK(std::abs(fever->p_value - expected) < 1e-10);
  CHECK(fever->stars == "****");
}

TEST_CASE("frequency comparison: identical cohorts give p = 1 everywhere") {
  const auto lexicon = text::load_default_lexicon();
  std::vector<std::set<std::string>> cohort(10, std::set<std::string>{"cough", "pneumonia"});
  const auto rows = stats::frequency_comparison(cohort, cohort, lexicon);
  for (const auto& row : rows) {
    CHECK(row.p_value == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(row.stars.empty());
  }
  CHECK(rows.size() == lexicon.entries.size());
}

TEST_CASE("frequency comparison: empty cohort is an error") {
  const auto lexicon = text::load_default_lexicon();
  std::vector<std::set<std::string>> cohort(3);
  CHECK_THROWS_AS(stats::frequency_comparison({}, cohort, lexicon), Error);
  CHECK_THROWS_AS(stats::frequency_comparison(cohort, {}, lexicon), Error);
}

TEST_CASE("significance star ladder") {
  CHECK(stats::significance_stars(0.2) == "");
  CHECK(stats::significance_stars(0.05) == "*");
  CHECK(stats::significance_stars(0.01) == "**");
  CHECK(stats::significance_stars(0.001) == "***");
  CHECK(stats::significance_stars(0.0001) == "****");
  CHECK(stats::significance_stars(1e-9) == "****");
}
