#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "figmine/textmine.hpp"

namespace figmine::stats {

/// Rows = cohorts, columns = term present/absent.
struct ContingencyTable2x2 {
  std::uint64_t a = 0, b = 0, c = 0, d = 0;
  std::uint64_t total() const { return a + b + c + d; }
};

/// Two-sided Fisher's exact test by the method of small p-values: the sum of
/// hypergeometric probabilities of every margin-preserving table whose point
/// probability is <= the observed one (with 1e-7 relative slack). Computed in
/// log space with accumulated log factorials; result clamped to [0, 1].
/// Throws EmptyTable when all cells are zero.
double fisher_exact(const ContingencyTable2x2& table);

struct BinaryConfusion {
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
};

struct MetricSet {
  std::optional<double> auc;
  double precision = 0.0;
  double recall_sensitivity = 0.0;
  double specificity = 0.0;
  double f1 = 0.0;
  // names of metrics whose denominator was 0 (value reported as 0)
  std::vector<std::string> warnings;
};

MetricSet compute_metrics(const BinaryConfusion& confusion);

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // (0,0) .. (1,1), both coordinates non-decreasing
  double auc = 0.0;
};

/// Threshold sweep over distinct scores, trapezoidal AUC (ties get 1/2
/// credit, matching the Mann-Whitney formulation). Labels are 0/1.
/// Throws SingleClass unless both classes occur.
RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct AggregatedValue {
  double mean = 0.0;
  double stddev = 0.0;  // sample std; 0 when only one run
  bool single_run = false;
  std::string formatted;  // "0.891 ± 0.012"
};

/// Mean ± sample standard deviation. Throws EmptyRuns on empty input.
AggregatedValue aggregate_values(const std::vector<double>& values);

struct AggregatedMetrics {
  std::optional<AggregatedValue> auc;  // absent unless every run has an AUC
  AggregatedValue precision, recall_sensitivity, specificity, f1;
};

AggregatedMetrics aggregate_runs(const std::vector<MetricSet>& runs);

/// "*" p<=0.05, "**" p<=0.01, "***" p<=0.001, "****" p<=0.0001, else "".
std::string significance_stars(double p);

struct TermComparison {
  std::string term;
  text::Category category = text::Category::symptom;
  std::uint64_t present_a = 0, total_a = 0;
  std::uint64_t present_b = 0, total_b = 0;
  double prop_a = 0.0, prop_b = 0.0;
  double p_value = 1.0;
  std::string stars;
};

/// Per-term cohort comparison. Each cohort item is the set of canonical
/// terms with a positive mention in one article (or figure); the unit of
/// frequency is presence, counted once per item.
/// Throws EmptyCohort when either cohort has no items.
std::vector<TermComparison> frequency_comparison(
    const std::vector<std::set<std::string>>& cohort_a,
    const std::vector<std::set<std::string>>& cohort_b, const text::Lexicon& lexicon);

}  // namespace figmine::stats
