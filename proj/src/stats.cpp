#include "figmine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "figmine/errors.hpp"

namespace figmine::stats {

namespace {

// log(n!) by accumulated log sums, grown on demand.
double log_factorial(std::uint64_t n) {
  thread_local std::vector<double> cache{0.0};  // cache[k] = log(k!)
  while (cache.size() <= n) {
    cache.push_back(cache.back() + std::log(static_cast<double>(cache.size())));
  }
  return cache[n];
}

double log_choose(std::uint64_t n, std::uint64_t k) {
  return log_factorial(n) - log_factorial(k) - log_factorial(n - k);
}

}  // namespace

double fisher_exact(const ContingencyTable2x2& table) {
  const std::uint64_t n = table.total();
  if (n == 0) raise(Errc::EmptyTable, "contingency table has no observations");

  const std::uint64_t row1 = table.a + table.b;
  const std::uint64_t row2 = table.c + table.d;
  const std::uint64_t col1 = table.a + table.c;
  const std::uint64_t col2 = table.b + table.d;
  // A zero margin admits exactly one table; nothing can be more extreme.
  if (row1 == 0 || row2 == 0 || col1 == 0 || col2 == 0) return 1.0;

  const std::uint64_t lo = col1 > row2 ? col1 - row2 : 0;
  const std::uint64_t hi = std::min(row1, col1);
  const double log_denominator = log_choose(n, col1);
  auto log_prob = [&](std::uint64_t x) {
    return log_choose(row1, x) + log_choose(row2, col1 - x) - log_denominator;
  };

  const double observed = log_prob(table.a);
  const double cutoff = observed + std::log1p(1e-7);
  double p = 0.0;
  for (std::uint64_t x = lo; x <= hi; ++x) {
    const double lp = log_prob(x);
    if (lp <= cutoff) p += std::exp(lp);
  }
  return std::clamp(p, 0.0, 1.0);
}

namespace {

double ratio_or_zero(std::uint64_t numerator, std::uint64_t denominator, const char* name,
                     std::vector<std::string>* warnings) {
  if (denominator == 0) {
    warnings->push_back(name);
    return 0.0;
  }
  return static_cast<double>(numerator) / static_cast<double>(denominator);
}

}  // namespace

MetricSet compute_metrics(const BinaryConfusion& c) {
  MetricSet m;
  m.precision = ratio_or_zero(c.tp, c.tp + c.fp, "precision", &m.warnings);
  m.recall_sensitivity = ratio_or_zero(c.tp, c.tp + c.fn, "recall_sensitivity", &m.warnings);
  m.specificity = ratio_or_zero(c.tn, c.tn + c.fp, "specificity", &m.warnings);
  const double pr_sum = m.precision + m.recall_sensitivity;
  if (pr_sum == 0.0) {
    m.warnings.push_back("f1");
    m.f1 = 0.0;
  } else {
    m.f1 = 2.0 * m.precision * m.recall_sensitivity / pr_sum;
  }
  return m;
}

RocCurve roc_auc(const std::vector<double>& scores, const std::vector<int>& labels) {
  if (scores.size() != labels.size()) {
    raise(Errc::DimensionMismatch, "scores and labels differ in length");
  }
  std::uint64_t positives = 0, negatives = 0;
  for (int label : labels) (label != 0 ? positives : negatives) += 1;
  if (positives == 0 || negatives == 0) {
    raise(Errc::SingleClass, "ROC needs both classes present");
  }

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t lhs, std::size_t rhs) { return scores[lhs] > scores[rhs]; });

  RocCurve curve;
  curve.points.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // one threshold per distinct score: consume the whole tie group
    const double threshold = scores[order[i]];
    while (i < order.size() && scores[order[i]] == threshold) {
      (labels[order[i]] != 0 ? tp : fp) += 1;
      ++i;
    }
    curve.points.push_back({static_cast<double>(fp) / static_cast<double>(negatives),
                            static_cast<double>(tp) / static_cast<double>(positives)});
  }

  double auc = 0.0;
  for (std::size_t k = 1; k < curve.points.size(); ++k) {
    const auto& prev = curve.points[k - 1];
    const auto& cur = curve.points[k];
    auc += (cur.fpr - prev.fpr) * (cur.tpr + prev.tpr) / 2.0;
  }
  curve.auc = auc;
  return curve;
}

AggregatedValue aggregate_values(const std::vector<double>& values) {
  if (values.empty()) raise(Errc::EmptyRuns, "no runs to aggregate");

  AggregatedValue agg;
  agg.mean = std::accumulate(values.begin(), values.end(), 0.0) / values.size();
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - agg.mean) * (v - agg.mean);
    agg.stddev = std::sqrt(ss / (values.size() - 1));
  } else {
    agg.single_run = true;
  }
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.3f ± %.3f", agg.mean, agg.stddev);
  agg.formatted = buffer;
  return agg;
}

AggregatedMetrics aggregate_runs(const std::vector<MetricSet>& runs) {
  if (runs.empty()) raise(Errc::EmptyRuns, "no runs to aggregate");

  auto collect = [&](auto member) {
    std::vector<double> values;
    for (const auto& run : runs) values.push_back(run.*member);
    return aggregate_values(values);
  };

  AggregatedMetrics agg;
  agg.precision = collect(&MetricSet::precision);
  agg.recall_sensitivity = collect(&MetricSet::recall_sensitivity);
  agg.specificity = collect(&MetricSet::specificity);
  agg.f1 = collect(&MetricSet::f1);
  if (std::all_of(runs.begin(), runs.end(), [](const auto& r) { return r.auc.has_value(); })) {
    std::vector<double> values;
    for (const auto& run : runs) values.push_back(*run.auc);
    agg.auc = aggregate_values(values);
  }
  return agg;
}

std::string significance_stars(double p) {
  if (p <= 0.0001) return "****";
  if (p <= 0.001) return "***";
  if (p <= 0.01) return "**";
  if (p <= 0.05) return "*";
  return "";
}

std::vector<TermComparison> frequency_comparison(
    const std::vector<std::set<std::string>>& cohort_a,
    const std::vector<std::set<std::string>>& cohort_b, const text::Lexicon& lexicon) {
  if (cohort_a.empty() || cohort_b.empty()) {
    raise(Errc::EmptyCohort, "both cohorts need at least one item");
  }

  std::vector<TermComparison> rows;
  rows.reserve(lexicon.entries.size());
  for (const auto& entry : lexicon.entries) {
    TermComparison row;
    row.term = entry.canonical;
    row.category = entry.category;
    row.total_a = cohort_a.size();
    row.total_b = cohort_b.size();
    for (const auto& item : cohort_a) row.present_a += item.count(entry.canonical);
    for (const auto& item : cohort_b) row.present_b += item.count(entry.canonical);
    row.prop_a = static_cast<double>(row.present_a) / static_cast<double>(row.total_a);
    row.prop_b = static_cast<double>(row.present_b) / static_cast<double>(row.total_b);
    row.p_value = fisher_exact(ContingencyTable2x2{row.present_a, row.total_a - row.present_a,
                                                   row.present_b, row.total_b - row.present_b});
    row.stars = significance_stars(row.p_value);
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace figmine::stats
