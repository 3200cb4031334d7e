#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "figmine/stats.hpp"

namespace figmine::report {

/// One bar-chart row; the b-side is absent for single-cohort reports.
struct FrequencyRow {
  std::string term;
  std::uint64_t present_a = 0, total_a = 0;
  double prop_a = 0.0;
  std::optional<std::uint64_t> present_b;
  std::optional<std::uint64_t> total_b;
  std::optional<double> prop_b;
  std::optional<double> p_value;
  std::string stars;
};

std::vector<FrequencyRow> rows_from_comparison(const std::vector<stats::TermComparison>& comparison,
                                               text::Category category);

/// Single-cohort frequencies in lexicon order.
std::vector<FrequencyRow> rows_from_counts(const std::vector<std::set<std::string>>& cohort,
                                           const text::Lexicon& lexicon, text::Category category);

nlohmann::ordered_json report_json(const std::string& label_a,
                                   const std::optional<std::string>& label_b,
                                   std::uint64_t items_a, std::optional<std::uint64_t> items_b,
                                   const std::vector<FrequencyRow>& symptoms,
                                   const std::vector<FrequencyRow>& findings);

/// Grouped horizontal bar chart of per-term proportions with significance
/// stars; byte-stable for identical inputs.
std::string render_frequency_svg(const std::string& title, const std::vector<FrequencyRow>& rows,
                                 const std::string& label_a,
                                 const std::optional<std::string>& label_b);

}  // namespace figmine::report
