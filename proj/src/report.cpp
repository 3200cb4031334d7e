#include "figmine/report.hpp"

#include <cstdio>

namespace figmine::report {

namespace {

std::string fmt(const char* format, double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), format, value);
  return buffer;
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<FrequencyRow> rows_from_comparison(const std::vector<stats::TermComparison>& comparison,
                                               text::Category category) {
  std::vector<FrequencyRow> rows;
  for (const auto& c : comparison) {
    if (c.category != category) continue;
    FrequencyRow row;
    row.term = c.term;
    row.present_a = c.present_a;
    row.total_a = c.total_a;
    row.prop_a = c.prop_a;
    row.present_b = c.present_b;
    row.total_b = c.total_b;
    row.prop_b = c.prop_b;
    row.p_value = c.p_value;
    row.stars = c.stars;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<FrequencyRow> rows_from_counts(const std::vector<std::set<std::string>>& cohort,
                                           const text::Lexicon& lexicon, text::Category category) {
  std::vector<FrequencyRow> rows;
  for (const auto& entry : lexicon.entries) {
    if (entry.category != category) continue;
    FrequencyRow row;
    row.term = entry.canonical;
    row.total_a = cohort.size();
    for (const auto& item : cohort) row.present_a += item.count(entry.canonical);
    row.prop_a = cohort.empty() ? 0.0
                                : static_cast<double>(row.present_a) /
                                      static_cast<double>(row.total_a);
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

nlohmann::ordered_json row_json(const FrequencyRow& row) {
  nlohmann::ordered_json j;
  j["term"] = row.term;
  j["present_a"] = row.present_a;
  j["total_a"] = row.total_a;
  j["prop_a"] = row.prop_a;
  if (row.present_b) {
    j["present_b"] = *row.present_b;
    j["total_b"] = *row.total_b;
    j["prop_b"] = *row.prop_b;
    j["p_value"] = *row.p_value;
    j["stars"] = row.stars;
  }
  return j;
}

}  // namespace

nlohmann::ordered_json report_json(const std::string& label_a,
                                   const std::optional<std::string>& label_b,
                                   std::uint64_t items_a, std::optional<std::uint64_t> items_b,
                                   const std::vector<FrequencyRow>& symptoms,
                                   const std::vector<FrequencyRow>& findings) {
  nlohmann::ordered_json j;
  j["cohort_a"] = {{"label", label_a}, {"items", items_a}};
  if (label_b) {
    j["cohort_b"] = {{"label", *label_b}, {"items", items_b.value_or(0)}};
  }
  j["comparison"] = label_b.has_value();
  j["symptoms"] = nlohmann::ordered_json::array();
  for (const auto& row : symptoms) j["symptoms"].push_back(row_json(row));
  j["findings"] = nlohmann::ordered_json::array();
  for (const auto& row : findings) j["findings"].push_back(row_json(row));
  return j;
}

std::string render_frequency_svg(const std::string& title, const std::vector<FrequencyRow>& rows,
                                 const std::string& label_a,
                                 const std::optional<std::string>& label_b) {
  constexpr int kLabelWidth = 200;
  constexpr int kChartWidth = 460;
  constexpr int kStarsWidth = 100;
  constexpr int kRowHeight = 34;
  constexpr int kBarHeight = 12;
  constexpr int kHeaderHeight = 58;
  constexpr const char* kColorA = "#4c72b0";
  constexpr const char* kColorB = "#dd8452";

  const int width = kLabelWidth + kChartWidth + kStarsWidth;
  const int height = kHeaderHeight + kRowHeight * static_cast<int>(rows.size()) + 30;

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
         "\" height=\"" + std::to_string(height) + "\" font-family=\"Helvetica, Arial, sans-serif\">\n";
  svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += "<text x=\"12\" y=\"22\" font-size=\"16\" font-weight=\"bold\">" + escape_xml(title) +
         "</text>\n";

  // legend
  svg += "<rect x=\"12\" y=\"34\" width=\"12\" height=\"12\" fill=\"" + std::string(kColorA) +
         "\"/>\n";
  svg += "<text x=\"30\" y=\"44\" font-size=\"12\">" + escape_xml(label_a) + "</text>\n";
  if (label_b) {
    svg += "<rect x=\"150\" y=\"34\" width=\"12\" height=\"12\" fill=\"" + std::string(kColorB) +
           "\"/>\n";
    svg += "<text x=\"168\" y=\"44\" font-size=\"12\">" + escape_xml(*label_b) + "</text>\n";
  }

  // proportion gridlines at 0, 0.25, 0.5, 0.75, 1
  for (int tick = 0; tick <= 4; ++tick) {
    const int x = kLabelWidth + kChartWidth * tick / 4;
    svg += "<line x1=\"" + std::to_string(x) + "\" y1=\"" + std::to_string(kHeaderHeight) +
           "\" x2=\"" + std::to_string(x) + "\" y2=\"" + std::to_string(height - 24) +
           "\" stroke=\"#dddddd\"/>\n";
    svg += "<text x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(height - 8) +
           "\" font-size=\"10\" text-anchor=\"middle\">" + fmt("%.2f", tick / 4.0) + "</text>\n";
  }

  int y = kHeaderHeight;
  for (const auto& row : rows) {
    const int bar_a_y = y + (label_b ? 4 : (kRowHeight - kBarHeight) / 2);
    svg += "<text x=\"" + std::to_string(kLabelWidth - 8) + "\" y=\"" +
           std::to_string(y + kRowHeight / 2 + 4) +
           "\" font-size=\"11\" text-anchor=\"end\">" + escape_xml(row.term) + "</text>\n";

    const int width_a = static_cast<int>(row.prop_a * kChartWidth + 0.5);
    svg += "<rect x=\"" + std::to_string(kLabelWidth) + "\" y=\"" + std::to_string(bar_a_y) +
           "\" width=\"" + std::to_string(width_a) + "\" height=\"" + std::to_string(kBarHeight) +
           "\" fill=\"" + kColorA + "\"><title>" + escape_xml(row.term) + " " + label_a + " " +
           fmt("%.4f", row.prop_a) + "</title></rect>\n";

    if (label_b && row.prop_b) {
      const int width_b = static_cast<int>(*row.prop_b * kChartWidth + 0.5);
      svg += "<rect x=\"" + std::to_string(kLabelWidth) + "\" y=\"" +
             std::to_string(bar_a_y + kBarHeight + 2) + "\" width=\"" + std::to_string(width_b) +
             "\" height=\"" + std::to_string(kBarHeight) + "\" fill=\"" + kColorB + "\"><title>" +
             escape_xml(row.term) + " " + escape_xml(*label_b) + " " + fmt("%.4f", *row.prop_b) +
             "</title></rect>\n";
    }
    if (!row.stars.empty()) {
      svg += "<text x=\"" + std::to_string(kLabelWidth + kChartWidth + 10) + "\" y=\"" +
             std::to_string(y + kRowHeight / 2 + 5) + "\" font-size=\"13\">" + row.stars +
             "</text>\n";
    }
    y += kRowHeight;
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace figmine::report
