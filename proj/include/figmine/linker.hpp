#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "figmine/bioc.hpp"

namespace figmine::link {

struct LabelMention {
  int figure_number = 0;
  std::optional<char> panel;  // lowercase a-z

  bool operator==(const LabelMention&) const = default;
};

struct FigureReference {
  int figure_number = 0;
  std::optional<char> panel;
  std::size_t passage_index = 0;
  std::size_t begin = 0;  // span within the passage text
  std::size_t end = 0;

  bool operator==(const FigureReference&) const = default;
};

struct ArticleMeta {
  std::string pmcid;
  std::string doi;
  std::string title;
  std::string journal;
  std::string pub_date;
  std::string license;

  bool operator==(const ArticleMeta&) const = default;
};

ArticleMeta meta_of(const bioc::ArticleDocument& doc);

struct LinkedFigure {
  ArticleMeta article;
  bioc::FigureBlock figure;
  std::vector<FigureReference> references;
  // Full texts of the referring passages, passage order, no duplicates.
  std::vector<std::string> referring_text;
};

/// One figure-mention occurrence inside running text.
struct MentionSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<LabelMention> items;
};

/// All figure mentions in `text`: "Fig. 2", "Figures 1-3", "fig 2a, b"...
/// Ranges and enumerations are expanded; accepts the variants
/// {Figure, Figures, Fig., Fig, FIG} case-insensitively and hyphen,
/// en-dash, or em-dash as range separators.
std::vector<MentionSpan> scan_figure_mentions(std::string_view text);

/// (figure_number, panel) pairs denoted by a candidate mention string;
/// empty when the string is not a figure mention.
std::vector<LabelMention> normalize_figure_label(std::string_view raw);

/// References to `figure_number` in non-FIG/TABLE/REF passages.
/// Throws UnknownFigureNumber when the document has no such figure.
std::vector<FigureReference> find_references(const bioc::ArticleDocument& doc, int figure_number);

std::vector<LinkedFigure> link_figures(const bioc::ArticleDocument& doc);

}  // namespace figmine::link
