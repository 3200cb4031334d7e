#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace figmine::bioc {

// Closed section-type set used by PMC BioC exports; anything else maps to OTHER.
enum class SectionType {
  TITLE,
  ABSTRACT,
  INTRO,
  METHODS,
  RESULTS,
  DISCUSS,
  CONCL,
  CASE,
  FIG,
  TABLE,
  REF,
  SUPPL,
  APPENDIX,
  ACK_FUND,
  ABBR,
  COMP_INT,
  AUTH_CONT,
  KEYWORD,
  REVIEW_INFO,
  OTHER,
};

SectionType section_type_from_string(std::string_view s);
const char* to_string(SectionType t);

struct Passage {
  SectionType section_type = SectionType::OTHER;
  std::string text;        // whitespace-normalized UTF-8
  std::size_t offset = 0;  // character offset into the document

  bool operator==(const Passage&) const = default;
};

struct FigureBlock {
  int figure_number = 0;        // >= 1
  std::string raw_label;        // label as printed, e.g. "Figure 2"
  std::string caption_text;     // the FIG passage text
  std::string graphic_ref;      // file name / URI of the image asset
  std::size_t caption_passage = 0;  // index into ArticleDocument::passages

  bool operator==(const FigureBlock&) const = default;
};

struct ArticleDocument {
  std::string pmcid;  // "PMC" + digits
  std::string doi;    // empty when absent
  std::string title;
  std::string journal;
  std::string pub_date;  // ISO-8601 date, empty when absent
  std::string license;
  std::vector<Passage> passages;
  std::vector<FigureBlock> figures;

  bool operator==(const ArticleDocument&) const = default;
};

bool valid_pmcid(std::string_view pmcid);

/// Collapse whitespace runs to single spaces and trim the ends.
std::string normalize_whitespace(std::string_view text);

/// Parse one BioC XML document into the article model.
/// Throws MalformedXml, EncodingError, or MissingRequiredField.
ArticleDocument parse_bioc(std::string_view xml_bytes);

/// Parse "Figure 2", "Fig. 3" etc. at the start of a caption.
/// Returns 0 when no figure number can be read.
int parse_caption_figure_number(std::string_view caption, std::string* raw_label);

void to_json(nlohmann::json& j, const Passage& p);
void from_json(const nlohmann::json& j, Passage& p);
void to_json(nlohmann::json& j, const FigureBlock& f);
void from_json(const nlohmann::json& j, FigureBlock& f);
void to_json(nlohmann::json& j, const ArticleDocument& doc);
void from_json(const nlohmann::json& j, ArticleDocument& doc);

}  // namespace figmine::bioc
