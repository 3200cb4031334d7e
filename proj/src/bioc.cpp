#include "figmine/bioc.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>

#include <expat.h>

#include "figmine/errors.hpp"

namespace figmine::bioc {

namespace {

const std::map<std::string_view, SectionType>& section_table() {
  static const std::map<std::string_view, SectionType> table = {
      {"TITLE", SectionType::TITLE},       {"ABSTRACT", SectionType::ABSTRACT},
      {"INTRO", SectionType::INTRO},       {"METHODS", SectionType::METHODS},
      {"RESULTS", SectionType::RESULTS},   {"DISCUSS", SectionType::DISCUSS},
      {"CONCL", SectionType::CONCL},       {"CASE", SectionType::CASE},
      {"FIG", SectionType::FIG},           {"TABLE", SectionType::TABLE},
      {"REF", SectionType::REF},           {"SUPPL", SectionType::SUPPL},
      {"APPENDIX", SectionType::APPENDIX}, {"ACK_FUND", SectionType::ACK_FUND},
      {"ABBR", SectionType::ABBR},         {"COMP_INT", SectionType::COMP_INT},
      {"AUTH_CONT", SectionType::AUTH_CONT}, {"KEYWORD", SectionType::KEYWORD},
      {"REVIEW_INFO", SectionType::REVIEW_INFO},
  };
  return table;
}

}  // namespace

SectionType section_type_from_string(std::string_view s) {
  std::string upper(s);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return std::toupper(c); });
  auto it = section_table().find(upper);
  return it == section_table().end() ? SectionType::OTHER : it->second;
}

const char* to_string(SectionType t) {
  for (const auto& [name, type] : section_table()) {
    if (type == t) return name.data();
  }
  return "OTHER";
}

bool valid_pmcid(std::string_view pmcid) {
  if (pmcid.size() < 4 || pmcid.substr(0, 3) != "PMC") return false;
  return std::all_of(pmcid.begin() + 3, pmcid.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

namespace {

// Bytes consumed by a Unicode space at text[i], or 0. Covers NBSP, the
// U+2000..U+200A family, narrow NBSP, math space, and the ideographic
// space, which all occur in "unicode"-encoded PMC exports.
std::size_t unicode_space_at(std::string_view text, std::size_t i) {
  const auto b = [&](std::size_t k) { return static_cast<unsigned char>(text[i + k]); };
  if (text.size() - i >= 2 && b(0) == 0xC2 && b(1) == 0xA0) return 2;  // U+00A0
  if (text.size() - i >= 3 && b(0) == 0xE2 && b(1) == 0x80 &&
      ((b(2) >= 0x80 && b(2) <= 0x8A) || b(2) == 0xAF)) {
    return 3;  // U+2000..U+200A, U+202F
  }
  if (text.size() - i >= 3 && b(0) == 0xE2 && b(1) == 0x81 && b(2) == 0x9F) return 3;  // U+205F
  if (text.size() - i >= 3 && b(0) == 0xE3 && b(1) == 0x80 && b(2) == 0x80) return 3;  // U+3000
  return 0;
}

}  // namespace

std::string normalize_whitespace(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    std::size_t wide = 0;
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
      pending_space = !out.empty();
      ++i;
    } else if ((wide = unicode_space_at(text, i)) > 0) {
      pending_space = !out.empty();
      i += wide;
    } else {
      if (pending_space) out.push_back(' ');
      pending_space = false;
      out.push_back(c);
      ++i;
    }
  }
  return out;
}

int parse_caption_figure_number(std::string_view caption, std::string* raw_label) {
  std::size_t i = 0;
  auto starts_with_ci = [&](std::string_view word) {
    if (caption.size() - i < word.size()) return false;
    for (std::size_t k = 0; k < word.size(); ++k) {
      if (std::tolower(static_cast<unsigned char>(caption[i + k])) != word[k]) return false;
    }
    return true;
  };

  std::size_t word_len = 0;
  if (starts_with_ci("figure")) {
    word_len = 6;
  } else if (starts_with_ci("fig")) {
    word_len = 3;
  } else {
    return 0;
  }
  i += word_len;
  if (i < caption.size() && caption[i] == 's') ++i;
  if (i < caption.size() && caption[i] == '.') ++i;
  while (i < caption.size() && caption[i] == ' ') ++i;

  std::size_t digits_begin = i;
  while (i < caption.size() && std::isdigit(static_cast<unsigned char>(caption[i]))) ++i;
  if (i == digits_begin) return 0;

  int number = 0;
  for (std::size_t k = digits_begin; k < i; ++k) number = number * 10 + (caption[k] - '0');
  if (raw_label) *raw_label = std::string(caption.substr(0, i));
  return number;
}

namespace {

struct RawPassage {
  std::map<std::string, std::string> infons;
  std::size_t offset = 0;
  std::string text;
};

struct ParserState {
  std::vector<std::string> stack;
  bool in_document = false;
  bool document_done = false;

  std::string document_id;
  std::map<std::string, std::string> document_infons;
  std::vector<RawPassage> passages;

  RawPassage current_passage;
  bool in_passage = false;
  std::string current_infon_key;
  std::string text_buffer;  // for id / infon / offset / text elements
  bool capture_text = false;
};

void XMLCALL start_element(void* user, const XML_Char* name, const XML_Char** attrs) {
  auto* st = static_cast<ParserState*>(user);
  st->stack.emplace_back(name);
  std::string_view element = st->stack.back();

  if (element == "document" && !st->document_done) {
    st->in_document = true;
  } else if (st->in_document && element == "passage") {
    st->in_passage = true;
    st->current_passage = RawPassage{};
  } else if (st->in_document && (element == "id" || element == "offset" || element == "text" ||
                                 element == "infon")) {
    st->text_buffer.clear();
    st->capture_text = true;
    if (element == "infon") {
      st->current_infon_key.clear();
      for (int i = 0; attrs[i]; i += 2) {
        if (std::string_view(attrs[i]) == "key") st->current_infon_key = attrs[i + 1];
      }
    }
  }
}

void XMLCALL end_element(void* user, const XML_Char* name) {
  auto* st = static_cast<ParserState*>(user);
  std::string_view element(name);

  if (st->in_document && !st->document_done) {
    if (element == "id" && !st->in_passage) {
      st->document_id = st->text_buffer;
    } else if (element == "infon") {
      if (!st->current_infon_key.empty()) {
        auto& infons = st->in_passage ? st->current_passage.infons : st->document_infons;
        infons[st->current_infon_key] = st->text_buffer;
      }
    } else if (element == "offset" && st->in_passage) {
      std::size_t off = 0;
      for (char c : st->text_buffer) {
        if (std::isdigit(static_cast<unsigned char>(c))) off = off * 10 + (c - '0');
      }
      st->current_passage.offset = off;
    } else if (element == "text" && st->in_passage) {
      st->current_passage.text = st->text_buffer;
    } else if (element == "passage") {
      st->passages.push_back(std::move(st->current_passage));
      st->in_passage = false;
    } else if (element == "document") {
      st->in_document = false;
      st->document_done = true;  // only the first document is read
    }
  }
  st->capture_text = false;
  if (!st->stack.empty()) st->stack.pop_back();
}

void XMLCALL character_data(void* user, const XML_Char* data, int len) {
  auto* st = static_cast<ParserState*>(user);
  if (st->capture_text) st->text_buffer.append(data, static_cast<std::size_t>(len));
}

std::string find_infon(const ParserState& st, const std::vector<std::string>& keys) {
  for (const auto& key : keys) {
    auto it = st.document_infons.find(key);
    if (it != st.document_infons.end() && !it->second.empty()) return it->second;
  }
  // Front-matter passages carry article metadata in PMC BioC exports.
  for (const auto& passage : st.passages) {
    for (const auto& key : keys) {
      auto it = passage.infons.find(key);
      if (it != passage.infons.end() && !it->second.empty()) return it->second;
    }
  }
  return {};
}

std::string build_pub_date(const ParserState& st) {
  std::string year = find_infon(st, {"year"});
  if (year.empty()) return {};
  auto pad2 = [](std::string v) {
    if (v.size() == 1) v.insert(v.begin(), '0');
    return v;
  };
  std::string month = find_infon(st, {"month"});
  std::string day = find_infon(st, {"day"});
  std::string date = year;
  date += "-" + (month.empty() ? "01" : pad2(month));
  date += "-" + (day.empty() ? "01" : pad2(day));
  return date;
}

}  // namespace

ArticleDocument parse_bioc(std::string_view xml_bytes) {
  XML_Parser parser = XML_ParserCreate(nullptr);
  if (!parser) raise(Errc::IoError, "expat init failed");

  ParserState st;
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(parser, start_element, end_element);
  XML_SetCharacterDataHandler(parser, character_data);

  const XML_Status status = XML_Parse(parser, xml_bytes.data(),
                                      static_cast<int>(xml_bytes.size()), /*isFinal=*/1);
  const XML_Error code = XML_GetErrorCode(parser);
  XML_ParserFree(parser);

  if (status != XML_STATUS_OK) {
    const std::string detail = XML_ErrorString(code);
    if (code == XML_ERROR_UNKNOWN_ENCODING || code == XML_ERROR_INCORRECT_ENCODING ||
        code == XML_ERROR_PARTIAL_CHAR) {
      raise(Errc::EncodingError, detail);
    }
    raise(Errc::MalformedXml, detail);
  }
  if (st.document_id.empty() && st.document_infons.find("article-id_pmc") == st.document_infons.end()) {
    raise(Errc::MissingRequiredField, "document has no id element");
  }

  ArticleDocument doc;
  std::string id = st.document_id;
  if (id.empty()) id = st.document_infons.at("article-id_pmc");
  doc.pmcid = id.rfind("PMC", 0) == 0 ? id : "PMC" + id;
  if (!valid_pmcid(doc.pmcid)) {
    raise(Errc::MissingRequiredField, "document id is not a PMC accession: " + id);
  }

  doc.doi = find_infon(st, {"article-id_doi", "doi"});
  doc.journal = find_infon(st, {"journal"});
  doc.license = find_infon(st, {"license"});
  doc.pub_date = build_pub_date(st);

  // Passages: drop ones that are empty after whitespace normalization.
  struct FigPassage {
    std::size_t passage_index;
    std::string type;  // "fig_title_caption", "fig_caption", ...
    std::string file;
  };
  std::vector<FigPassage> fig_passages;
  for (const auto& raw : st.passages) {
    std::string text = normalize_whitespace(raw.text);
    if (text.empty()) continue;

    Passage passage;
    auto it = raw.infons.find("section_type");
    passage.section_type =
        it == raw.infons.end() ? SectionType::OTHER : section_type_from_string(it->second);
    passage.text = std::move(text);
    passage.offset = raw.offset;
    doc.passages.push_back(std::move(passage));
    const Passage& stored = doc.passages.back();

    if (stored.section_type == SectionType::TITLE && doc.title.empty()) {
      doc.title = stored.text;
    }
    if (stored.section_type == SectionType::FIG) {
      auto type_it = raw.infons.find("type");
      auto file_it = raw.infons.find("file");
      if (file_it == raw.infons.end()) file_it = raw.infons.find("graphic_ref");
      fig_passages.push_back({doc.passages.size() - 1,
                              type_it == raw.infons.end() ? "" : type_it->second,
                              file_it == raw.infons.end() ? "" : file_it->second});
    }
  }
  if (doc.title.empty()) doc.title = find_infon(st, {"title"});

  // PMC exports often split one figure into a fig_title_caption passage and
  // a fig_caption passage sharing the same file infon. Consecutive FIG
  // passages with one non-empty file form one figure; the caption is the
  // caption-typed (else longest) passage of the group.
  std::vector<std::vector<const FigPassage*>> groups;
  for (const auto& fp : fig_passages) {
    const bool extends_group = !groups.empty() && !fp.file.empty() &&
                               groups.back().back()->file == fp.file;
    if (extends_group) {
      groups.back().push_back(&fp);
    } else {
      groups.push_back({&fp});
    }
  }

  std::size_t fig_ordinal = 0;
  std::set<std::pair<int, std::string>> seen_figures;
  for (const auto& group : groups) {
    ++fig_ordinal;
    const FigPassage* caption = nullptr;
    for (const FigPassage* fp : group) {
      const bool caption_typed =
          fp->type.find("caption") != std::string::npos && fp->type.find("title") == std::string::npos;
      if (caption_typed) {
        caption = fp;
        break;
      }
    }
    if (!caption) {
      caption = *std::max_element(group.begin(), group.end(), [&](const auto* a, const auto* b) {
        return doc.passages[a->passage_index].text.size() <
               doc.passages[b->passage_index].text.size();
      });
    }

    FigureBlock figure;
    figure.caption_text = doc.passages[caption->passage_index].text;
    figure.caption_passage = caption->passage_index;
    for (const FigPassage* fp : group) {
      figure.figure_number =
          parse_caption_figure_number(doc.passages[fp->passage_index].text, &figure.raw_label);
      if (figure.figure_number > 0) break;
    }
    if (figure.figure_number == 0) {
      // Unparseable label ("Graphical abstract" etc.): number by order of
      // appearance so downstream linking keeps a stable key.
      figure.figure_number = static_cast<int>(fig_ordinal);
      figure.raw_label =
          figure.caption_text.substr(0, std::min<std::size_t>(figure.caption_text.size(), 40));
    }
    figure.graphic_ref = !group.front()->file.empty()
                             ? group.front()->file
                             : "fig" + std::to_string(figure.figure_number);
    // One FigureBlock per (figure_number, graphic_ref); repeats are dropped.
    if (seen_figures.insert({figure.figure_number, figure.graphic_ref}).second) {
      doc.figures.push_back(std::move(figure));
    }
  }

  // Offsets must be strictly increasing and non-overlapping against the
  // normalized text. Reassign sequentially if the source violates that.
  bool offsets_ok = true;
  for (std::size_t i = 1; i < doc.passages.size(); ++i) {
    if (doc.passages[i].offset < doc.passages[i - 1].offset + doc.passages[i - 1].text.size()) {
      offsets_ok = false;
      break;
    }
  }
  if (!offsets_ok) {
    std::size_t cursor = 0;
    for (auto& passage : doc.passages) {
      passage.offset = cursor;
      cursor += passage.text.size() + 1;
    }
  }
  return doc;
}

void to_json(nlohmann::json& j, const Passage& p) {
  j = nlohmann::json{
      {"section_type", to_string(p.section_type)}, {"text", p.text}, {"offset", p.offset}};
}

void from_json(const nlohmann::json& j, Passage& p) {
  p.section_type = section_type_from_string(j.at("section_type").get<std::string>());
  p.text = j.at("text").get<std::string>();
  p.offset = j.at("offset").get<std::size_t>();
}

void to_json(nlohmann::json& j, const FigureBlock& f) {
  j = nlohmann::json{{"figure_number", f.figure_number},
                     {"raw_label", f.raw_label},
                     {"caption_text", f.caption_text},
                     {"graphic_ref", f.graphic_ref},
                     {"caption_passage", f.caption_passage}};
}

void from_json(const nlohmann::json& j, FigureBlock& f) {
  f.figure_number = j.at("figure_number").get<int>();
  f.raw_label = j.at("raw_label").get<std::string>();
  f.caption_text = j.at("caption_text").get<std::string>();
  f.graphic_ref = j.at("graphic_ref").get<std::string>();
  f.caption_passage = j.at("caption_passage").get<std::size_t>();
}

void to_json(nlohmann::json& j, const ArticleDocument& doc) {
  j = nlohmann::json{{"pmcid", doc.pmcid},       {"doi", doc.doi},
                     {"title", doc.title},       {"journal", doc.journal},
                     {"pub_date", doc.pub_date}, {"license", doc.license},
                     {"passages", doc.passages}, {"figures", doc.figures}};
}

void from_json(const nlohmann::json& j, ArticleDocument& doc) {
  doc.pmcid = j.at("pmcid").get<std::string>();
  doc.doi = j.at("doi").get<std::string>();
  doc.title = j.at("title").get<std::string>();
  doc.journal = j.at("journal").get<std::string>();
  doc.pub_date = j.at("pub_date").get<std::string>();
  doc.license = j.at("license").get<std::string>();
  doc.passages = j.at("passages").get<std::vector<Passage>>();
  doc.figures = j.at("figures").get<std::vector<FigureBlock>>();
}

}  // namespace figmine::bioc
