#include "figmine/linker.hpp"

#include <algorithm>
#include <cctype>

#include "figmine/errors.hpp"

namespace figmine::link {

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

struct Cursor {
  std::string_view text;
  std::size_t pos = 0;

  bool eof() const { return pos >= text.size(); }
  char peek(std::size_t ahead = 0) const {
    return pos + ahead < text.size() ? text[pos + ahead] : '\0';
  }
  void skip_spaces() {
    while (!eof() && (text[pos] == ' ' || text[pos] == '\t')) ++pos;
  }
};

// "fig", "fig.", "figs", "figs.", "figure", "figures" at a word boundary.
bool match_keyword(Cursor* c) {
  const std::size_t start = c->pos;
  auto take_ci = [&](std::string_view word) {
    if (c->text.size() - c->pos < word.size()) return false;
    for (std::size_t i = 0; i < word.size(); ++i) {
      if (lower(c->text[c->pos + i]) != word[i]) return false;
    }
    c->pos += word.size();
    return true;
  };
  if (!take_ci("fig")) return false;
  take_ci("ure");
  if (c->peek() == 's' || c->peek() == 'S') ++c->pos;
  // keyword must end at a word boundary ("figment" is not a mention)
  if (!c->eof() && is_word_char(c->peek())) {
    c->pos = start;
    return false;
  }
  if (c->peek() == '.') ++c->pos;
  return true;
}

// Range separator: '-', en dash, or em dash (publisher typography varies).
bool match_dash(Cursor* c) {
  if (c->peek() == '-') {
    ++c->pos;
    return true;
  }
  const std::string_view rest = c->text.substr(c->pos);
  if (rest.size() >= 3 && rest[0] == '\xe2' && rest[1] == '\x80' &&
      (rest[2] == '\x93' || rest[2] == '\x94')) {
    c->pos += 3;
    return true;
  }
  return false;
}

struct Item {
  int number = 0;
  std::optional<char> panel;
};

// NUM with optional single trailing panel letter, e.g. "2" or "2a".
bool match_item(Cursor* c, Item* item) {
  const std::size_t start = c->pos;
  if (!std::isdigit(static_cast<unsigned char>(c->peek()))) return false;
  long number = 0;
  while (std::isdigit(static_cast<unsigned char>(c->peek()))) {
    number = number * 10 + (c->peek() - '0');
    if (number > 9999) {  // not a plausible figure number
      c->pos = start;
      return false;
    }
    ++c->pos;
  }
  std::optional<char> panel;
  if (std::isalpha(static_cast<unsigned char>(c->peek())) && !is_word_char(c->peek(1))) {
    panel = lower(c->peek());
    ++c->pos;
  }
  if (is_word_char(c->peek()) || number < 1) {  // "2nd", "3D", "0" — not figure items
    c->pos = start;
    return false;
  }
  item->number = static_cast<int>(number);
  item->panel = panel;
  return true;
}

// ",", "and", "&", ", and" between items.
bool match_separator(Cursor* c) {
  const std::size_t start = c->pos;
  c->skip_spaces();
  bool any = false;
  if (c->peek() == ',') {
    ++c->pos;
    c->skip_spaces();
    any = true;
  }
  if (c->peek() == '&') {
    ++c->pos;
    any = true;
  } else if ((lower(c->peek()) == 'a') && lower(c->peek(1)) == 'n' && lower(c->peek(2)) == 'd' &&
             !is_word_char(c->peek(3))) {
    c->pos += 3;
    any = true;
  }
  if (any) {
    c->skip_spaces();
    return true;
  }
  c->pos = start;
  return false;
}

void expand_range(const Item& from, const Item& to, std::vector<LabelMention>* items) {
  if (from.number == to.number && from.panel && to.panel && *from.panel <= *to.panel) {
    for (char p = *from.panel; p <= *to.panel; ++p) {
      items->push_back({from.number, p});
    }
    return;
  }
  if (!from.panel && !to.panel && to.number > from.number && to.number - from.number <= 50) {
    for (int n = from.number; n <= to.number; ++n) items->push_back({n, std::nullopt});
    return;
  }
  items->push_back({from.number, from.panel});
  items->push_back({to.number, to.panel});
}

// Parses one full mention starting at the cursor; the cursor must sit on the
// keyword. Returns true and fills `out` on success, leaving the cursor just
// past the last consumed item.
bool parse_mention(Cursor* c, MentionSpan* out) {
  const std::size_t begin = c->pos;
  if (!match_keyword(c)) return false;
  c->skip_spaces();

  std::vector<LabelMention> items;
  std::size_t last_item_end = 0;
  Item previous{};
  bool first = true;

  for (;;) {
    Cursor attempt = *c;
    if (!first && !match_separator(&attempt)) break;

    Item item{};
    if (match_item(&attempt, &item)) {
      // range: "1-3", "2a-c"
      Cursor range_cursor = attempt;
      range_cursor.skip_spaces();
      if (match_dash(&range_cursor)) {
        range_cursor.skip_spaces();
        Item to{};
        bool have_to = match_item(&range_cursor, &to);
        if (!have_to && item.panel &&
            std::isalpha(static_cast<unsigned char>(range_cursor.peek())) &&
            !is_word_char(range_cursor.peek(1))) {
          to = Item{item.number, lower(range_cursor.peek())};
          ++range_cursor.pos;
          have_to = true;
        }
        if (have_to) {
          expand_range(item, to, &items);
          *c = range_cursor;
          last_item_end = c->pos;
          previous = to;
          first = false;
          continue;
        }
      }
      items.push_back({item.number, item.panel});
      *c = attempt;
      last_item_end = c->pos;
      previous = item;
      first = false;
      continue;
    }

    // Bare panel letter continuing the previous number: "Fig 2a, b".
    // Only after an explicit separator and only if the previous item
    // already carried a panel (keeps "Figure 1 a guideline…" out).
    if (!first && previous.panel && std::isalpha(static_cast<unsigned char>(attempt.peek())) &&
        !is_word_char(attempt.peek(1))) {
      items.push_back({previous.number, lower(attempt.peek())});
      ++attempt.pos;
      *c = attempt;
      last_item_end = c->pos;
      continue;
    }
    break;
  }

  if (items.empty()) {
    c->pos = begin;
    return false;
  }
  out->begin = begin;
  out->end = last_item_end;
  out->items = std::move(items);
  return true;
}

}  // namespace

std::vector<MentionSpan> scan_figure_mentions(std::string_view text) {
  std::vector<MentionSpan> mentions;
  Cursor c{text, 0};
  while (!c.eof()) {
    const char ch = c.peek();
    if ((ch == 'f' || ch == 'F') && (c.pos == 0 || !is_word_char(text[c.pos - 1]))) {
      MentionSpan mention;
      if (parse_mention(&c, &mention)) {
        mentions.push_back(std::move(mention));
        continue;
      }
    }
    ++c.pos;
  }
  return mentions;
}

std::vector<LabelMention> normalize_figure_label(std::string_view raw) {
  std::vector<LabelMention> items;
  for (const auto& mention : scan_figure_mentions(raw)) {
    items.insert(items.end(), mention.items.begin(), mention.items.end());
  }
  return items;
}

ArticleMeta meta_of(const bioc::ArticleDocument& doc) {
  return ArticleMeta{doc.pmcid, doc.doi, doc.title, doc.journal, doc.pub_date, doc.license};
}

namespace {

bool is_cross_reference_passage(const bioc::Passage& passage) {
  using bioc::SectionType;
  // Captions citing themselves and bibliography entries are not references.
  return passage.section_type != SectionType::FIG &&
         passage.section_type != SectionType::TABLE && passage.section_type != SectionType::REF;
}

}  // namespace

std::vector<FigureReference> find_references(const bioc::ArticleDocument& doc, int figure_number) {
  const bool known = std::any_of(doc.figures.begin(), doc.figures.end(), [&](const auto& figure) {
    return figure.figure_number == figure_number;
  });
  if (!known) {
    raise(Errc::UnknownFigureNumber,
          doc.pmcid + " has no figure " + std::to_string(figure_number));
  }

  std::vector<FigureReference> references;
  for (std::size_t index = 0; index < doc.passages.size(); ++index) {
    const auto& passage = doc.passages[index];
    if (!is_cross_reference_passage(passage)) continue;
    for (const auto& mention : scan_figure_mentions(passage.text)) {
      auto hit = std::find_if(mention.items.begin(), mention.items.end(), [&](const auto& item) {
        return item.figure_number == figure_number;
      });
      if (hit != mention.items.end()) {
        references.push_back(
            FigureReference{figure_number, hit->panel, index, mention.begin, mention.end});
      }
    }
  }
  return references;
}

std::vector<LinkedFigure> link_figures(const bioc::ArticleDocument& doc) {
  std::vector<LinkedFigure> linked;
  linked.reserve(doc.figures.size());
  const ArticleMeta meta = meta_of(doc);

  for (const auto& figure : doc.figures) {
    LinkedFigure lf;
    lf.article = meta;
    lf.figure = figure;
    lf.references = find_references(doc, figure.figure_number);

    std::vector<std::size_t> passage_indices;
    for (const auto& reference : lf.references) passage_indices.push_back(reference.passage_index);
    std::sort(passage_indices.begin(), passage_indices.end());
    passage_indices.erase(std::unique(passage_indices.begin(), passage_indices.end()),
                          passage_indices.end());
    for (std::size_t index : passage_indices) {
      lf.referring_text.push_back(doc.passages[index].text);
    }
    linked.push_back(std::move(lf));
  }
  return linked;
}

}  // namespace figmine::link
