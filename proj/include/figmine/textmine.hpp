#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "figmine/linker.hpp"

namespace figmine::text {

enum class Category { symptom, finding };

const char* to_string(Category c);

struct LexiconEntry {
  std::string canonical;
  Category category = Category::symptom;
  std::vector<std::string> synonyms;  // canonical itself always matches
};

struct Lexicon {
  std::vector<LexiconEntry> entries;

  std::size_t symptom_count() const;
  std::size_t finding_count() const;
  const LexiconEntry* find(std::string_view canonical) const;
};

/// The built-in lexicon: the 15 symptoms plus 20 radiographic findings
/// (the NIH Chest X-ray 14 labels and 6 CT-report additions), with synonym
/// sets. User-overridable via load_lexicon_tsv.
Lexicon load_default_lexicon();

/// One entry per line: canonical TAB category TAB synonym|synonym|...
Lexicon load_lexicon_tsv(const std::string& path);

/// Writes the TSV form load_lexicon_tsv reads, for editing and reloading.
void save_lexicon_tsv(const Lexicon& lexicon, const std::string& path);

enum class Polarity { positive, negated };
enum class MentionSource { caption, referring_text };

const char* to_string(Polarity p);
const char* to_string(MentionSource s);

struct Mention {
  std::string term;  // canonical lexicon term
  Category category = Category::symptom;
  std::size_t begin = 0;  // span within the source text
  std::size_t end = 0;
  Polarity polarity = Polarity::positive;
  MentionSource source = MentionSource::caption;
  std::string pmcid;
  int figure_number = 0;
};

struct NegationRules {
  std::vector<std::string> pre_triggers;
  std::vector<std::string> post_triggers;
  std::vector<std::string> terminators;
  int scope_window = 6;  // max tokens a trigger reaches
};

NegationRules default_negation_rules();

/// Triggers/terminators load from plain files, one phrase per line.
NegationRules load_negation_rules(const std::string& pre_path, const std::string& post_path,
                                  const std::string& terminator_path, int scope_window = 6);

struct SentenceSpan {
  std::size_t begin = 0;
  std::size_t end = 0;
};

/// Rule-based splitter on ., ;, !, ?, and newline, with an abbreviation
/// guard list ("Fig.", "Dr.", "e.g.") and a decimal-number guard, so spans
/// stay reproducible byte offsets.
std::vector<SentenceSpan> split_sentences(std::string_view text);

/// Longest-match, case-insensitive, word-boundary lexicon matching;
/// overlapping shorter matches are suppressed. Polarity is left positive.
std::vector<Mention> find_mentions(std::string_view text, const Lexicon& lexicon);

/// Negated iff a pre-trigger ends within scope_window tokens before the
/// mention with no terminator between, or a post-trigger starts within
/// scope_window tokens after it. The span is relative to `sentence`.
Polarity detect_negation(std::string_view sentence, std::size_t begin, std::size_t end,
                         const NegationRules& rules);

/// find_mentions + per-sentence polarity over one text.
std::vector<Mention> mine_text(std::string_view text, const Lexicon& lexicon,
                               const NegationRules& rules);

/// Caption mentions (source=caption) plus referring-passage mentions
/// (source=referring_text), stamped with the article and figure keys.
std::vector<Mention> mine_linked_figure(const link::LinkedFigure& figure, const Lexicon& lexicon,
                                        const NegationRules& rules);

/// Canonical terms with at least one positive mention (the frequency unit:
/// duplicates collapse to presence).
std::set<std::string> positive_terms(const std::vector<Mention>& mentions);

}  // namespace figmine::text
