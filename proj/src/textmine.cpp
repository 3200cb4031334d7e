#include <algorithm>
#include <cctype>

#include "figmine/errors.hpp"
#include "figmine/textmine.hpp"

namespace figmine::text {

const char* to_string(Polarity p) { return p == Polarity::positive ? "positive" : "negated"; }

const char* to_string(MentionSource s) {
  return s == MentionSource::caption ? "caption" : "referring_text";
}

namespace {

bool is_word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }

char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

// Abbreviations whose trailing dot does not end a sentence.
bool is_guarded_abbreviation(std::string_view text, std::size_t dot) {
  static const std::vector<std::string_view> guards = {
      "fig", "figs", "dr", "mr", "mrs", "ms", "prof", "st", "vs", "cf",
      "ca",  "al",   "eg", "ie", "e.g", "i.e", "approx", "resp", "no"};
  std::size_t end = dot;
  std::size_t start = end;
  while (start > 0 && (is_word_char(text[start - 1]) || text[start - 1] == '.')) --start;
  if (start == end) return false;
  std::string token;
  for (std::size_t i = start; i < end; ++i) token.push_back(lower(text[i]));
  while (!token.empty() && token.back() == '.') token.pop_back();
  if (token.size() == 1 && std::isalpha(static_cast<unsigned char>(token[0]))) {
    return true;  // single-letter initial
  }
  return std::find(guards.begin(), guards.end(), token) != guards.end();
}

}  // namespace

std::vector<SentenceSpan> split_sentences(std::string_view text) {
  std::vector<SentenceSpan> spans;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= text.size(); ++i) {
    bool boundary = i == text.size();
    if (!boundary) {
      const char c = text[i];
      if (c == ';' || c == '!' || c == '?' || c == '\n') {
        boundary = true;
      } else if (c == '.') {
        const bool decimal = i > 0 && i + 1 < text.size() &&
                             std::isdigit(static_cast<unsigned char>(text[i - 1])) &&
                             std::isdigit(static_cast<unsigned char>(text[i + 1]));
        boundary = !decimal && !is_guarded_abbreviation(text, i);
      }
    }
    if (!boundary) continue;

    std::size_t begin = start;
    std::size_t end = std::min(i + 1, text.size());
    while (begin < end && is_space(text[begin])) ++begin;
    std::size_t content_end = std::min(i, text.size());
    while (content_end > begin && is_space(text[content_end - 1])) --content_end;
    if (content_end > begin) {
      spans.push_back({begin, std::min(end, text.size())});
    }
    start = i + 1;
  }
  return spans;
}

namespace {

struct Pattern {
  std::string lowered;  // single-spaced, lowercase
  const LexiconEntry* entry;
};

std::vector<Pattern> build_patterns(const Lexicon& lexicon) {
  std::vector<Pattern> patterns;
  auto add = [&](const std::string& phrase, const LexiconEntry& entry) {
    std::string lowered;
    for (char c : phrase) lowered.push_back(lower(c));
    patterns.push_back({std::move(lowered), &entry});
  };
  for (const auto& entry : lexicon.entries) {
    add(entry.canonical, entry);
    for (const auto& synonym : entry.synonyms) add(synonym, entry);
  }
  return patterns;
}

// Case-insensitive phrase match at `begin`; pattern spaces accept any
// whitespace run. Returns the end offset, or 0 on failure.
std::size_t match_phrase_at(std::string_view text, std::size_t begin, const std::string& pattern) {
  std::size_t ti = begin;
  for (std::size_t pi = 0; pi < pattern.size(); ++pi) {
    if (pattern[pi] == ' ') {
      if (ti >= text.size() || !is_space(text[ti])) return 0;
      while (ti < text.size() && is_space(text[ti])) ++ti;
    } else {
      if (ti >= text.size() || lower(text[ti]) != pattern[pi]) return 0;
      ++ti;
    }
  }
  const bool start_ok = begin == 0 || !is_word_char(text[begin - 1]);
  const bool end_ok = ti == text.size() || !is_word_char(text[ti]);
  return start_ok && end_ok ? ti : 0;
}

struct Candidate {
  std::size_t begin, end;
  const LexiconEntry* entry;
};

}  // namespace

std::vector<Mention> find_mentions(std::string_view text, const Lexicon& lexicon) {
  const auto patterns = build_patterns(lexicon);

  std::vector<Candidate> candidates;
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (i > 0 && is_word_char(text[i - 1])) continue;  // not a word start
    for (const auto& pattern : patterns) {
      if (const std::size_t end = match_phrase_at(text, i, pattern.lowered)) {
        candidates.push_back({i, end, pattern.entry});
      }
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end > b.end;  // longest match first
  });

  std::vector<Mention> mentions;
  std::size_t covered_until = 0;
  for (const auto& candidate : candidates) {
    if (candidate.begin < covered_until) continue;  // overlapped by a longer match
    Mention mention;
    mention.term = candidate.entry->canonical;
    mention.category = candidate.entry->category;
    mention.begin = candidate.begin;
    mention.end = candidate.end;
    mentions.push_back(std::move(mention));
    covered_until = candidate.end;
  }
  return mentions;
}

namespace {

struct Token {
  std::string lowered;
  std::size_t begin, end;
};

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!is_word_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t begin = i;
    std::string lowered;
    while (i < text.size() && is_word_char(text[i])) {
      lowered.push_back(lower(text[i]));
      ++i;
    }
    tokens.push_back({std::move(lowered), begin, i});
  }
  return tokens;
}

std::vector<std::string> phrase_tokens(const std::string& phrase) {
  std::vector<std::string> words;
  std::string word;
  for (char c : phrase) {
    if (is_word_char(c)) {
      word.push_back(lower(c));
    } else if (!word.empty()) {
      words.push_back(std::move(word));
      word.clear();
    }
  }
  if (!word.empty()) words.push_back(std::move(word));
  return words;
}

bool phrase_at(const std::vector<Token>& tokens, std::size_t pos,
               const std::vector<std::string>& words) {
  if (words.empty() || pos + words.size() > tokens.size()) return false;
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (tokens[pos + k].lowered != words[k]) return false;
  }
  return true;
}

// Any terminator phrase fully inside token indices (from, to) exclusive?
bool terminator_between(const std::vector<Token>& tokens,
                        const std::vector<std::vector<std::string>>& terminators, std::size_t from,
                        std::size_t to) {
  for (std::size_t pos = from + 1; pos < to; ++pos) {
    for (const auto& words : terminators) {
      if (!words.empty() && pos + words.size() <= to && phrase_at(tokens, pos, words)) return true;
    }
  }
  return false;
}

}  // namespace

Polarity detect_negation(std::string_view sentence, std::size_t begin, std::size_t end,
                         const NegationRules& rules) {
  if (begin >= end || end > sentence.size()) {
    raise(Errc::OutOfBounds, "mention span outside sentence");
  }
  const auto tokens = tokenize(sentence);
  if (tokens.empty()) return Polarity::positive;

  // Token range covered by the mention.
  std::size_t first = tokens.size(), last = tokens.size();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (tokens[t].end > begin && tokens[t].begin < end) {
      if (first == tokens.size()) first = t;
      last = t;
    }
  }
  if (first == tokens.size()) return Polarity::positive;

  std::vector<std::vector<std::string>> terminators;
  for (const auto& phrase : rules.terminators) terminators.push_back(phrase_tokens(phrase));

  const auto window = static_cast<std::size_t>(rules.scope_window);

  for (const auto& phrase : rules.pre_triggers) {
    const auto words = phrase_tokens(phrase);
    if (words.empty()) continue;
    // e = index of the trigger's last word, strictly before the mention
    for (std::size_t e = first; e-- > 0;) {
      const std::size_t distance = first - e;
      if (distance > window) break;
      if (e + 1 >= words.size() && phrase_at(tokens, e + 1 - words.size(), words) &&
          !terminator_between(tokens, terminators, e, first)) {
        return Polarity::negated;
      }
    }
  }

  for (const auto& phrase : rules.post_triggers) {
    const auto words = phrase_tokens(phrase);
    if (words.empty()) continue;
    for (std::size_t s = last + 1; s < tokens.size() && s - last <= window; ++s) {
      if (phrase_at(tokens, s, words) && !terminator_between(tokens, terminators, last, s)) {
        return Polarity::negated;
      }
    }
  }
  return Polarity::positive;
}

std::vector<Mention> mine_text(std::string_view text, const Lexicon& lexicon,
                               const NegationRules& rules) {
  auto mentions = find_mentions(text, lexicon);
  if (mentions.empty()) return mentions;

  const auto sentences = split_sentences(text);
  for (auto& mention : mentions) {
    std::string_view sentence = text;
    std::size_t base = 0;
    for (const auto& span : sentences) {
      if (mention.begin >= span.begin && mention.begin < span.end) {
        sentence = text.substr(span.begin, span.end - span.begin);
        base = span.begin;
        break;
      }
    }
    const std::size_t end = std::min(mention.end - base, sentence.size());
    mention.polarity = detect_negation(sentence, mention.begin - base, end, rules);
  }
  return mentions;
}

std::vector<Mention> mine_linked_figure(const link::LinkedFigure& figure, const Lexicon& lexicon,
                                        const NegationRules& rules) {
  std::vector<Mention> all;
  auto stamp = [&](std::vector<Mention> mentions, MentionSource source) {
    for (auto& mention : mentions) {
      mention.source = source;
      mention.pmcid = figure.article.pmcid;
      mention.figure_number = figure.figure.figure_number;
      all.push_back(std::move(mention));
    }
  };
  stamp(mine_text(figure.figure.caption_text, lexicon, rules), MentionSource::caption);
  for (const auto& passage : figure.referring_text) {
    stamp(mine_text(passage, lexicon, rules), MentionSource::referring_text);
  }
  return all;
}

std::set<std::string> positive_terms(const std::vector<Mention>& mentions) {
  std::set<std::string> terms;
  for (const auto& mention : mentions) {
    if (mention.polarity == Polarity::positive) terms.insert(mention.term);
  }
  return terms;
}

}  // namespace figmine::text
