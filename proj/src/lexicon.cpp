#include <fstream>
#include <sstream>

#include "figmine/errors.hpp"
#include "figmine/textmine.hpp"

namespace figmine::text {

const char* to_string(Category c) { return c == Category::symptom ? "symptom" : "finding"; }

std::size_t Lexicon::symptom_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.category == Category::symptom;
  return n;
}

std::size_t Lexicon::finding_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.category == Category::finding;
  return n;
}

const LexiconEntry* Lexicon::find(std::string_view canonical) const {
  for (const auto& e : entries) {
    if (e.canonical == canonical) return &e;
  }
  return nullptr;
}

Lexicon load_default_lexicon() {
  const auto S = Category::symptom;
  const auto F = Category::finding;
  Lexicon lex;
  lex.entries = {
      // 15 clinical symptoms / signs
      {"chest pain", S, {"thoracic pain", "chest discomfort", "chest tightness"}},
      {"constipation", S, {"constipated"}},
      {"cough", S, {"coughing", "dry cough", "productive cough", "coughs"}},
      {"diarrhea", S, {"diarrhoea", "loose stools"}},
      {"dizziness", S, {"dizzy", "vertigo"}},
      {"dyspnea", S, {"dyspnoea", "shortness of breath", "breathlessness", "difficulty breathing"}},
      {"fatigue", S, {"tiredness", "asthenia", "lethargy", "fatigued"}},
      {"fever", S, {"fevers", "pyrexia", "febrile"}},
      {"headache", S, {"headaches", "cephalalgia"}},
      {"myalgia", S, {"myalgias", "muscle pain", "muscle ache", "muscle aches", "muscle soreness"}},
      {"proteinuria", S, {}},
      {"runny nose", S, {"rhinorrhea", "rhinorrhoea", "nasal discharge"}},
      {"sputum production", S, {"sputum", "expectoration"}},
      {"throat pain", S, {"sore throat", "pharyngalgia", "throat soreness"}},
      {"vomiting", S, {"vomit", "vomited", "emesis"}},
      // 20 radiographic findings: NIH Chest X-ray 14 labels ...
      {"atelectasis", F, {"atelectatic", "atelectases"}},
      {"cardiomegaly", F, {"enlarged heart", "enlarged cardiac silhouette"}},
      {"consolidation", F, {"consolidations", "consolidative"}},
      {"edema", F, {"oedema", "pulmonary edema", "pulmonary oedema"}},
      {"effusion", F, {"effusions", "pleural effusion", "pleural effusions"}},
      {"emphysema", F, {"emphysematous"}},
      {"fibrosis", F, {"fibrotic", "pulmonary fibrosis", "fibrosis of the lung"}},
      {"hernia", F, {"hernias", "hiatal hernia"}},
      {"infiltration", F, {"infiltrate", "infiltrates", "infiltrations"}},
      {"mass", F, {"masses", "lung mass", "pulmonary mass"}},
      {"nodule", F, {"nodules", "nodular", "pulmonary nodule", "pulmonary nodules"}},
      {"pleural thickening", F, {"pleural thickenings", "thickening of the pleura"}},
      {"pneumonia", F, {"pneumonias", "bronchopneumonia"}},
      {"pneumothorax", F, {"pneumothoraces"}},
      // ... plus 6 additions common in COVID-era CT reporting
      {"ground-glass opacification",
       F,
       {"GGO", "GGOs", "ground glass opacification", "ground-glass opacity", "ground glass opacity",
        "ground-glass opacities", "ground glass opacities", "ground-glass attenuation"}},
      {"lung opacity",
       F,
       {"lung opacities", "pulmonary opacity", "pulmonary opacities", "airspace opacity",
        "airspace opacities"}},
      {"linear opacities", F, {"linear opacity", "linear densities", "linear density"}},
      {"crazy paving", F, {"crazy-paving", "crazy paving pattern", "crazy-paving pattern"}},
      {"air bronchogram", F, {"air bronchograms"}},
      {"reticulation", F, {"reticular pattern", "reticular opacities", "reticular opacity"}},
  };
  return lex;
}

namespace {

std::vector<std::string> split_on(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::stringstream stream(s);
  std::string part;
  while (std::getline(stream, part, sep)) {
    if (!part.empty()) parts.push_back(part);
  }
  return parts;
}

}  // namespace

Lexicon load_lexicon_tsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open lexicon: " + path);

  Lexicon lex;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_on(line, '\t');
    if (fields.size() < 2) {
      raise(Errc::SchemaError,
            path + ":" + std::to_string(line_no) + ": expected term TAB category [TAB synonyms]");
    }
    LexiconEntry entry;
    entry.canonical = fields[0];
    if (fields[1] == "symptom") {
      entry.category = Category::symptom;
    } else if (fields[1] == "finding") {
      entry.category = Category::finding;
    } else {
      raise(Errc::SchemaError,
            path + ":" + std::to_string(line_no) + ": category must be symptom or finding");
    }
    if (fields.size() >= 3) entry.synonyms = split_on(fields[2], '|');
    if (lex.find(entry.canonical)) {
      raise(Errc::SchemaError,
            path + ":" + std::to_string(line_no) + ": duplicate canonical term " + entry.canonical);
    }
    lex.entries.push_back(std::move(entry));
  }
  return lex;
}

void save_lexicon_tsv(const Lexicon& lexicon, const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open lexicon for write: " + path);
  out << "# canonical term\tcategory\tsynonym|synonym|...\n";
  for (const auto& entry : lexicon.entries) {
    out << entry.canonical << "\t" << to_string(entry.category) << "\t";
    for (std::size_t i = 0; i < entry.synonyms.size(); ++i) {
      out << (i ? "|" : "") << entry.synonyms[i];
    }
    out << "\n";
  }
}

NegationRules default_negation_rules() {
  NegationRules rules;
  rules.pre_triggers = {"no",          "not",          "without",     "denies",
                        "denied",      "deny",         "negative for", "free of",
                        "absence of",  "lack of",      "no evidence of",
                        "no sign of",  "no signs of",  "rules out",   "ruled out",
                        "resolution of"};
  rules.post_triggers = {"was ruled out", "were ruled out", "was absent",   "were absent",
                         "was negative",  "were negative",  "was excluded", "were excluded",
                         "not present",   "not seen",       "not observed", "was denied",
                         "has resolved",  "have resolved"};
  rules.terminators = {"but",   "however", "except",     "although",   "though",
                       "yet",   "whereas", "apart from", "aside from", "other than",
                       "nevertheless"};
  rules.scope_window = 6;
  return rules;
}

namespace {

std::vector<std::string> read_phrase_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open trigger file: " + path);
  std::vector<std::string> phrases;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    phrases.push_back(line);
  }
  return phrases;
}

}  // namespace

NegationRules load_negation_rules(const std::string& pre_path, const std::string& post_path,
                                  const std::string& terminator_path, int scope_window) {
  NegationRules rules;
  rules.pre_triggers = read_phrase_file(pre_path);
  rules.post_triggers = read_phrase_file(post_path);
  rules.terminators = read_phrase_file(terminator_path);
  rules.scope_window = scope_window;
  if (rules.pre_triggers.empty() || rules.post_triggers.empty()) {
    raise(Errc::SchemaError, "trigger lists must be non-empty");
  }
  if (rules.scope_window < 1) raise(Errc::SchemaError, "scope_window must be >= 1");
  return rules;
}

}  // namespace figmine::text
