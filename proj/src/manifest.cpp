#include "figmine/manifest.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "figmine/errors.hpp"
#include "figmine/image.hpp"

namespace fs = std::filesystem;

namespace figmine::manifest {

const std::vector<std::string>& manifest_field_names() {
  static const std::vector<std::string> names = {
      "pmcid",    "doi",      "title",          "journal",  "pub_date",
      "license",  "figure_number", "subfigure_index", "image_path", "width",
      "height",   "modality", "prob_ct",        "prob_cxr", "prob_other",
      "caption",  "referring_text", "mentions"};
  return names;
}

namespace {

nlohmann::ordered_json mention_to_json(const MentionSummary& m) {
  return nlohmann::ordered_json{{"term", m.term},
                                {"category", m.category},
                                {"polarity", m.polarity},
                                {"source", m.source},
                                {"count", m.count}};
}

MentionSummary mention_from_json(const nlohmann::json& j) {
  MentionSummary m;
  m.term = j.at("term").get<std::string>();
  m.category = j.at("category").get<std::string>();
  m.polarity = j.at("polarity").get<std::string>();
  m.source = j.at("source").get<std::string>();
  m.count = j.at("count").get<int>();
  return m;
}

}  // namespace

nlohmann::ordered_json entry_to_json(const ManifestEntry& e) {
  nlohmann::ordered_json j;
  j["pmcid"] = e.pmcid;
  j["doi"] = e.doi;
  j["title"] = e.title;
  j["journal"] = e.journal;
  j["pub_date"] = e.pub_date;
  j["license"] = e.license;
  j["figure_number"] = e.figure_number;
  j["subfigure_index"] = e.subfigure_index;
  j["image_path"] = e.image_path;
  j["width"] = e.width;
  j["height"] = e.height;
  j["modality"] = e.modality;
  j["prob_ct"] = e.probs[0];
  j["prob_cxr"] = e.probs[1];
  j["prob_other"] = e.probs[2];
  j["caption"] = e.caption;
  j["referring_text"] = e.referring_text;
  j["mentions"] = nlohmann::ordered_json::array();
  for (const auto& m : e.mentions) j["mentions"].push_back(mention_to_json(m));
  return j;
}

ManifestEntry entry_from_json(const nlohmann::json& j) {
  ManifestEntry e;
  e.pmcid = j.at("pmcid").get<std::string>();
  e.doi = j.at("doi").get<std::string>();
  e.title = j.at("title").get<std::string>();
  e.journal = j.at("journal").get<std::string>();
  e.pub_date = j.at("pub_date").get<std::string>();
  e.license = j.at("license").get<std::string>();
  e.figure_number = j.at("figure_number").get<int>();
  e.subfigure_index = j.at("subfigure_index").get<int>();
  e.image_path = j.at("image_path").get<std::string>();
  e.width = j.at("width").get<int>();
  e.height = j.at("height").get<int>();
  e.modality = j.at("modality").get<std::string>();
  e.probs = {j.at("prob_ct").get<double>(), j.at("prob_cxr").get<double>(),
             j.at("prob_other").get<double>()};
  e.caption = j.at("caption").get<std::string>();
  e.referring_text = j.at("referring_text").get<std::string>();
  for (const auto& m : j.at("mentions")) e.mentions.push_back(mention_from_json(m));
  return e;
}

void write_jsonl(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open for write: " + path.string());
  for (const auto& entry : entries) {
    out << entry_to_json(entry).dump() << "\n";
  }
  if (!out) raise(Errc::IoError, "short write: " + path.string());
}

std::vector<ManifestEntry> read_jsonl(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open manifest: " + path.string());
  std::vector<ManifestEntry> entries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      entries.push_back(entry_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      raise(Errc::SchemaError, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return entries;
}

namespace {

// RFC 4180: quote when the field contains comma, quote, or line breaks.
std::string csv_quote(const std::string& field) {
  const bool needs_quotes = field.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs_quotes) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out.push_back(c);
  }
  out += "\"";
  return out;
}

std::string double_to_string(double v) {
  // shortest round-trip representation
  std::ostringstream ss;
  ss.precision(17);
  ss << v;
  std::istringstream check(ss.str());
  double back;
  check >> back;
  if (back == v) {
    std::ostringstream shorter;
    for (int precision = 1; precision < 17; ++precision) {
      shorter.str("");
      shorter.clear();
      shorter.precision(precision);
      shorter << v;
      std::istringstream verify(shorter.str());
      verify >> back;
      if (back == v) return shorter.str();
    }
  }
  return ss.str();
}

std::vector<std::string> entry_to_csv_fields(const ManifestEntry& e) {
  nlohmann::ordered_json mentions = nlohmann::ordered_json::array();
  for (const auto& m : e.mentions) mentions.push_back(mention_to_json(m));
  return {e.pmcid,
          e.doi,
          e.title,
          e.journal,
          e.pub_date,
          e.license,
          std::to_string(e.figure_number),
          std::to_string(e.subfigure_index),
          e.image_path,
          std::to_string(e.width),
          std::to_string(e.height),
          e.modality,
          double_to_string(e.probs[0]),
          double_to_string(e.probs[1]),
          double_to_string(e.probs[2]),
          e.caption,
          e.referring_text,
          mentions.dump()};
}

// One CSV record, honoring quoted fields that span multiple lines.
bool read_csv_record(std::istream& in, std::vector<std::string>* fields) {
  fields->clear();
  std::string field;
  bool in_quotes = false;
  bool any = false;
  char c;
  while (in.get(c)) {
    any = true;
    if (in_quotes) {
      if (c == '"') {
        if (in.peek() == '"') {
          in.get();
          field.push_back('"');
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      in_quotes = true;
    } else if (c == ',') {
      fields->push_back(std::move(field));
      field.clear();
    } else if (c == '\r') {
      // swallowed; CRLF handled at '\n'
    } else if (c == '\n') {
      fields->push_back(std::move(field));
      return true;
    } else {
      field.push_back(c);
    }
  }
  if (any) fields->push_back(std::move(field));
  return any;
}

}  // namespace

void write_csv(const fs::path& path, const std::vector<ManifestEntry>& entries) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) raise(Errc::IoError, "cannot open for write: " + path.string());

  const auto& names = manifest_field_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    out << (i ? "," : "") << names[i];
  }
  out << "\r\n";
  for (const auto& entry : entries) {
    const auto fields = entry_to_csv_fields(entry);
    for (std::size_t i = 0; i < fields.size(); ++i) {
      out << (i ? "," : "") << csv_quote(fields[i]);
    }
    out << "\r\n";
  }
  if (!out) raise(Errc::IoError, "short write: " + path.string());
}

std::vector<ManifestEntry> read_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(Errc::IoError, "cannot open manifest: " + path.string());

  std::vector<std::string> fields;
  if (!read_csv_record(in, &fields) || fields != manifest_field_names()) {
    raise(Errc::SchemaError, path.string() + ": bad or missing CSV header");
  }

  std::vector<ManifestEntry> entries;
  int row = 1;
  while (read_csv_record(in, &fields)) {
    ++row;
    if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
    if (fields.size() != manifest_field_names().size()) {
      raise(Errc::SchemaError,
            path.string() + ": row " + std::to_string(row) + " has " +
                std::to_string(fields.size()) + " fields");
    }
    try {
      ManifestEntry e;
      e.pmcid = fields[0];
      e.doi = fields[1];
      e.title = fields[2];
      e.journal = fields[3];
      e.pub_date = fields[4];
      e.license = fields[5];
      e.figure_number = std::stoi(fields[6]);
      e.subfigure_index = std::stoi(fields[7]);
      e.image_path = fields[8];
      e.width = std::stoi(fields[9]);
      e.height = std::stoi(fields[10]);
      e.modality = fields[11];
      e.probs = {std::stod(fields[12]), std::stod(fields[13]), std::stod(fields[14])};
      e.caption = fields[15];
      e.referring_text = fields[16];
      for (const auto& m : nlohmann::json::parse(fields[17])) {
        e.mentions.push_back(mention_from_json(m));
      }
      entries.push_back(std::move(e));
    } catch (const std::exception& ex) {
      raise(Errc::SchemaError, path.string() + ": row " + std::to_string(row) + ": " + ex.what());
    }
  }
  return entries;
}

ValidationReport validate_manifest(const fs::path& manifest_path, bool check_images,
                                   int min_panel) {
  ValidationReport report;
  const auto entries = read_jsonl(manifest_path);
  report.entries_checked = entries.size();
  const fs::path base_dir = manifest_path.parent_path();

  std::map<std::tuple<std::string, int, int>, int> seen;  // key -> first line
  int line = 0;
  for (const auto& entry : entries) {
    ++line;
    auto violation = [&](const std::string& message) {
      report.violations.push_back({line, entry.pmcid + ": " + message});
    };

    if (!entry.pmcid.starts_with("PMC")) violation("pmcid must start with PMC");
    if (entry.figure_number < 1) violation("figure_number must be >= 1");
    if (entry.subfigure_index < 0) violation("subfigure_index must be >= 0");
    if (entry.width < min_panel || entry.height < min_panel) {
      violation("dimensions " + std::to_string(entry.width) + "x" + std::to_string(entry.height) +
                " below " + std::to_string(min_panel) + " filter");
    }
    if (entry.modality != "CT" && entry.modality != "CXR" && entry.modality != "Other") {
      violation("modality not in {CT, CXR, Other}: " + entry.modality);
    }
    const double prob_sum = entry.probs[0] + entry.probs[1] + entry.probs[2];
    if (std::abs(prob_sum - 1.0) > 1e-6 || entry.probs[0] < 0 || entry.probs[1] < 0 ||
        entry.probs[2] < 0) {
      violation("probabilities must be nonnegative and sum to 1");
    }
    if (entry.image_path.empty()) violation("empty image_path");

    const auto key = std::make_tuple(entry.pmcid, entry.figure_number, entry.subfigure_index);
    auto [it, inserted] = seen.insert({key, line});
    if (!inserted) {
      violation("duplicate (pmcid, figure, subfigure) also on line " +
                std::to_string(it->second));
    }

    if (check_images && !entry.image_path.empty()) {
      const fs::path image_path = base_dir / entry.image_path;
      if (!fs::exists(image_path)) {
        violation("image file missing: " + image_path.string());
      } else {
        try {
          const auto image = img::load_image(image_path);
          if (image.width != entry.width || image.height != entry.height) {
            violation("image decodes to " + std::to_string(image.width) + "x" +
                      std::to_string(image.height) + ", manifest says " +
                      std::to_string(entry.width) + "x" + std::to_string(entry.height));
          }
        } catch (const Error& e) {
          violation(std::string("image decode failure: ") + e.what());
        }
      }
    }
  }
  return report;
}

}  // namespace figmine::manifest
