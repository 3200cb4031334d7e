#include "figmine/fetch.hpp"

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <expat.h>
#include <httplib.h>

#include "figmine/errors.hpp"

namespace fs = std::filesystem;

namespace figmine::fetch {

namespace {

constexpr const char* kDefaultApiBase =
    "https://www.ncbi.nlm.nih.gov/research/bionlp/RESTful/pmcoa.cgi/BioC_xml";
constexpr const char* kDefaultEsearchBase =
    "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/esearch.fcgi";

struct UrlParts {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

UrlParts split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) raise(Errc::ConfigError, "URL has no scheme: " + url);
  auto path_begin = url.find('/', scheme_end + 3);
  if (path_begin == std::string::npos) return {url, ""};
  return {url.substr(0, path_begin), url.substr(path_begin)};
}

// All live requests go through one rate-limited gate, no matter how many
// worker threads are fanned out above.
void rate_limit_gate(int min_delay_ms) {
  using clock = std::chrono::steady_clock;
  static std::mutex gate;
  static clock::time_point last_request{};

  std::lock_guard lock(gate);
  const auto now = clock::now();
  const auto wait = std::chrono::milliseconds(min_delay_ms) - (now - last_request);
  if (last_request.time_since_epoch().count() != 0 && wait.count() > 0) {
    std::this_thread::sleep_for(wait);
  }
  last_request = clock::now();
}

std::string http_get(const std::string& url, const FetchOptions& options) {
  const UrlParts parts = split_url(url);
  rate_limit_gate(options.min_delay_ms);

  httplib::Client client(parts.origin);
  client.set_connection_timeout(options.timeout_s, 0);
  client.set_read_timeout(options.timeout_s, 0);
  client.set_follow_location(true);

  auto result = client.Get(parts.path);
  if (!result) {
    raise(Errc::Network, "transport failure for " + url + ": " + httplib::to_string(result.error()));
  }
  const int status = result->status;
  if (status == 404 || status == 410) raise(Errc::NotFound, url);
  if (status == 403 || status == 451) raise(Errc::NotOpenAccess, url);
  if (status == 429) {
    Error error(Errc::RateLimited, url);
    if (result->has_header("Retry-After")) {
      error.retry_after = std::strtod(result->get_header_value("Retry-After").c_str(), nullptr);
    }
    throw error;
  }
  if (status < 200 || status >= 300) {
    raise(Errc::Network, "HTTP " + std::to_string(status) + " for " + url);
  }
  return result->body;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::string api_base_or_default(const FetchOptions& options) {
  if (!options.api_base.empty()) return options.api_base;
  if (const char* env = std::getenv("FIGMINE_API_BASE"); env && *env) return env;
  return kDefaultApiBase;
}

std::string fetch_live(const std::string& pmcid, const FetchOptions& options) {
  if (!options.cache_dir.empty()) {
    const fs::path cached = fs::path(options.cache_dir) / (pmcid + ".xml");
    if (fs::exists(cached)) return read_file(cached);
  }

  std::string body;
  int attempt = 0;
  for (;;) {
    try {
      body = http_get(api_base_or_default(options) + "/" + pmcid + "/unicode", options);
      break;
    } catch (const Error& e) {
      if (e.code() != Errc::RateLimited || attempt >= options.max_rate_limit_retries) throw;
      ++attempt;
      const double delay_s = e.retry_after.value_or(options.min_delay_ms / 1000.0);
      std::this_thread::sleep_for(std::chrono::duration<double>(delay_s));
    }
  }
  // The BioC service reports missing/withheld articles as 200 with a
  // plain-text "[Error] ..." body.
  if (body.rfind("[Error]", 0) == 0) raise(Errc::NotFound, pmcid + ": " + body.substr(0, 120));

  if (!options.cache_dir.empty()) {
    fs::create_directories(options.cache_dir);
    std::ofstream out(fs::path(options.cache_dir) / (pmcid + ".xml"), std::ios::binary);
    out << body;
  }
  return body;
}

}  // namespace

std::string default_api_base() { return kDefaultApiBase; }

std::string fetch_article(const std::string& pmcid, const FetchOptions& options) {
  if (!bioc::valid_pmcid(pmcid)) {
    raise(Errc::ConfigError, "not a well-formed PMCID: " + pmcid);
  }
  if (options.mode == SourceMode::fixture) {
    if (options.fixture_dir.empty()) raise(Errc::ConfigError, "fixture mode needs a fixture dir");
    const fs::path path = fs::path(options.fixture_dir) / (pmcid + ".xml");
    if (!fs::exists(path)) raise(Errc::NotFound, path.string());
    return read_file(path);
  }
  return fetch_live(pmcid, options);
}

CorpusResult collect_corpus(const std::vector<std::string>& ids, const FetchOptions& options) {
  if (ids.empty()) raise(Errc::ConfigError, "empty article id list");
  if (options.mode == SourceMode::fixture && options.fixture_dir.empty()) {
    raise(Errc::ConfigError, "fixture mode needs a fixture dir");
  }

  CorpusResult result;
  for (const auto& pmcid : ids) {
    FetchStatus status;
    status.pmcid = pmcid;
    try {
      std::string bytes = fetch_article(pmcid, options);
      result.documents.push_back(bioc::parse_bioc(bytes));
      status.ok = true;
    } catch (const Error& e) {
      status.reason = e.what();
    }
    result.statuses.push_back(std::move(status));
  }
  return result;
}

namespace {

std::string url_encode(const std::string& value) {
  std::string out;
  for (unsigned char c : value) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else {
      char buf[4];
      std::snprintf(buf, sizeof(buf), "%%%02X", c);
      out += buf;
    }
  }
  return out;
}

// Pulls the <Id> values out of an esearch response.
struct EsearchState {
  bool in_id = false;
  std::string buffer;
  std::vector<std::string> ids;
};

std::vector<std::string> parse_esearch_ids(const std::string& xml) {
  EsearchState st;
  XML_Parser parser = XML_ParserCreate(nullptr);
  XML_SetUserData(parser, &st);
  XML_SetElementHandler(
      parser,
      [](void* user, const XML_Char* name, const XML_Char**) {
        auto* s = static_cast<EsearchState*>(user);
        if (std::string_view(name) == "Id") {
          s->in_id = true;
          s->buffer.clear();
        }
      },
      [](void* user, const XML_Char* name) {
        auto* s = static_cast<EsearchState*>(user);
        if (std::string_view(name) == "Id") {
          s->in_id = false;
          s->ids.push_back(s->buffer);
        }
      });
  XML_SetCharacterDataHandler(parser, [](void* user, const XML_Char* data, int len) {
    auto* s = static_cast<EsearchState*>(user);
    if (s->in_id) s->buffer.append(data, static_cast<std::size_t>(len));
  });
  const XML_Status status = XML_Parse(parser, xml.data(), static_cast<int>(xml.size()), 1);
  XML_ParserFree(parser);
  if (status != XML_STATUS_OK) raise(Errc::MalformedXml, "bad esearch response");
  return st.ids;
}

}  // namespace

std::vector<std::string> resolve_query(const QuerySpec& query, const FetchOptions& options) {
  if (options.mode != SourceMode::live) {
    raise(Errc::ConfigError, "query resolution requires live mode");
  }
  if (query.term.empty()) raise(Errc::ConfigError, "empty query term");

  std::string base = options.esearch_base;
  if (base.empty()) {
    if (const char* env = std::getenv("FIGMINE_ESEARCH_BASE"); env && *env) base = env;
    else base = kDefaultEsearchBase;
  }
  const std::string url = base + "?db=pmc&term=" + url_encode(query.term) +
                          "&retmax=" + std::to_string(query.max_results);
  const std::string body = http_get(url, options);

  std::vector<std::string> pmcids;
  for (const auto& id : parse_esearch_ids(body)) {
    pmcids.push_back(id.rfind("PMC", 0) == 0 ? id : "PMC" + id);
  }
  return pmcids;
}

CorpusResult collect_corpus(const QuerySpec& query, const FetchOptions& options) {
  return collect_corpus(resolve_query(query, options), options);
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) raise(Errc::IoError, "cannot open id list: " + path);
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::string id = bioc::normalize_whitespace(line);
    if (!id.empty()) ids.push_back(std::move(id));
  }
  return ids;
}

}  // namespace figmine::fetch
