#pragma once

#include <string>
#include <vector>

#include "figmine/bioc.hpp"

namespace figmine::fetch {

enum class SourceMode { live, fixture };

struct FetchOptions {
  SourceMode mode = SourceMode::fixture;
  std::string fixture_dir;  // layout: <dir>/<PMCID>.xml
  // Live endpoint base; article URL is <api_base>/<PMCID>/unicode.
  // Empty means: FIGMINE_API_BASE env var, then the PMC-OA BioC service.
  std::string api_base;
  // E-utilities esearch base for query resolution (db=pmc).
  std::string esearch_base;
  std::string cache_dir;  // raw XML cache; resumed runs skip refetching
  int min_delay_ms = 350;
  int timeout_s = 30;
  int max_rate_limit_retries = 3;
};

std::string default_api_base();

/// Raw BioC XML bytes for one article.
/// Throws NotFound, NotOpenAccess, Network, or RateLimited (with retry_after).
std::string fetch_article(const std::string& pmcid, const FetchOptions& options);

struct FetchStatus {
  std::string pmcid;
  bool ok = false;
  std::string reason;  // empty when ok
};

struct CorpusResult {
  std::vector<bioc::ArticleDocument> documents;
  std::vector<FetchStatus> statuses;  // one per requested id, input order
};

/// Fetch + parse every id; per-article failures become skipped statuses and
/// never abort the collection. Throws ConfigError on an empty id list.
CorpusResult collect_corpus(const std::vector<std::string>& ids, const FetchOptions& options);

struct QuerySpec {
  std::string term;
  int max_results = 100;
};

/// Resolve a PMC search query to an id list via esearch. Live mode only.
std::vector<std::string> resolve_query(const QuerySpec& query, const FetchOptions& options);

CorpusResult collect_corpus(const QuerySpec& query, const FetchOptions& options);

/// Read one PMCID per line; '#' starts a comment.
std::vector<std::string> read_id_list(const std::string& path);

}  // namespace figmine::fetch
