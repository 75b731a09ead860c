#pragma once

#include <chrono>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mlink {

/// Parameters of one literature retrieval.
struct FetchSpec {
  std::string query;
  std::optional<int> date_from;  ///< publication year, inclusive
  std::optional<int> date_to;
  std::size_t batch_size = 200;
  std::chrono::milliseconds polite_delay{350};
};

/// Throws Error(InvalidArgument) for batch_size 0 or an inverted year range.
void validate(const FetchSpec& spec);

using QueryParams = std::vector<std::pair<std::string, std::string>>;

struct HttpResponse {
  int status = 0;  ///< 0 means the transport failed before a response arrived
  std::string body;
  std::optional<int> retry_after_seconds;
  std::string error;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// `endpoint` is "esearch" or "efetch".
  virtual HttpResponse get(const std::string& endpoint, const QueryParams& params) = 0;
};

struct EutilsConfig {
  std::string base_url = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils/";
  std::string api_key;
  std::string tool = "mlink";
  std::string email;
};

/// Reads an optional JSON config file (keys: base_url, api_key, tool,
/// email), then applies MLINK_EUTILS_BASE_URL, MLINK_EUTILS_API_KEY and
/// NCBI_API_KEY from the environment.
EutilsConfig load_eutils_config(const std::optional<std::filesystem::path>& path = std::nullopt);

/// Live HTTP(S) transport.
std::unique_ptr<HttpTransport> make_http_transport(const EutilsConfig& config);

/// Canonical request key used by fixtures: endpoint, '?', params sorted by
/// name, URL-encoded; api_key is omitted.
std::string fixture_key(const std::string& endpoint, const QueryParams& params);

std::string url_encode(std::string_view s);

/// Replays recorded responses from a directory holding `manifest.json`:
///   {"version": 1, "responses": [{"request": KEY, "status": 200,
///    "file": "0001.txt", "retry_after": null}, ...]}
/// Repeated keys are served in order; the last one repeats. A status of 0
/// replays a transport failure. Unknown requests fail like a dead network.
class FixtureTransport : public HttpTransport {
 public:
  explicit FixtureTransport(std::filesystem::path directory);
  HttpResponse get(const std::string& endpoint, const QueryParams& params) override;

 private:
  struct Recorded {
    int status = 0;
    std::filesystem::path file;
    std::optional<int> retry_after;
  };
  std::filesystem::path dir_;
  std::map<std::string, std::deque<Recorded>> responses_;
};

/// Forwards to another transport and appends every exchange to a fixture
/// directory that FixtureTransport can replay.
class RecordingTransport : public HttpTransport {
 public:
  RecordingTransport(HttpTransport& inner, std::filesystem::path directory);
  HttpResponse get(const std::string& endpoint, const QueryParams& params) override;

 private:
  HttpTransport& inner_;
  std::filesystem::path dir_;
  std::size_t counter_ = 0;
};

struct FetchResult {
  std::string text;
  std::size_t requests = 0;
  std::size_t requested_ids = 0;
  std::size_t returned_records = 0;
  /// MissingRecords notices; not errors.
  std::vector<std::string> warnings;
};

/// Sequential E-utilities client: one request in flight at a time, a polite
/// delay between requests, and at most 3 attempts per request with
/// exponential backoff starting at the polite delay.
class PubmedClient {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  static constexpr int kMaxAttempts = 3;

  explicit PubmedClient(HttpTransport& transport, EutilsConfig config = {}, Sleeper sleeper = {});

  /// All PMIDs for the query, paged by batch_size. Throws FetchError with
  /// code Network, Service or Quota.
  std::vector<std::string> search_ids(const FetchSpec& spec);

  /// MEDLINE text for the (deduplicated) ids in ceil(n / batch_size)
  /// requests.
  FetchResult fetch_medline(std::span<const std::string> pmids, const FetchSpec& spec);

  std::size_t requests_issued() const noexcept { return requests_; }

 private:
  HttpResponse request(const std::string& endpoint, QueryParams params, const FetchSpec& spec,
                       std::size_t completed);

  HttpTransport& transport_;
  EutilsConfig config_;
  Sleeper sleep_;
  std::size_t requests_ = 0;
};

}  // namespace mlink
