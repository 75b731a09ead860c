#include "mlink/pubmed.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iterator>
#include <thread>
#include <unordered_set>

#include <fmt/format.h>
#include <httplib.h>
#include <json.hpp>

#include "mlink/error.hpp"

namespace mlink {

namespace {

using json = nlohmann::json;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(Errc::Io, fmt::format("cannot read '{}'", p.string()));
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& p, std::string_view data) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::Io, fmt::format("cannot write '{}'", p.string()));
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

std::size_t count_records(std::string_view text) {
  std::size_t n = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (text.compare(pos, 5, "PMID-") == 0) ++n;
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) break;
    pos = nl + 1;
  }
  return n;
}

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(const EutilsConfig& config) {
    const std::string& url = config.base_url;
    auto scheme_end = url.find("://");
    auto host_start = scheme_end == std::string::npos ? 0 : scheme_end + 3;
    auto path_start = url.find('/', host_start);
    origin_ = url.substr(0, path_start);
    prefix_ = path_start == std::string::npos ? "/" : url.substr(path_start);
    if (prefix_.back() != '/') prefix_ += '/';
    client_ = std::make_unique<httplib::Client>(origin_);
    client_->set_connection_timeout(10);
    client_->set_read_timeout(60);
    client_->set_follow_location(true);
  }

  HttpResponse get(const std::string& endpoint, const QueryParams& params) override {
    std::string path = prefix_ + endpoint + ".fcgi?";
    for (std::size_t i = 0; i < params.size(); ++i) {
      if (i) path += '&';
      path += url_encode(params[i].first) + "=" + url_encode(params[i].second);
    }
    HttpResponse out;
    auto res = client_->Get(path);
    if (!res) {
      out.error = httplib::to_string(res.error());
      return out;
    }
    out.status = res->status;
    out.body = res->body;
    if (res->has_header("Retry-After")) {
      out.retry_after_seconds = std::atoi(res->get_header_value("Retry-After").c_str());
    }
    return out;
  }

 private:
  std::string origin_;
  std::string prefix_;
  std::unique_ptr<httplib::Client> client_;
};

}  // namespace

void validate(const FetchSpec& spec) {
  if (spec.batch_size < 1) throw Error(Errc::InvalidArgument, "batch_size must be at least 1");
  if (spec.date_from && spec.date_to && *spec.date_from > *spec.date_to) {
    throw Error(Errc::InvalidArgument,
                fmt::format("date range {}..{} is inverted", *spec.date_from, *spec.date_to));
  }
  if (spec.polite_delay.count() < 0) throw Error(Errc::InvalidArgument, "polite_delay must be >= 0");
}

std::string url_encode(std::string_view s) {
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out += static_cast<char>(c);
    } else {
      out += fmt::format("%{:02X}", c);
    }
  }
  return out;
}

std::string fixture_key(const std::string& endpoint, const QueryParams& params) {
  QueryParams sorted;
  for (const auto& p : params) {
    if (p.first != "api_key") sorted.push_back(p);
  }
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& x, const auto& y) { return x.first < y.first; });
  std::string key = endpoint + "?";
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i) key += '&';
    key += url_encode(sorted[i].first) + "=" + url_encode(sorted[i].second);
  }
  return key;
}

EutilsConfig load_eutils_config(const std::optional<std::filesystem::path>& path) {
  EutilsConfig cfg;
  if (path) {
    json j;
    try {
      j = json::parse(read_file(*path));
    } catch (const json::exception& e) {
      throw Error(Errc::InvalidArgument, fmt::format("bad config '{}': {}", path->string(), e.what()));
    }
    cfg.base_url = j.value("base_url", cfg.base_url);
    cfg.api_key = j.value("api_key", cfg.api_key);
    cfg.tool = j.value("tool", cfg.tool);
    cfg.email = j.value("email", cfg.email);
  }
  if (const char* v = std::getenv("MLINK_EUTILS_BASE_URL")) cfg.base_url = v;
  if (const char* v = std::getenv("NCBI_API_KEY")) cfg.api_key = v;
  if (const char* v = std::getenv("MLINK_EUTILS_API_KEY")) cfg.api_key = v;
  return cfg;
}

std::unique_ptr<HttpTransport> make_http_transport(const EutilsConfig& config) {
  return std::make_unique<HttplibTransport>(config);
}

FixtureTransport::FixtureTransport(std::filesystem::path directory) : dir_(std::move(directory)) {
  json manifest;
  try {
    manifest = json::parse(read_file(dir_ / "manifest.json"));
    for (const auto& r : manifest.at("responses")) {
      Recorded rec;
      rec.status = r.at("status").get<int>();
      if (r.contains("file") && !r["file"].is_null()) rec.file = r["file"].get<std::string>();
      if (r.contains("retry_after") && !r["retry_after"].is_null()) {
        rec.retry_after = r["retry_after"].get<int>();
      }
      responses_[r.at("request").get<std::string>()].push_back(std::move(rec));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidArgument,
                fmt::format("bad fixture manifest in '{}': {}", dir_.string(), e.what()));
  }
}

HttpResponse FixtureTransport::get(const std::string& endpoint, const QueryParams& params) {
  HttpResponse out;
  const auto key = fixture_key(endpoint, params);
  auto it = responses_.find(key);
  if (it == responses_.end() || it->second.empty()) {
    out.error = "no recorded response for " + key;
    return out;
  }
  Recorded rec = it->second.front();
  if (it->second.size() > 1) it->second.pop_front();
  out.status = rec.status;
  out.retry_after_seconds = rec.retry_after;
  if (rec.status == 0) {
    out.error = "recorded transport failure";
    return out;
  }
  if (!rec.file.empty()) out.body = read_file(dir_ / rec.file);
  return out;
}

RecordingTransport::RecordingTransport(HttpTransport& inner, std::filesystem::path directory)
    : inner_(inner), dir_(std::move(directory)) {
  std::filesystem::create_directories(dir_);
}

HttpResponse RecordingTransport::get(const std::string& endpoint, const QueryParams& params) {
  HttpResponse res = inner_.get(endpoint, params);
  const auto manifest_path = dir_ / "manifest.json";
  json manifest = {{"version", 1}, {"responses", json::array()}};
  if (std::filesystem::exists(manifest_path)) manifest = json::parse(read_file(manifest_path));
  counter_ = manifest["responses"].size() + 1;
  json entry = {{"request", fixture_key(endpoint, params)}, {"status", res.status}};
  if (res.status != 0) {
    const auto file = fmt::format("{:04}.txt", counter_);
    write_file(dir_ / file, res.body);
    entry["file"] = file;
  } else {
    entry["file"] = nullptr;
  }
  entry["retry_after"] = res.retry_after_seconds ? json(*res.retry_after_seconds) : json(nullptr);
  manifest["responses"].push_back(entry);
  write_file(manifest_path, manifest.dump(2) + "\n");
  return res;
}

PubmedClient::PubmedClient(HttpTransport& transport, EutilsConfig config, Sleeper sleeper)
    : transport_(transport), config_(std::move(config)), sleep_(std::move(sleeper)) {
  if (!sleep_) sleep_ = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
}

HttpResponse PubmedClient::request(const std::string& endpoint, QueryParams params,
                                   const FetchSpec& spec, std::size_t completed) {
  if (!config_.tool.empty()) params.emplace_back("tool", config_.tool);
  if (!config_.email.empty()) params.emplace_back("email", config_.email);
  if (!config_.api_key.empty()) params.emplace_back("api_key", config_.api_key);

  HttpResponse res;
  auto backoff = spec.polite_delay;
  for (int attempt = 1; attempt <= kMaxAttempts; ++attempt) {
    if (requests_ > 0) sleep_(spec.polite_delay);
    ++requests_;
    res = transport_.get(endpoint, params);
    if (res.status >= 200 && res.status < 300) return res;
    const bool retryable = res.status == 0 || res.status == 429 || res.status >= 500;
    if (!retryable) break;
    if (attempt < kMaxAttempts) {
      auto wait = backoff;
      if (res.retry_after_seconds) {
        wait = std::max(wait, std::chrono::milliseconds(*res.retry_after_seconds * 1000));
      }
      sleep_(wait);
      backoff *= 2;
    }
  }
  if (res.status == 0) {
    throw FetchError(Errc::Network,
                     fmt::format("{} failed after {} attempts: {} ({} requests completed)", endpoint,
                                 kMaxAttempts, res.error, completed),
                     completed);
  }
  if (res.status == 429) {
    throw FetchError(Errc::Quota,
                     fmt::format("{} rate-limited after {} attempts ({} requests completed)",
                                 endpoint, kMaxAttempts, completed),
                     completed);
  }
  throw FetchError(Errc::Service,
                   fmt::format("{} returned HTTP {} ({} requests completed)", endpoint, res.status,
                               completed),
                   completed);
}

std::vector<std::string> PubmedClient::search_ids(const FetchSpec& spec) {
  validate(spec);
  std::vector<std::string> ids;
  std::size_t completed = 0;
  std::size_t total = 0;
  do {
    QueryParams params{{"db", "pubmed"},
                       {"term", spec.query},
                       {"retstart", std::to_string(ids.size())},
                       {"retmax", std::to_string(spec.batch_size)},
                       {"retmode", "json"}};
    if (spec.date_from || spec.date_to) {
      params.emplace_back("datetype", "pdat");
      params.emplace_back("mindate", std::to_string(spec.date_from.value_or(1800)));
      params.emplace_back("maxdate", std::to_string(spec.date_to.value_or(3000)));
    }
    auto res = request("esearch", std::move(params), spec, completed);
    ++completed;
    json body;
    try {
      body = json::parse(res.body);
      const auto& r = body.at("esearchresult");
      total = std::stoul(r.at("count").get<std::string>());
      const auto& page = r.at("idlist");
      for (const auto& id : page) ids.push_back(id.get<std::string>());
      if (page.empty()) break;
    } catch (const std::exception& e) {
      throw FetchError(Errc::Service, fmt::format("malformed esearch response: {}", e.what()),
                       completed);
    }
  } while (ids.size() < total);
  return ids;
}

FetchResult PubmedClient::fetch_medline(std::span<const std::string> pmids, const FetchSpec& spec) {
  validate(spec);
  std::vector<std::string> unique;
  std::unordered_set<std::string> seen;
  for (const auto& id : pmids) {
    if (seen.insert(id).second) unique.push_back(id);
  }
  FetchResult out;
  out.requested_ids = unique.size();
  for (std::size_t start = 0; start < unique.size(); start += spec.batch_size) {
    const auto end = std::min(unique.size(), start + spec.batch_size);
    std::string joined;
    for (auto i = start; i < end; ++i) {
      if (i > start) joined += ',';
      joined += unique[i];
    }
    auto res = request("efetch",
                       {{"db", "pubmed"}, {"id", joined}, {"rettype", "medline"}, {"retmode", "text"}},
                       spec, out.requests);
    ++out.requests;
    const auto got = count_records(res.body);
    out.returned_records += got;
    if (got < end - start) {
      out.warnings.push_back(fmt::format("MissingRecords: batch {} requested {} records, received {}",
                                         out.requests, end - start, got));
    }
    if (!out.text.empty() && !out.text.ends_with("\n\n")) out.text += out.text.ends_with('\n') ? "\n" : "\n\n";
    out.text += res.body;
  }
  return out;
}

}  // namespace mlink
