#include "mlink/mlink.h"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "mlink/clusterer.hpp"
#include "mlink/diagram.hpp"
#include "mlink/discovery.hpp"
#include "mlink/error.hpp"
#include "mlink/json_io.hpp"
#include "mlink/medline.hpp"
#include "mlink/pubmed.hpp"
#include "mlink/server.hpp"
#include "options.hpp"
#include "text_util.hpp"

struct mlink_config {
  mlink::detail::Options options;
};

struct mlink_corpus {
  mlink::Corpus corpus;
  mlink::ParseReport report;
};

struct mlink_diagram {
  mlink::StrategicalDiagram diagram;
};

struct mlink_session {
  mlink::DiscoverySession session;
};

struct mlink_server {
  mlink::ServerConfig config;
  std::unique_ptr<mlink::Service> service;
  std::unique_ptr<mlink::HttpServer> http;
};

namespace {

using mlink::Errc;

thread_local std::string g_last_error;

mlink_status to_status(Errc code) {
  switch (code) {
    case Errc::InvalidArgument: return MLINK_E_INVALID_ARGUMENT;
    case Errc::Io: return MLINK_E_IO;
    case Errc::EmptyHeading: return MLINK_E_EMPTY_HEADING;
    case Errc::EmptyCorpus: return MLINK_E_EMPTY_CORPUS;
    case Errc::Domain: return MLINK_E_DOMAIN;
    case Errc::NoClusters: return MLINK_E_NO_CLUSTERS;
    case Errc::CdrUndefined: return MLINK_E_CDR_UNDEFINED;
    case Errc::UnknownFormat: return MLINK_E_UNKNOWN_FORMAT;
    case Errc::UnknownTerm: return MLINK_E_UNKNOWN_TERM;
    case Errc::InvalidIntermediate: return MLINK_E_INVALID_INTERMEDIATE;
    case Errc::UnknownIntermediate: return MLINK_E_UNKNOWN_INTERMEDIATE;
    case Errc::SourceTermAbsent: return MLINK_E_SOURCE_TERM_ABSENT;
    case Errc::CorpusMismatch: return MLINK_E_CORPUS_MISMATCH;
    case Errc::CorruptSession: return MLINK_E_CORRUPT_SESSION;
    case Errc::Network: return MLINK_E_NETWORK;
    case Errc::Service: return MLINK_E_SERVICE;
    case Errc::Quota: return MLINK_E_QUOTA;
  }
  return MLINK_E_INTERNAL;
}

mlink_status fail(mlink_status status, std::string message) {
  g_last_error = std::move(message);
  return status;
}

template <class F>
mlink_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return MLINK_OK;
  } catch (const mlink::Error& e) {
    return fail(to_status(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(MLINK_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MLINK_E_INTERNAL, e.what());
  }
}

char* dup_string(std::string_view s) {
  auto* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p == nullptr) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size());
  p[s.size()] = '\0';
  return p;
}

void require(bool ok, const char* what) {
  if (!ok) throw mlink::Error(Errc::InvalidArgument, fmt::format("{} must not be null", what));
}

const mlink::detail::Options& options_or_default(const mlink_config* config) {
  static const mlink::detail::Options defaults;
  return config != nullptr ? config->options : defaults;
}

std::string join_flags(const mlink::FlagSet& flags) {
  const auto names = flags.names();
  return names.empty() ? std::string("-") : fmt::format("{}", fmt::join(names, ","));
}

std::string suggestions_text(const std::vector<mlink::Suggestion>& ranking,
                             const mlink::StrategicalDiagram& diagram) {
  std::string out;
  std::size_t rank = 0;
  for (const auto& s : ranking) {
    const auto* c = diagram.find_cluster(s.cluster_id);
    out += fmt::format("{}\t{}\t{}\t{}\t{}\t{}\n", ++rank, s.cluster_id, c->label,
                       s.sir ? fmt::format("{:.6f}", *s.sir) : std::string("-"),
                       s.score ? fmt::format("{:.6f}", *s.score) : std::string("-"),
                       join_flags(s.flags));
  }
  return out;
}

std::string targets_text(const std::vector<mlink::TargetCandidate>& ranking) {
  std::string out;
  std::size_t rank = 0;
  for (const auto& t : ranking) {
    out += fmt::format("{}\t{}\t{}\t{}\t{:.6f}\t{}\t{}\n", ++rank, t.descriptor, t.cluster_id,
                       t.str ? fmt::format("{:.6f}", t.str->ratio) : std::string("-"),
                       t.proximity, join_flags(t.flags),
                       t.disjointness.disjoint
                           ? std::string("disjoint")
                           : fmt::format("overlap:{}", fmt::join(t.disjointness.evidence, ",")));
  }
  return out;
}

void write_out(char** out, std::string_view s) {
  require(out != nullptr, "out");
  *out = dup_string(s);
}

}  // namespace

extern "C" {

const char* mlink_status_name(mlink_status status) {
  switch (status) {
    case MLINK_OK: return "Ok";
    case MLINK_E_INTERNAL: return "InternalError";
    default:
      if (status < MLINK_OK || status > MLINK_E_INTERNAL) return "Unknown";
      return mlink::to_string(static_cast<Errc>(status - 1)).data();
  }
}

int mlink_exit_code(mlink_status status) {
  switch (status) {
    case MLINK_OK:
      return 0;
    case MLINK_E_INVALID_ARGUMENT:
    case MLINK_E_UNKNOWN_FORMAT:
    case MLINK_E_DOMAIN:
    case MLINK_E_CORPUS_MISMATCH:
      return 1;
    case MLINK_E_EMPTY_CORPUS:
    case MLINK_E_EMPTY_HEADING:
    case MLINK_E_NO_CLUSTERS:
      return 3;
    case MLINK_E_UNKNOWN_TERM:
    case MLINK_E_INVALID_INTERMEDIATE:
      return 4;
    case MLINK_E_UNKNOWN_INTERMEDIATE:
    case MLINK_E_SOURCE_TERM_ABSENT:
    case MLINK_E_CDR_UNDEFINED:
      return 5;
    default:
      return 2;
  }
}

const char* mlink_last_error(void) { return g_last_error.c_str(); }

void mlink_free(void* p) { std::free(p); }

// ---- configuration

mlink_status mlink_config_new(mlink_config** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    *out = new mlink_config{};
  });
}

void mlink_config_free(mlink_config* config) { delete config; }

mlink_status mlink_config_set(mlink_config* config, const char* key, const char* value) {
  return guarded([&] {
    require(config != nullptr && key != nullptr && value != nullptr, "config, key and value");
    if (!mlink::detail::apply_option(config->options, key, value)) {
      throw mlink::Error(Errc::InvalidArgument, fmt::format("unknown option '{}'", key));
    }
  });
}

mlink_status mlink_config_load_stoplist(mlink_config* config, const char* path) {
  return guarded([&] {
    require(config != nullptr && path != nullptr, "config and path");
    mlink::detail::apply_option(config->options, "stoplist", mlink::detail::read_file(path));
  });
}

mlink_status mlink_config_validate(const mlink_config* config) {
  return guarded([&] {
    require(config != nullptr, "config");
    mlink::detail::validate(config->options);
  });
}

// ---- corpora

mlink_status mlink_corpus_load_files(const char* const* paths, size_t count, const char* label,
                                     mlink_corpus** out) {
  return guarded([&] {
    require(out != nullptr && (paths != nullptr || count == 0), "paths and out");
    std::vector<std::string> texts;
    texts.reserve(count);
    for (size_t i = 0; i < count; ++i) {
      require(paths[i] != nullptr, "path");
      texts.push_back(mlink::read_medline_file(paths[i]));
    }
    std::string name = label != nullptr ? std::string(label)
                       : count > 0      ? std::filesystem::path(paths[0]).filename().string()
                                        : std::string();
    auto c = std::make_unique<mlink_corpus>();
    c->corpus = mlink::load_corpus(texts, std::move(name), std::nullopt, &c->report);
    *out = c.release();
  });
}

mlink_status mlink_corpus_load_buffer(const char* data, size_t size, const char* label,
                                      mlink_corpus** out) {
  return guarded([&] {
    require(out != nullptr && (data != nullptr || size == 0), "data and out");
    std::string text(data, size);
    if (text.size() >= 2 && static_cast<unsigned char>(text[0]) == 0x1f &&
        static_cast<unsigned char>(text[1]) == 0x8b) {
      text = mlink::gunzip(text);
    }
    std::vector<std::string> texts{std::move(text)};
    auto c = std::make_unique<mlink_corpus>();
    c->corpus = mlink::load_corpus(texts, label != nullptr ? label : "buffer", std::nullopt, &c->report);
    *out = c.release();
  });
}

void mlink_corpus_free(mlink_corpus* corpus) { delete corpus; }

const char* mlink_corpus_id(const mlink_corpus* corpus) {
  return corpus != nullptr ? corpus->corpus.corpus_id.c_str() : "";
}

size_t mlink_corpus_document_count(const mlink_corpus* corpus) {
  return corpus != nullptr ? corpus->corpus.documents.size() : 0;
}

void mlink_corpus_report(const mlink_corpus* corpus, size_t* records_without_pmid,
                         size_t* malformed_lines, size_t* empty_headings) {
  if (corpus == nullptr) return;
  if (records_without_pmid != nullptr) *records_without_pmid = corpus->report.records_without_pmid;
  if (malformed_lines != nullptr) *malformed_lines = corpus->report.malformed_lines;
  if (empty_headings != nullptr) *empty_headings = corpus->report.empty_headings;
}

// ---- diagrams

mlink_status mlink_analyze(const mlink_corpus* corpus, const mlink_config* config,
                           mlink_diagram** out) {
  return guarded([&] {
    require(corpus != nullptr && out != nullptr, "corpus and out");
    const auto& opts = options_or_default(config);
    mlink::detail::validate(opts);
    auto d = std::make_unique<mlink_diagram>();
    d->diagram = mlink::analyze_corpus(corpus->corpus, opts.session.analysis);
    *out = d.release();
  });
}

mlink_status mlink_diagram_import(const char* json, size_t size, mlink_diagram** out) {
  return guarded([&] {
    require(out != nullptr && (json != nullptr || size == 0), "json and out");
    auto d = std::make_unique<mlink_diagram>();
    d->diagram = mlink::import_diagram(std::string_view(json, size));
    *out = d.release();
  });
}

mlink_status mlink_diagram_load(const char* path, mlink_diagram** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out");
    auto d = std::make_unique<mlink_diagram>();
    d->diagram = mlink::import_diagram(mlink::detail::read_file(path));
    *out = d.release();
  });
}

void mlink_diagram_free(mlink_diagram* diagram) { delete diagram; }

mlink_status mlink_diagram_export(const mlink_diagram* diagram, const char* format,
                                  const mlink_config* config, char** out) {
  return guarded([&] {
    require(diagram != nullptr && format != nullptr, "diagram and format");
    mlink::ExportOptions options;
    options.highlight = options_or_default(config).suggest.highlight;
    write_out(out, mlink::export_diagram(diagram->diagram, std::string_view(format), options));
  });
}

mlink_status mlink_diagram_cluster_table(const mlink_diagram* diagram, char** out) {
  return guarded([&] {
    require(diagram != nullptr, "diagram");
    write_out(out, mlink::export_cluster_table(diagram->diagram.clusters));
  });
}

mlink_status mlink_diagram_summary(const mlink_diagram* diagram, char** out) {
  return guarded([&] {
    require(diagram != nullptr, "diagram");
    write_out(out, mlink::summary_line(diagram->diagram));
  });
}

size_t mlink_diagram_cluster_count(const mlink_diagram* diagram) {
  return diagram != nullptr ? diagram->diagram.clusters.size() : 0;
}

mlink_status mlink_suggest(const mlink_diagram* diagram, const char* source_descriptor,
                           const mlink_config* config, mlink_listing listing, char** out) {
  return guarded([&] {
    require(diagram != nullptr && source_descriptor != nullptr, "diagram and source descriptor");
    const auto& opts = options_or_default(config);
    mlink::detail::validate(opts);
    const auto& d = diagram->diagram;
    const auto* c = mlink::locate_term(d, source_descriptor);
    if (c == nullptr) {
      throw mlink::Error(Errc::UnknownTerm,
                         fmt::format("'{}' is not in any cluster of the diagram", source_descriptor));
    }
    auto suggest = opts.suggest;
    suggest.band = opts.session.band;
    const auto ranking = mlink::suggest_intermediates(d, c->id, suggest);
    write_out(out, listing == MLINK_LISTING_JSON
                       ? mlink::suggestions_to_json(ranking, d).dump(2) + "\n"
                       : suggestions_text(ranking, d));
  });
}

// ---- sessions

mlink_status mlink_session_create(const mlink_corpus* source, const char* descriptor,
                                  const mlink_config* config, mlink_session** out) {
  return guarded([&] {
    require(source != nullptr && descriptor != nullptr && out != nullptr,
            "source, descriptor and out");
    const auto& opts = options_or_default(config);
    mlink::detail::validate(opts);
    auto s = std::make_unique<mlink_session>();
    s->session = mlink::create_session(source->corpus, descriptor, opts.session);
    *out = s.release();
  });
}

mlink_status mlink_session_load(const char* path, mlink_session** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "path and out");
    auto s = std::make_unique<mlink_session>();
    s->session = mlink::load_session(mlink::detail::read_file(path));
    *out = s.release();
  });
}

mlink_status mlink_session_save(const mlink_session* session, const char* path) {
  return guarded([&] {
    require(session != nullptr && path != nullptr, "session and path");
    mlink::detail::write_file_atomic(path, mlink::save_session(session->session));
  });
}

void mlink_session_free(mlink_session* session) { delete session; }

const char* mlink_session_id(const mlink_session* session) {
  return session != nullptr ? session->session.session_id.c_str() : "";
}

mlink_status mlink_session_mark(mlink_session* session, const char* descriptor) {
  return guarded([&] {
    require(session != nullptr && descriptor != nullptr, "session and descriptor");
    session->session = mlink::mark_intermediate(session->session, descriptor);
  });
}

mlink_status mlink_session_attach(mlink_session* session, const char* descriptor,
                                  const mlink_corpus* corpus) {
  return guarded([&] {
    require(session != nullptr && descriptor != nullptr && corpus != nullptr,
            "session, descriptor and corpus");
    session->session = mlink::attach_intermediate_corpus(session->session, descriptor, corpus->corpus);
  });
}

mlink_status mlink_session_targets(mlink_session* session, const char* intermediate,
                                   const mlink_corpus* source, mlink_listing listing, char** out) {
  return guarded([&] {
    require(session != nullptr && intermediate != nullptr && source != nullptr,
            "session, intermediate and source");
    require(out != nullptr, "out");
    auto [updated, ranking] = mlink::candidate_targets(session->session, intermediate, source->corpus);
    std::string text = listing == MLINK_LISTING_JSON ? mlink::targets_to_json(ranking).dump(2) + "\n"
                                                     : targets_text(ranking);
    *out = dup_string(text);
    session->session = std::move(updated);
  });
}

mlink_status mlink_session_audit(const mlink_session* session, char** out) {
  return guarded([&] {
    require(session != nullptr, "session");
    write_out(out, mlink::format_audit_log(session->session));
  });
}

mlink_status mlink_session_json(const mlink_session* session, char** out) {
  return guarded([&] {
    require(session != nullptr, "session");
    write_out(out, mlink::session_to_json(session->session).dump(2) + "\n");
  });
}

// ---- retrieval

void mlink_fetch_options_init(mlink_fetch_options* options) {
  if (options == nullptr) return;
  *options = mlink_fetch_options{};
  options->polite_delay_ms = -1;
}

mlink_status mlink_fetch(const mlink_fetch_options* options, char** out_medline,
                         char** out_warnings, size_t* out_requests) {
  if (out_requests != nullptr) *out_requests = 0;
  std::unique_ptr<mlink::PubmedClient> client;
  auto status = guarded([&] {
    require(options != nullptr && options->query != nullptr && out_medline != nullptr,
            "options, query and out_medline");
    mlink::FetchSpec spec;
    spec.query = options->query;
    if (options->date_from != 0) spec.date_from = options->date_from;
    if (options->date_to != 0) spec.date_to = options->date_to;
    if (options->batch_size != 0) spec.batch_size = options->batch_size;
    if (options->polite_delay_ms >= 0) spec.polite_delay = std::chrono::milliseconds(options->polite_delay_ms);
    mlink::validate(spec);

    auto config = mlink::load_eutils_config(
        options->config_path != nullptr ? std::optional<std::filesystem::path>(options->config_path)
                                        : std::nullopt);
    std::unique_ptr<mlink::HttpTransport> base;
    if (options->fixture_dir != nullptr) {
      base = std::make_unique<mlink::FixtureTransport>(options->fixture_dir);
    } else {
      base = mlink::make_http_transport(config);
    }
    std::unique_ptr<mlink::HttpTransport> recorder;
    mlink::HttpTransport* transport = base.get();
    if (options->record_dir != nullptr) {
      recorder = std::make_unique<mlink::RecordingTransport>(*base, options->record_dir);
      transport = recorder.get();
    }
    mlink::PubmedClient::Sleeper sleeper;
    if (options->fixture_dir != nullptr) sleeper = [](std::chrono::milliseconds) {};
    mlink::PubmedClient c(*transport, config, sleeper);
    try {
      const auto ids = c.search_ids(spec);
      auto result = c.fetch_medline(ids, spec);
      if (out_requests != nullptr) *out_requests = c.requests_issued();
      std::string warnings;
      for (const auto& w : result.warnings) warnings += w + "\n";
      *out_medline = dup_string(result.text);
      if (out_warnings != nullptr) *out_warnings = dup_string(warnings);
    } catch (...) {
      if (out_requests != nullptr) *out_requests = c.requests_issued();
      throw;
    }
  });
  return status;
}

// ---- HTTP service

mlink_status mlink_server_create(const char* config_path, mlink_server** out) {
  return guarded([&] {
    require(out != nullptr, "out");
    auto s = std::make_unique<mlink_server>();
    s->config = mlink::load_server_config(
        config_path != nullptr ? std::optional<std::filesystem::path>(config_path) : std::nullopt);
    *out = s.release();
  });
}

mlink_status mlink_server_set(mlink_server* server, const char* key, const char* value) {
  return guarded([&] {
    require(server != nullptr && key != nullptr && value != nullptr, "server, key and value");
    if (server->http) throw mlink::Error(Errc::InvalidArgument, "server is already bound");
    const std::string_view k = key;
    if (k == "host") {
      server->config.host = value;
    } else if (k == "port") {
      const auto port = mlink::detail::parse_integer("port", value);
      if (port < 0 || port > 65535) throw mlink::Error(Errc::InvalidArgument, "--port must lie in [0, 65535]");
      server->config.port = static_cast<int>(port);
    } else if (k == "store") {
      server->config.store_path = std::filesystem::path(value);
    } else if (k == "body_limit") {
      const auto limit = mlink::detail::parse_integer("body_limit", value);
      if (limit <= 0) throw mlink::Error(Errc::InvalidArgument, "--body-limit must be positive");
      server->config.body_limit = static_cast<std::size_t>(limit);
    } else {
      throw mlink::Error(Errc::InvalidArgument, fmt::format("unknown server option '{}'", key));
    }
  });
}

mlink_status mlink_server_bind(mlink_server* server, int* out_port) {
  return guarded([&] {
    require(server != nullptr, "server");
    if (!server->http) {
      std::shared_ptr<mlink::Store> store;
      if (server->config.store_path) {
        store = std::make_shared<mlink::DirectoryStore>(*server->config.store_path);
      } else {
        store = std::make_shared<mlink::MemoryStore>();
      }
      server->service = std::make_unique<mlink::Service>(store, server->config.body_limit);
      server->http = std::make_unique<mlink::HttpServer>(*server->service, server->config);
      const int port = server->http->bind();
      if (port < 0) {
        server->http.reset();
        server->service.reset();
        throw mlink::Error(Errc::Io, fmt::format("cannot listen on {}:{}", server->config.host,
                                                 server->config.port));
      }
      server->config.port = port;
    }
    if (out_port != nullptr) *out_port = server->config.port;
  });
}

mlink_status mlink_server_run(mlink_server* server) {
  return guarded([&] {
    require(server != nullptr, "server");
    if (!server->http) {
      if (auto st = mlink_server_bind(server, nullptr); st != MLINK_OK) {
        throw mlink::Error(Errc::Io, g_last_error);
      }
    }
    if (!server->http->run()) throw mlink::Error(Errc::Io, "listener failed");
  });
}

void mlink_server_stop(mlink_server* server) {
  if (server != nullptr && server->http) server->http->stop();
}

void mlink_server_free(mlink_server* server) {
  if (server == nullptr) return;
  mlink_server_stop(server);
  server->http.reset();
  server->service.reset();
  delete server;
}

}  // extern "C"
