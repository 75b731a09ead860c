// mlink: command-line front end over the C interface.
//
// Exit codes: 0 ok, 1 usage, 2 I/O, 3 empty corpus, 4 unknown term,
// 5 workflow-order violation.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <pthread.h>

#include <CLI11.hpp>

#include "mlink/mlink.h"

namespace {

struct Failure {
  int exit_code;
  std::string message;
};

void check(mlink_status st) {
  if (st != MLINK_OK) {
    throw Failure{mlink_exit_code(st),
                  std::string(mlink_status_name(st)) + ": " + mlink_last_error()};
  }
}

template <class T, void (*Free)(T*)>
struct Handle {
  T* p = nullptr;
  Handle() = default;
  Handle(const Handle&) = delete;
  Handle& operator=(const Handle&) = delete;
  ~Handle() { Free(p); }
  T** out() { return &p; }
  T* get() const { return p; }
};

using Config = Handle<mlink_config, mlink_config_free>;
using Corpus = Handle<mlink_corpus, mlink_corpus_free>;
using Diagram = Handle<mlink_diagram, mlink_diagram_free>;
using Session = Handle<mlink_session, mlink_session_free>;
using Server = Handle<mlink_server, mlink_server_free>;

/// Takes ownership of a C string from the library.
std::string take(char* s) {
  std::unique_ptr<char, void (*)(void*)> guard(s, mlink_free);
  return s != nullptr ? std::string(s) : std::string();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
  out.close();
  if (!out) throw Failure{2, "IoError: cannot write '" + path.string() + "'"};
}

/// Analysis and ranking options shared by several subcommands. Values stay
/// strings until apply() hands them to the library for validation.
struct AnalysisFlags {
  std::optional<std::string> threshold, min_doc_freq, min_cluster, max_cluster, attachment;
  std::optional<std::string> band_low, band_high, stoplist;
  std::vector<std::string> highlight;
  bool strict_titles = false;

  void add_to(CLI::App* app, bool with_analysis, bool with_band) {
    if (with_analysis) {
      app->add_option("--threshold", threshold, "Equivalence index cut-off, in (0, 1] (default 0.05)");
      app->add_option("--min-doc-freq", min_doc_freq, "Minimum descriptor document frequency (default 2)");
      app->add_option("--min-cluster", min_cluster, "Smallest kept cluster (default 3)");
      app->add_option("--max-cluster", max_cluster, "Largest cluster (default 10)");
      app->add_option("--attachment", attachment, "Cluster growth rule: max or sum (default max)");
      app->add_option("--stoplist", stoplist, "File of descriptors to drop, one per line");
    }
    if (with_band) {
      app->add_option("--band-low", band_low, "Lower bound of the near-one ratio band (default 0.5)");
      app->add_option("--band-high", band_high, "Upper bound of the near-one ratio band (default 2.0)");
    }
  }

  /// Numeric checks first; the stoplist file is read last.
  void apply(mlink_config* cfg) const {
    auto set = [&](const char* key, const std::optional<std::string>& v) {
      if (v) check(mlink_config_set(cfg, key, v->c_str()));
    };
    set("threshold", threshold);
    set("min_doc_freq", min_doc_freq);
    set("min_cluster", min_cluster);
    set("max_cluster", max_cluster);
    set("attachment", attachment);
    set("band_low", band_low);
    set("band_high", band_high);
    if (strict_titles) check(mlink_config_set(cfg, "strict_titles", "true"));
    if (!highlight.empty()) {
      std::string joined;
      for (const auto& h : highlight) joined += h + "\n";
      check(mlink_config_set(cfg, "highlight", joined.c_str()));
    }
    check(mlink_config_validate(cfg));
    if (stoplist) check(mlink_config_load_stoplist(cfg, stoplist->c_str()));
  }
};

void load_corpus(Corpus& corpus, const std::vector<std::string>& files,
                 const std::optional<std::string>& label) {
  std::vector<const char*> paths;
  for (const auto& f : files) paths.push_back(f.c_str());
  check(mlink_corpus_load_files(paths.data(), paths.size(), label ? label->c_str() : nullptr,
                                corpus.out()));
  size_t no_pmid = 0, malformed = 0, empty = 0;
  mlink_corpus_report(corpus.get(), &no_pmid, &malformed, &empty);
  if (no_pmid + malformed + empty > 0) {
    std::cerr << "mlink: skipped input: records_without_pmid=" << no_pmid
              << " malformed_lines=" << malformed << " empty_headings=" << empty << "\n";
  }
}

mlink_listing listing_of(const std::string& format) {
  if (format == "text") return MLINK_LISTING_TEXT;
  if (format == "json") return MLINK_LISTING_JSON;
  throw Failure{1, "UnknownFormat: --format must be text or json, got '" + format + "'"};
}

std::string extension_of(const std::string& format) {
  if (format == "table" || format == "tsv" || format == "canonical-table") return "tsv";
  if (format == "json" || format == "structured-document") return "json";
  if (format == "svg" || format == "vector-image") return "svg";
  throw Failure{1, "UnknownFormat: --format must be table, json or svg, got '" + format + "'"};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MeSH co-occurrence clustering, strategical diagrams and literature linking"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "mlink 0.1.0");

  // analyze
  AnalysisFlags analyze_flags;
  std::vector<std::string> analyze_inputs;
  std::string analyze_format = "json", analyze_out = ".";
  std::optional<std::string> analyze_label;
  auto* analyze = app.add_subcommand("analyze", "Cluster a corpus and export its diagram");
  analyze_flags.add_to(analyze, true, false);
  analyze->add_option("inputs", analyze_inputs, "MEDLINE files (gzip allowed)")->required();
  analyze->add_option("--format", analyze_format, "Diagram format: table, json or svg");
  analyze->add_option("--out", analyze_out, "Output directory (default .)");
  analyze->add_option("--label", analyze_label, "Corpus label (default: first file name)");
  analyze->add_option("--highlight", analyze_flags.highlight, "Descriptors to mark in the diagram");

  // suggest
  AnalysisFlags suggest_flags;
  std::string suggest_diagram, suggest_source, suggest_format = "text";
  auto* suggest = app.add_subcommand("suggest", "Rank clusters as intermediates for a source term");
  suggest_flags.add_to(suggest, false, true);
  suggest->add_option("diagram", suggest_diagram, "Diagram exported as json by analyze")->required();
  suggest->add_option("source", suggest_source, "Source descriptor")->required();
  suggest->add_option("--format", suggest_format, "Listing format: text or json");
  suggest->add_option("--highlight", suggest_flags.highlight, "Descriptors earning a HIGHLIGHT flag");

  // session
  auto* session = app.add_subcommand("session", "Drive a discovery session stored in a file");
  session->require_subcommand(1);
  std::string session_path;
  AnalysisFlags create_flags;
  std::string create_descriptor;
  std::vector<std::string> create_inputs;
  std::optional<std::string> create_label;
  auto* s_create = session->add_subcommand("create", "Start a session from a source corpus");
  create_flags.add_to(s_create, true, true);
  s_create->add_option("--session", session_path, "Session file")->required();
  s_create->add_option("descriptor", create_descriptor, "Source descriptor")->required();
  s_create->add_option("inputs", create_inputs, "Source MEDLINE files")->required();
  s_create->add_option("--label", create_label, "Corpus label (default: first file name)");
  s_create->add_flag("--strict-titles", create_flags.strict_titles, "Also scan titles for disjointness");

  std::string mark_descriptor;
  auto* s_mark = session->add_subcommand("mark", "Mark a source-diagram descriptor as intermediate");
  s_mark->add_option("--session", session_path, "Session file")->required();
  s_mark->add_option("descriptor", mark_descriptor, "Intermediate descriptor")->required();

  std::string attach_descriptor;
  std::vector<std::string> attach_inputs;
  std::optional<std::string> attach_label;
  auto* s_attach = session->add_subcommand("attach", "Attach the intermediate literature");
  s_attach->add_option("--session", session_path, "Session file")->required();
  s_attach->add_option("descriptor", attach_descriptor, "Marked intermediate descriptor")->required();
  s_attach->add_option("inputs", attach_inputs, "Intermediate MEDLINE files")->required();
  s_attach->add_option("--label", attach_label, "Corpus label (default: first file name)");

  std::string targets_intermediate, targets_format = "text";
  std::vector<std::string> targets_source;
  std::optional<std::string> targets_label;
  auto* s_targets = session->add_subcommand("targets", "Rank target candidates for an intermediate");
  s_targets->add_option("--session", session_path, "Session file")->required();
  s_targets->add_option("intermediate", targets_intermediate, "Attached intermediate descriptor")->required();
  s_targets->add_option("--source", targets_source, "Source MEDLINE files the session was created from")
      ->required();
  s_targets->add_option("--label", targets_label, "Source corpus label, if one was given at create");
  s_targets->add_option("--format", targets_format, "Listing format: text or json");

  std::string show_format = "text";
  auto* s_show = session->add_subcommand("show", "Print the audit log");
  s_show->add_option("--session", session_path, "Session file")->required();
  s_show->add_option("--format", show_format, "text (audit log) or json (whole session)");

  // fetch
  mlink_fetch_options fetch_opts;
  mlink_fetch_options_init(&fetch_opts);
  std::string fetch_query;
  std::optional<int> fetch_from, fetch_to;
  std::optional<size_t> fetch_batch;
  std::optional<long> fetch_delay;
  std::optional<std::string> fetch_config, fetch_fixtures, fetch_record, fetch_out;
  auto* fetch = app.add_subcommand("fetch", "Retrieve MEDLINE records from PubMed");
  fetch->add_option("--query", fetch_query, "PubMed query")->required();
  fetch->add_option("--from", fetch_from, "First publication year");
  fetch->add_option("--to", fetch_to, "Last publication year");
  fetch->add_option("--batch-size", fetch_batch, "Ids per request (default 200)");
  fetch->add_option("--delay-ms", fetch_delay, "Pause between requests (default 350)");
  fetch->add_option("--config", fetch_config, "E-utilities config file");
  fetch->add_option("--fixtures", fetch_fixtures, "Replay recorded responses from this directory");
  fetch->add_option("--record", fetch_record, "Record responses into this directory");
  fetch->add_option("--out", fetch_out, "MEDLINE output file (default stdout)");

  // serve
  std::optional<std::string> serve_config, serve_host, serve_port, serve_store, serve_limit;
  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--config", serve_config, "Server config file");
  serve->add_option("--host", serve_host, "Listen address (default 127.0.0.1)");
  serve->add_option("--port", serve_port, "Listen port, 0 for any (default 8080)");
  serve->add_option("--store", serve_store, "Persist resources under this directory");
  serve->add_option("--body-limit", serve_limit, "Upload size limit in bytes");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    if (*analyze) {
      Config cfg;
      check(mlink_config_new(cfg.out()));
      analyze_flags.apply(cfg.get());
      const std::string ext = extension_of(analyze_format);
      Corpus corpus;
      load_corpus(corpus, analyze_inputs, analyze_label);
      Diagram diagram;
      check(mlink_analyze(corpus.get(), cfg.get(), diagram.out()));
      char* table = nullptr;
      check(mlink_diagram_cluster_table(diagram.get(), &table));
      const std::string clusters = take(table);
      char* exported = nullptr;
      check(mlink_diagram_export(diagram.get(), analyze_format.c_str(), cfg.get(), &exported));
      const std::string body = take(exported);
      char* summary = nullptr;
      check(mlink_diagram_summary(diagram.get(), &summary));
      const std::string line = take(summary);

      std::error_code ec;
      std::filesystem::create_directories(analyze_out, ec);
      if (ec) throw Failure{2, "IoError: cannot create '" + analyze_out + "': " + ec.message()};
      write_text(std::filesystem::path(analyze_out) / "clusters.tsv", clusters);
      write_text(std::filesystem::path(analyze_out) / ("diagram." + ext), body);
      std::cout << line << "\n";
    } else if (*suggest) {
      Config cfg;
      check(mlink_config_new(cfg.out()));
      suggest_flags.apply(cfg.get());
      const auto listing = listing_of(suggest_format);
      Diagram diagram;
      check(mlink_diagram_load(suggest_diagram.c_str(), diagram.out()));
      char* out = nullptr;
      check(mlink_suggest(diagram.get(), suggest_source.c_str(), cfg.get(), listing, &out));
      std::cout << take(out);
    } else if (*s_create) {
      Config cfg;
      check(mlink_config_new(cfg.out()));
      create_flags.apply(cfg.get());
      Corpus corpus;
      load_corpus(corpus, create_inputs, create_label);
      Session s;
      check(mlink_session_create(corpus.get(), create_descriptor.c_str(), cfg.get(), s.out()));
      check(mlink_session_save(s.get(), session_path.c_str()));
      std::cout << mlink_session_id(s.get()) << "\n";
    } else if (*s_mark) {
      Session s;
      check(mlink_session_load(session_path.c_str(), s.out()));
      check(mlink_session_mark(s.get(), mark_descriptor.c_str()));
      check(mlink_session_save(s.get(), session_path.c_str()));
    } else if (*s_attach) {
      Session s;
      check(mlink_session_load(session_path.c_str(), s.out()));
      Corpus corpus;
      load_corpus(corpus, attach_inputs, attach_label);
      check(mlink_session_attach(s.get(), attach_descriptor.c_str(), corpus.get()));
      check(mlink_session_save(s.get(), session_path.c_str()));
    } else if (*s_targets) {
      const auto listing = listing_of(targets_format);
      Session s;
      check(mlink_session_load(session_path.c_str(), s.out()));
      Corpus corpus;
      load_corpus(corpus, targets_source, targets_label);
      char* out = nullptr;
      check(mlink_session_targets(s.get(), targets_intermediate.c_str(), corpus.get(), listing, &out));
      const std::string ranking = take(out);
      check(mlink_session_save(s.get(), session_path.c_str()));
      std::cout << ranking;
    } else if (*s_show) {
      const auto listing = listing_of(show_format);
      Session s;
      check(mlink_session_load(session_path.c_str(), s.out()));
      char* out = nullptr;
      check(listing == MLINK_LISTING_JSON ? mlink_session_json(s.get(), &out)
                                          : mlink_session_audit(s.get(), &out));
      std::cout << take(out);
    } else if (*fetch) {
      fetch_opts.query = fetch_query.c_str();
      if (fetch_from) fetch_opts.date_from = *fetch_from;
      if (fetch_to) fetch_opts.date_to = *fetch_to;
      if (fetch_batch) {
        if (*fetch_batch == 0) throw Failure{1, "InvalidArgument: --batch-size must be positive"};
        fetch_opts.batch_size = *fetch_batch;
      }
      if (fetch_delay) {
        if (*fetch_delay < 0) throw Failure{1, "InvalidArgument: --delay-ms must not be negative"};
        fetch_opts.polite_delay_ms = *fetch_delay;
      }
      if (fetch_config) fetch_opts.config_path = fetch_config->c_str();
      if (fetch_fixtures) fetch_opts.fixture_dir = fetch_fixtures->c_str();
      if (fetch_record) fetch_opts.record_dir = fetch_record->c_str();
      char* medline = nullptr;
      char* warnings = nullptr;
      size_t requests = 0;
      const auto st = mlink_fetch(&fetch_opts, &medline, &warnings, &requests);
      std::cerr << "mlink: requests=" << requests << "\n";
      check(st);
      const std::string text = take(medline);
      std::cerr << take(warnings);
      if (fetch_out) write_text(*fetch_out, text);
      else std::cout << text;
    } else if (*serve) {
      Server server;
      check(mlink_server_create(serve_config ? serve_config->c_str() : nullptr, server.out()));
      auto set = [&](const char* key, const std::optional<std::string>& v) {
        if (v) check(mlink_server_set(server.get(), key, v->c_str()));
      };
      set("host", serve_host);
      set("port", serve_port);
      set("store", serve_store);
      set("body_limit", serve_limit);

      sigset_t signals;
      sigemptyset(&signals);
      sigaddset(&signals, SIGINT);
      sigaddset(&signals, SIGTERM);
      pthread_sigmask(SIG_BLOCK, &signals, nullptr);

      int port = 0;
      check(mlink_server_bind(server.get(), &port));
      std::cerr << "mlink: listening on port " << port << "\n";
      std::thread waiter([&] {
        int sig = 0;
        sigwait(&signals, &sig);
        mlink_server_stop(server.get());
      });
      const auto st = mlink_server_run(server.get());
      pthread_kill(waiter.native_handle(), SIGTERM);
      waiter.join();
      check(st);
    }
  } catch (const Failure& f) {
    std::cerr << "mlink: " << f.message << "\n";
    return f.exit_code;
  }
  return 0;
}
