#include "mlink/server.hpp"

#include <cstdlib>

#include <fmt/format.h>
#include <httplib.h>

#include "mlink/error.hpp"
#include "mlink/json_io.hpp"
#include "options.hpp"
#include "text_util.hpp"

namespace mlink {

namespace {

constexpr std::string_view kTsv = "text/tab-separated-values; charset=utf-8";
constexpr std::string_view kSvg = "image/svg+xml";

ApiResponse json_response(int status, const Json& body) {
  ApiResponse r;
  r.status = status;
  r.body = body.dump(2) + "\n";
  return r;
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
  return json_response(status, Json{{"schema_version", kApiSchemaVersion},
                                    {"error", Json{{"code", code}, {"message", message}}}});
}

int http_status(Errc code) {
  switch (code) {
    case Errc::UnknownTerm:
    case Errc::InvalidIntermediate:
    case Errc::UnknownIntermediate:
    case Errc::SourceTermAbsent:
    case Errc::CdrUndefined:
    case Errc::NoClusters:
    case Errc::CorpusMismatch:
      return 422;
    case Errc::CorruptSession:
    case Errc::Network:
    case Errc::Service:
    case Errc::Quota:
      return 500;
    default:
      return 400;
  }
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> out;
  while (!path.empty()) {
    if (path.front() == '/') {
      path.remove_prefix(1);
      continue;
    }
    auto slash = path.find('/');
    out.emplace_back(path.substr(0, slash));
    if (slash == std::string_view::npos) break;
    path.remove_prefix(slash);
  }
  return out;
}

Json corpus_to_json(const CorpusRecord& rec) {
  Json docs = Json::array();
  for (const auto& d : rec.corpus.documents) {
    docs.push_back(Json{{"pmid", d.pmid}, {"title", d.title}, {"mesh_terms", d.mesh_terms}});
  }
  Json prov = nullptr;
  if (const auto& p = rec.corpus.provenance) {
    prov = Json{{"query", p->query},
                {"date_from", p->date_from ? Json(*p->date_from) : Json(nullptr)},
                {"date_to", p->date_to ? Json(*p->date_to) : Json(nullptr)},
                {"fetched_at", p->fetched_at}};
  }
  return Json{{"corpus_id", rec.corpus.corpus_id},
              {"label", rec.corpus.label},
              {"provenance", prov},
              {"parameters", params_to_json(rec.params)},
              {"parse_report",
               Json{{"records_without_pmid", rec.report.records_without_pmid},
                    {"malformed_lines", rec.report.malformed_lines},
                    {"empty_headings", rec.report.empty_headings}}},
              {"documents", std::move(docs)}};
}

CorpusRecord corpus_from_json(const Json& j) {
  CorpusRecord rec;
  rec.corpus.corpus_id = j.at("corpus_id").get<std::string>();
  rec.corpus.label = j.at("label").get<std::string>();
  if (!j.at("provenance").is_null()) {
    const auto& p = j["provenance"];
    Provenance prov;
    prov.query = p.at("query").get<std::string>();
    if (!p.at("date_from").is_null()) prov.date_from = p["date_from"].get<int>();
    if (!p.at("date_to").is_null()) prov.date_to = p["date_to"].get<int>();
    prov.fetched_at = p.at("fetched_at").get<std::string>();
    rec.corpus.provenance = prov;
  }
  rec.params = params_from_json(j.at("parameters"));
  const auto& r = j.at("parse_report");
  rec.report.records_without_pmid = r.at("records_without_pmid").get<std::size_t>();
  rec.report.malformed_lines = r.at("malformed_lines").get<std::size_t>();
  rec.report.empty_headings = r.at("empty_headings").get<std::size_t>();
  for (const auto& d : j.at("documents")) {
    rec.corpus.documents.push_back(Document{d.at("pmid").get<std::string>(),
                                            d.at("title").get<std::string>(),
                                            d.at("mesh_terms").get<std::vector<std::string>>()});
  }
  return rec;
}

Json diagram_record_to_json(const DiagramRecord& rec) {
  return Json{{"state", to_string(rec.state)},
              {"error", rec.error},
              {"diagram", rec.diagram ? diagram_to_json(*rec.diagram) : Json(nullptr)}};
}

DiagramRecord diagram_record_from_json(const Json& j) {
  DiagramRecord rec;
  const auto state = j.at("state").get<std::string>();
  rec.state = state == "ready"    ? ResourceState::Ready
              : state == "failed" ? ResourceState::Failed
                                  : ResourceState::Pending;
  rec.error = j.at("error").get<std::string>();
  if (!j.at("diagram").is_null()) rec.diagram = diagram_from_json(j["diagram"]);
  return rec;
}

Json session_view(const DiscoverySession& s) {
  Json intermediates = Json::array();
  for (const auto& e : s.intermediates) {
    intermediates.push_back(Json{
        {"descriptor", e.descriptor},
        {"cluster_id", e.cluster_id ? Json(*e.cluster_id) : Json(nullptr)},
        {"corpus_id", e.corpus_id ? Json(*e.corpus_id) : Json(nullptr)},
        {"has_diagram", e.diagram.has_value()},
        {"cluster_count", e.diagram ? Json(e.diagram->clusters.size()) : Json(nullptr)},
    });
  }
  Json audit = Json::array();
  for (const auto& a : s.audit_log) {
    audit.push_back(Json{{"seq", a.seq}, {"timestamp", a.timestamp}, {"action", a.action},
                         {"detail", a.detail}});
  }
  const Cluster* src = locate_term(s.source.diagram, s.source.descriptor);
  return Json{
      {"session_id", s.session_id},
      {"source",
       Json{{"corpus_id", s.source.corpus_id},
            {"descriptor", s.source.descriptor},
            {"cluster_id", src != nullptr ? Json(src->id) : Json(nullptr)}}},
      {"band", Json{{"low", s.config.band.low}, {"high", s.config.band.high}}},
      {"intermediates", std::move(intermediates)},
      {"target_candidate_count", s.target_candidates.size()},
      {"audit_log", std::move(audit)},
  };
}

bool is_gzip(std::string_view s) {
  return s.size() >= 2 && static_cast<unsigned char>(s[0]) == 0x1f &&
         static_cast<unsigned char>(s[1]) == 0x8b;
}

std::string body_field(const Json& body, const char* key) {
  if (!body.contains(key)) return {};
  const auto& v = body[key];
  if (v.is_string()) return v.get<std::string>();
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_number()) return v.dump();
  return {};
}

}  // namespace

std::string_view to_string(ResourceState s) noexcept {
  switch (s) {
    case ResourceState::Pending: return "pending";
    case ResourceState::Ready: return "ready";
    case ResourceState::Failed: return "failed";
  }
  return "";
}

ServerConfig load_server_config(const std::optional<std::filesystem::path>& path) {
  ServerConfig cfg;
  if (path) {
    Json j;
    try {
      j = Json::parse(detail::read_file(*path));
    } catch (const Json::exception& e) {
      throw Error(Errc::InvalidArgument, fmt::format("bad config '{}': {}", path->string(), e.what()));
    }
    cfg.host = j.value("host", cfg.host);
    cfg.port = j.value("port", cfg.port);
    if (j.contains("store") && j["store"].is_string()) cfg.store_path = j["store"].get<std::string>();
    cfg.body_limit = j.value("body_limit", cfg.body_limit);
  }
  if (const char* v = std::getenv("MLINK_HOST")) cfg.host = v;
  if (const char* v = std::getenv("MLINK_PORT")) cfg.port = static_cast<int>(detail::parse_integer("MLINK_PORT", v));
  if (const char* v = std::getenv("MLINK_STORE")) cfg.store_path = std::filesystem::path(v);
  if (const char* v = std::getenv("MLINK_BODY_LIMIT")) {
    cfg.body_limit = static_cast<std::size_t>(detail::parse_integer("MLINK_BODY_LIMIT", v));
  }
  return cfg;
}

// ---- MemoryStore ----------------------------------------------------------

void MemoryStore::put_corpus(const CorpusRecord& record) {
  std::lock_guard lock(mu_);
  corpora_[record.corpus.corpus_id] = record;
}

std::optional<CorpusRecord> MemoryStore::get_corpus(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = corpora_.find(id);
  if (it == corpora_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::put_diagram(const std::string& corpus_id, const DiagramRecord& record) {
  std::lock_guard lock(mu_);
  diagrams_[corpus_id] = record;
}

std::optional<DiagramRecord> MemoryStore::get_diagram(const std::string& corpus_id) const {
  std::lock_guard lock(mu_);
  auto it = diagrams_.find(corpus_id);
  if (it == diagrams_.end()) return std::nullopt;
  return it->second;
}

void MemoryStore::put_session(const DiscoverySession& session) {
  std::lock_guard lock(mu_);
  sessions_[session.session_id] = session;
}

std::optional<DiscoverySession> MemoryStore::get_session(const std::string& id) const {
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  if (it == sessions_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryStore::pending_diagrams() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& [id, rec] : diagrams_) {
    if (rec.state == ResourceState::Pending) out.push_back(id);
  }
  return out;
}

// ---- DirectoryStore -------------------------------------------------------

DirectoryStore::DirectoryStore(std::filesystem::path root) : root_(std::move(root)) {
  namespace fs = std::filesystem;
  for (const char* sub : {"corpora", "diagrams", "sessions"}) fs::create_directories(root_ / sub);
  try {
    for (const auto& entry : fs::directory_iterator(root_ / "corpora")) {
      if (entry.path().extension() != ".json") continue;
      auto rec = corpus_from_json(Json::parse(detail::read_file(entry.path())));
      corpora_[rec.corpus.corpus_id] = std::move(rec);
    }
    for (const auto& entry : fs::directory_iterator(root_ / "diagrams")) {
      if (entry.path().extension() != ".json") continue;
      diagrams_[entry.path().stem().string()] =
          diagram_record_from_json(Json::parse(detail::read_file(entry.path())));
    }
  } catch (const Json::exception& e) {
    throw Error(Errc::Io, fmt::format("corrupt store under '{}': {}", root_.string(), e.what()));
  }
  for (const auto& entry : fs::directory_iterator(root_ / "sessions")) {
    if (entry.path().extension() != ".session") continue;
    auto s = load_session(detail::read_file(entry.path()));
    sessions_[s.session_id] = std::move(s);
  }
}

void DirectoryStore::put_corpus(const CorpusRecord& record) {
  std::lock_guard lock(mu_);
  detail::write_file_atomic(root_ / "corpora" / (record.corpus.corpus_id + ".json"),
                            corpus_to_json(record).dump() + "\n");
  corpora_[record.corpus.corpus_id] = record;
}

void DirectoryStore::put_diagram(const std::string& corpus_id, const DiagramRecord& record) {
  std::lock_guard lock(mu_);
  detail::write_file_atomic(root_ / "diagrams" / (corpus_id + ".json"),
                            diagram_record_to_json(record).dump() + "\n");
  diagrams_[corpus_id] = record;
}

void DirectoryStore::put_session(const DiscoverySession& session) {
  std::lock_guard lock(mu_);
  detail::write_file_atomic(root_ / "sessions" / (session.session_id + ".session"),
                            save_session(session));
  sessions_[session.session_id] = session;
}

// ---- Service --------------------------------------------------------------

Service::Service(std::shared_ptr<Store> store, std::size_t body_limit, Executor executor,
                 SessionEnv env)
    : store_(std::move(store)), body_limit_(body_limit), executor_(std::move(executor)),
      env_(std::move(env)) {
  if (!executor_) {
    worker_ = std::thread([this] { worker_loop(); });
    executor_ = [this](std::function<void()> job) {
      {
        std::lock_guard lock(queue_mu_);
        queue_.push_back(std::move(job));
      }
      queue_cv_.notify_one();
    };
  }
  for (const auto& id : store_->pending_diagrams()) schedule_analysis(id);
}

Service::~Service() {
  {
    std::lock_guard lock(queue_mu_);
    stopping_ = true;
  }
  queue_cv_.notify_all();
  if (worker_.joinable()) worker_.join();
}

void Service::worker_loop() {
  std::unique_lock lock(queue_mu_);
  while (true) {
    queue_cv_.wait(lock, [this] { return stopping_ || !queue_.empty(); });
    if (queue_.empty()) return;  // stopping with nothing left
    auto job = std::move(queue_.front());
    queue_.pop_front();
    busy_ = true;
    lock.unlock();
    job();
    lock.lock();
    busy_ = false;
    if (queue_.empty()) idle_cv_.notify_all();
  }
}

void Service::wait_idle() {
  std::unique_lock lock(queue_mu_);
  idle_cv_.wait(lock, [this] { return queue_.empty() && !busy_; });
}

void Service::schedule_analysis(const std::string& corpus_id) {
  executor_([store = store_, corpus_id] {
    DiagramRecord rec;
    try {
      auto corpus = store->get_corpus(corpus_id);
      if (!corpus) throw Error(Errc::Io, "corpus vanished from the store");
      rec.diagram = analyze_corpus(corpus->corpus, corpus->params);
      rec.state = ResourceState::Ready;
    } catch (const Error& e) {
      rec.state = ResourceState::Failed;
      rec.error = fmt::format("{}: {}", to_string(e.code()), e.what());
    } catch (const std::exception& e) {
      rec.state = ResourceState::Failed;
      rec.error = e.what();
    }
    store->put_diagram(corpus_id, rec);
  });
}

std::shared_ptr<std::mutex> Service::session_lock(const std::string& id) {
  std::lock_guard lock(locks_mu_);
  auto& m = session_locks_[id];
  if (!m) m = std::make_shared<std::mutex>();
  return m;
}

ApiResponse Service::handle(const ApiRequest& req) {
  const auto seg = split_path(req.path);
  try {
    if (seg.size() == 1 && seg[0] == "corpora" && req.method == "POST") return upload(req);
    if (seg.size() == 2 && seg[0] == "corpora" && req.method == "GET") return get_corpus(seg[1]);
    if (seg.size() == 3 && seg[0] == "corpora" && seg[2] == "diagram" && req.method == "GET") {
      return get_diagram(seg[1], req);
    }
    if (seg.size() == 1 && seg[0] == "sessions" && req.method == "POST") return create_session(req);
    if (seg.size() == 2 && seg[0] == "sessions" && req.method == "GET") return get_session(seg[1], req);
    if (seg.size() == 3 && seg[0] == "sessions" && seg[2] == "actions" && req.method == "POST") {
      return session_action(seg[1], req);
    }
    return error_response(404, "NotFound", fmt::format("no route for {} {}", req.method, req.path));
  } catch (const Error& e) {
    return error_response(http_status(e.code()), to_string(e.code()), e.what());
  } catch (const Json::exception& e) {
    return error_response(400, "InvalidArgument", e.what());
  } catch (const std::exception& e) {
    return error_response(500, "Internal", e.what());
  }
}

ApiResponse Service::upload(const ApiRequest& req) {
  std::size_t size = req.body.size();
  for (const auto& p : req.parts) size += p.content.size();
  if (size > body_limit_) {
    return error_response(413, "PayloadTooLarge",
                          fmt::format("body of {} bytes exceeds the {} byte limit", size, body_limit_));
  }

  std::vector<std::string> texts;
  std::map<std::string, std::string> fields = req.query;
  std::string first_filename;
  if (!req.parts.empty()) {
    for (const auto& p : req.parts) {
      if (p.name == "file" || !p.filename.empty()) {
        texts.push_back(is_gzip(p.content) ? gunzip(p.content) : p.content);
        if (first_filename.empty()) first_filename = p.filename;
      } else {
        fields[p.name] = p.content;
      }
    }
  } else if (!req.body.empty()) {
    texts.push_back(is_gzip(req.body) ? gunzip(req.body) : req.body);
  }
  if (texts.empty()) return error_response(400, "EmptyCorpus", "no MEDLINE content in the request");

  detail::Options opts;
  for (const auto& [key, value] : fields) detail::apply_option(opts, key, value);  // unknown keys ignored
  detail::validate(opts);

  std::string label = fields.count("label") ? fields["label"] : first_filename;
  if (label.empty()) label = "upload";
  std::optional<Provenance> provenance;
  if (fields.count("query")) {
    Provenance p;
    p.query = fields["query"];
    if (fields.count("date_from")) p.date_from = static_cast<int>(detail::parse_integer("date_from", fields["date_from"]));
    if (fields.count("date_to")) p.date_to = static_cast<int>(detail::parse_integer("date_to", fields["date_to"]));
    if (fields.count("fetched_at")) p.fetched_at = fields["fetched_at"];
    provenance = p;
  }

  CorpusRecord rec;
  rec.corpus = load_corpus(texts, label, provenance, &rec.report);
  rec.params = opts.session.analysis;
  const std::string id = rec.corpus.corpus_id;

  int status = 201;
  if (auto existing = store_->get_corpus(id)) {
    if (!(existing->params == rec.params)) {
      return error_response(409, "Conflict",
                            "this corpus was already uploaded with different analysis parameters");
    }
    status = 200;
  } else {
    store_->put_corpus(rec);
    store_->put_diagram(id, DiagramRecord{});
    schedule_analysis(id);
  }
  const auto diagram = store_->get_diagram(id);
  return json_response(status, Json{{"schema_version", kApiSchemaVersion},
                                    {"corpus_id", id},
                                    {"diagram_id", id},
                                    {"label", rec.corpus.label},
                                    {"documents", rec.corpus.documents.size()},
                                    {"diagram_state", to_string(diagram ? diagram->state : ResourceState::Pending)},
                                    {"parse_report",
                                     Json{{"records_without_pmid", rec.report.records_without_pmid},
                                          {"malformed_lines", rec.report.malformed_lines},
                                          {"empty_headings", rec.report.empty_headings}}}});
}

ApiResponse Service::get_corpus(const std::string& id) {
  auto rec = store_->get_corpus(id);
  if (!rec) return error_response(404, "NotFound", fmt::format("unknown corpus '{}'", id));
  auto diagram = store_->get_diagram(id);
  Json prov = nullptr;
  if (rec->corpus.provenance) prov = corpus_to_json(*rec)["provenance"];
  return json_response(200, Json{{"schema_version", kApiSchemaVersion},
                                 {"corpus_id", id},
                                 {"label", rec->corpus.label},
                                 {"documents", rec->corpus.documents.size()},
                                 {"provenance", prov},
                                 {"parameters", params_to_json(rec->params)},
                                 {"diagram_state", to_string(diagram ? diagram->state : ResourceState::Pending)}});
}

ApiResponse Service::get_diagram(const std::string& id, const ApiRequest& req) {
  if (!store_->get_corpus(id)) return error_response(404, "NotFound", fmt::format("unknown corpus '{}'", id));
  ExportFormat format = ExportFormat::StructuredDocument;
  if (auto it = req.query.find("format"); it != req.query.end()) {
    format = parse_export_format(it->second);
  } else if (auto h = req.headers.find("accept"); h != req.headers.end()) {
    if (h->second.find("text/tab-separated-values") != std::string::npos) format = ExportFormat::CanonicalTable;
    else if (h->second.find("image/svg+xml") != std::string::npos) format = ExportFormat::VectorImage;
  }
  auto rec = store_->get_diagram(id);
  if (!rec || rec->state == ResourceState::Pending) {
    auto r = error_response(409, "Pending", "analysis is still running; retry later");
    r.headers["Retry-After"] = "1";
    return r;
  }
  if (rec->state == ResourceState::Failed) return error_response(500, "AnalysisFailed", rec->error);

  ExportOptions options;
  if (auto it = req.query.find("highlight"); it != req.query.end()) {
    detail::Options o;
    detail::apply_option(o, "highlight", it->second);
    options.highlight = o.suggest.highlight;
  }
  ApiResponse r;
  r.body = export_diagram(*rec->diagram, format, options);
  r.content_type = format == ExportFormat::CanonicalTable ? std::string(kTsv)
                   : format == ExportFormat::VectorImage  ? std::string(kSvg)
                                                          : std::string("application/json");
  return r;
}

ApiResponse Service::create_session(const ApiRequest& req) {
  const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
  const std::string corpus_id = body_field(body, "corpus_id");
  std::string source = body_field(body, "source");
  if (source.empty()) source = body_field(body, "descriptor");
  if (corpus_id.empty() || source.empty()) {
    return error_response(400, "InvalidArgument", "corpus_id and source are required");
  }
  auto rec = store_->get_corpus(corpus_id);
  if (!rec) return error_response(404, "NotFound", fmt::format("unknown corpus '{}'", corpus_id));

  detail::Options opts;
  opts.session.analysis = rec->params;
  for (const char* key : {"band_low", "band_high", "strict_titles"}) {
    if (auto v = body_field(body, key); !v.empty()) detail::apply_option(opts, key, v);
  }
  detail::validate(opts);

  auto session = mlink::create_session(rec->corpus, source, opts.session, env_);
  store_->put_session(session);
  return json_response(201, Json{{"schema_version", kApiSchemaVersion},
                                 {"action", "create"},
                                 {"session", session_view(session)},
                                 {"result", nullptr}});
}

ApiResponse Service::get_session(const std::string& id, const ApiRequest& req) {
  auto s = store_->get_session(id);
  if (!s) return error_response(404, "NotFound", fmt::format("unknown session '{}'", id));
  const bool full = req.query.count("full") && (req.query.at("full") == "true" || req.query.at("full") == "1");
  return json_response(200, Json{{"schema_version", kApiSchemaVersion},
                                 {"session", full ? session_to_json(*s) : session_view(*s)}});
}

ApiResponse Service::session_action(const std::string& id, const ApiRequest& req) {
  if (!store_->get_session(id)) return error_response(404, "NotFound", fmt::format("unknown session '{}'", id));
  const Json body = req.body.empty() ? Json::object() : Json::parse(req.body);
  const std::string action = body_field(body, "action");
  const std::string descriptor = body_field(body, "descriptor");

  auto lock_ptr = session_lock(id);
  std::lock_guard lock(*lock_ptr);
  DiscoverySession s = *store_->get_session(id);
  Json result = nullptr;

  if (action == "mark") {
    s = mark_intermediate(s, descriptor, env_);
    const auto* e = s.find_intermediate(descriptor);
    result = Json{{"descriptor", descriptor},
                  {"cluster_id", e->cluster_id ? Json(*e->cluster_id) : Json(nullptr)}};
  } else if (action == "attach") {
    const std::string corpus_id = body_field(body, "corpus_id");
    auto rec = store_->get_corpus(corpus_id);
    if (!rec) return error_response(404, "NotFound", fmt::format("unknown corpus '{}'", corpus_id));
    s = attach_intermediate_corpus(s, descriptor, rec->corpus, env_);
    const auto* e = s.find_intermediate(descriptor);
    result = Json{{"descriptor", descriptor},
                  {"corpus_id", corpus_id},
                  {"cluster_count", e->diagram->clusters.size()},
                  {"median_density", e->diagram->median_density},
                  {"median_centrality", e->diagram->median_centrality}};
  } else if (action == "targets") {
    auto source = store_->get_corpus(s.source.corpus_id);
    if (!source) throw Error(Errc::Io, "source corpus missing from the store");
    auto [updated, ranking] = candidate_targets(s, descriptor, source->corpus, env_);
    s = std::move(updated);
    result = Json{{"intermediate", descriptor}, {"targets", targets_to_json(ranking)}};
  } else if (action == "suggest") {
    const std::string term = descriptor.empty() ? s.source.descriptor : descriptor;
    const Cluster* c = locate_term(s.source.diagram, term);
    if (c == nullptr) {
      throw Error(Errc::UnknownTerm, fmt::format("'{}' is not in any cluster of the source diagram", term));
    }
    SuggestOptions opts;
    opts.band = s.config.band;
    if (body.contains("highlight") && body["highlight"].is_array()) {
      for (const auto& h : body["highlight"]) opts.highlight.insert(h.get<std::string>());
    }
    const auto suggestions = suggest_intermediates(s.source.diagram, c->id, opts);
    result = Json{{"source_cluster", c->id},
                  {"band", Json{{"low", opts.band.low}, {"high", opts.band.high}}},
                  {"suggestions", suggestions_to_json(suggestions, s.source.diagram)}};
  } else {
    return error_response(400, "InvalidArgument",
                          fmt::format("unknown action '{}' (expected mark, attach, targets, suggest)", action));
  }
  store_->put_session(s);
  return json_response(200, Json{{"schema_version", kApiSchemaVersion},
                                 {"action", action},
                                 {"session", session_view(s)},
                                 {"result", std::move(result)}});
}

// ---- HttpServer -----------------------------------------------------------

struct HttpServer::Impl {
  Service& service;
  ServerConfig config;
  httplib::Server server;
  int port = -1;

  Impl(Service& s, ServerConfig c) : service(s), config(std::move(c)) {}
};

HttpServer::HttpServer(Service& service, const ServerConfig& config)
    : impl_(std::make_unique<Impl>(service, config)) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest r;
    r.method = req.method;
    r.path = req.path;
    for (const auto& [k, v] : req.params) r.query[k] = v;
    for (const auto& [k, v] : req.headers) r.headers[detail::to_lower(k)] = v;
    r.body = req.body;
    for (const auto& [name, file] : req.files) {
      r.parts.push_back({file.name, file.filename, file.content});
    }
    const auto out = impl_->service.handle(r);
    res.status = out.status;
    for (const auto& [k, v] : out.headers) res.set_header(k, v);
    res.set_content(out.body, out.content_type);
  };
  impl_->server.Get(".*", handler);
  impl_->server.Post(".*", handler);
  impl_->server.set_payload_max_length(config.body_limit);
}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
  auto& s = impl_->server;
  if (impl_->config.port == 0) {
    impl_->port = s.bind_to_any_port(impl_->config.host);
  } else {
    impl_->port = s.bind_to_port(impl_->config.host, impl_->config.port) ? impl_->config.port : -1;
  }
  return impl_->port;
}

bool HttpServer::run() {
  if (impl_->port < 0 && bind() < 0) return false;
  return impl_->server.listen_after_bind();
}

void HttpServer::stop() {
  if (impl_ && impl_->server.is_running()) impl_->server.stop();
}

}  // namespace mlink
