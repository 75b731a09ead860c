#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "mlink/diagram.hpp"
#include "mlink/discovery.hpp"
#include "mlink/medline.hpp"

namespace mlink {

struct ServerConfig {
  std::string host = "127.0.0.1";
  int port = 8080;
  std::optional<std::filesystem::path> store_path;  ///< in-memory store when absent
  std::size_t body_limit = 64u * 1024u * 1024u;
};

/// JSON file (keys: host, port, store, body_limit) overridden by
/// MLINK_HOST, MLINK_PORT, MLINK_STORE, MLINK_BODY_LIMIT.
ServerConfig load_server_config(const std::optional<std::filesystem::path>& path = std::nullopt);

enum class ResourceState { Pending, Ready, Failed };
std::string_view to_string(ResourceState s) noexcept;

struct CorpusRecord {
  Corpus corpus;
  AnalysisParams params;
  ParseReport report;
};

struct DiagramRecord {
  ResourceState state = ResourceState::Pending;
  std::optional<StrategicalDiagram> diagram;
  std::string error;
};

/// Resource store. Implementations are internally synchronized.
class Store {
 public:
  virtual ~Store() = default;

  virtual void put_corpus(const CorpusRecord& record) = 0;
  virtual std::optional<CorpusRecord> get_corpus(const std::string& id) const = 0;
  virtual void put_diagram(const std::string& corpus_id, const DiagramRecord& record) = 0;
  virtual std::optional<DiagramRecord> get_diagram(const std::string& corpus_id) const = 0;
  virtual void put_session(const DiscoverySession& session) = 0;
  virtual std::optional<DiscoverySession> get_session(const std::string& id) const = 0;
  /// Corpus ids whose diagram is still pending (re-queued after a restart).
  virtual std::vector<std::string> pending_diagrams() const = 0;
};

class MemoryStore : public Store {
 public:
  void put_corpus(const CorpusRecord& record) override;
  std::optional<CorpusRecord> get_corpus(const std::string& id) const override;
  void put_diagram(const std::string& corpus_id, const DiagramRecord& record) override;
  std::optional<DiagramRecord> get_diagram(const std::string& corpus_id) const override;
  void put_session(const DiscoverySession& session) override;
  std::optional<DiscoverySession> get_session(const std::string& id) const override;
  std::vector<std::string> pending_diagrams() const override;

 protected:
  mutable std::mutex mu_;
  std::map<std::string, CorpusRecord> corpora_;
  std::map<std::string, DiagramRecord> diagrams_;
  std::map<std::string, DiscoverySession> sessions_;
};

/// One file per resource under `root`:
///   corpora/<id>.json, diagrams/<id>.json, sessions/<id>.session
/// Session files use the discovery session format. Writes are atomic.
class DirectoryStore : public MemoryStore {
 public:
  explicit DirectoryStore(std::filesystem::path root);

  void put_corpus(const CorpusRecord& record) override;
  void put_diagram(const std::string& corpus_id, const DiagramRecord& record) override;
  void put_session(const DiscoverySession& session) override;

 private:
  std::filesystem::path root_;
};

struct ApiRequest {
  std::string method;
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, std::string> headers;  ///< lower-case names
  std::string body;

  struct Part {
    std::string name;
    std::string filename;
    std::string content;
  };
  std::vector<Part> parts;  ///< decoded multipart/form-data fields
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

/// Transport-independent request handling for the discovery API:
///   POST /corpora, GET /corpora/{id}, GET /corpora/{id}/diagram,
///   POST /sessions, GET /sessions/{id}, POST /sessions/{id}/actions
/// Analysis runs on a background worker; diagrams are pending until it
/// finishes. Mutations of one session are serialized.
class Service {
 public:
  /// Runs a job. The default executor is a single background worker.
  using Executor = std::function<void(std::function<void()>)>;

  Service(std::shared_ptr<Store> store, std::size_t body_limit, Executor executor = {},
          SessionEnv env = default_session_env());
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  ApiResponse handle(const ApiRequest& request);

  /// Blocks until the default worker has drained its queue.
  void wait_idle();

 private:
  ApiResponse upload(const ApiRequest& req);
  ApiResponse get_corpus(const std::string& id);
  ApiResponse get_diagram(const std::string& id, const ApiRequest& req);
  ApiResponse create_session(const ApiRequest& req);
  ApiResponse get_session(const std::string& id, const ApiRequest& req);
  ApiResponse session_action(const std::string& id, const ApiRequest& req);
  void schedule_analysis(const std::string& corpus_id);
  std::shared_ptr<std::mutex> session_lock(const std::string& id);
  void worker_loop();

  std::shared_ptr<Store> store_;
  std::size_t body_limit_;
  Executor executor_;
  SessionEnv env_;

  std::mutex locks_mu_;
  std::map<std::string, std::shared_ptr<std::mutex>> session_locks_;

  std::mutex queue_mu_;
  std::condition_variable queue_cv_;
  std::condition_variable idle_cv_;
  std::deque<std::function<void()>> queue_;
  bool busy_ = false;
  bool stopping_ = false;
  std::thread worker_;
};

/// Binds a Service to an HTTP listener.
class HttpServer {
 public:
  HttpServer(Service& service, const ServerConfig& config);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Binds (port 0 picks a free port) and returns the bound port, or -1.
  int bind();
  /// Serves until stop(); returns false if the listener failed.
  bool run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mlink
