#include <doctest.h>

#include <httplib.h>
#include <json.hpp>

#include <thread>

#include "mlink/server.hpp"
#include "workflow.hpp"

using namespace mlink;
using Json = nlohmann::json;

namespace {

SessionEnv fixed_env() {
  return {[] { return std::string("2024-01-01T00:00:00.000Z"); }, [] { return std::string("s1"); }};
}

Service::Executor inline_executor() {
  return [](std::function<void()> job) { job(); };
}

ApiRequest request(std::string method, std::string path, std::string body = {}) {
  ApiRequest r;
  r.method = std::move(method);
  r.path = std::move(path);
  r.body = std::move(body);
  return r;
}

ApiRequest upload_request(const std::string& path_in_data, std::map<std::string, std::string> fields = {}) {
  const auto file = test_data(path_in_data);
  auto r = request("POST", "/corpora");
  r.parts.push_back({"file", file.filename().string(), read_text(file)});
  for (auto& [k, v] : fields) r.parts.push_back({k, "", v});
  return r;
}

Json body(const ApiResponse& r) { return Json::parse(r.body); }

std::string error_code(const ApiResponse& r) { return body(r)["error"]["code"].get<std::string>(); }

Json action(Service& svc, const std::string& session, Json payload) {
  const auto r = svc.handle(request("POST", "/sessions/" + session + "/actions", payload.dump()));
  auto j = body(r);
  j["http_status"] = r.status;
  return j;
}

}  // namespace

TEST_CASE("uploads are idempotent per content and parameters") {
  Service svc(std::make_shared<MemoryStore>(), 1 << 20, inline_executor(), fixed_env());
  const auto first = svc.handle(upload_request("toy.medline", {{"min_doc_freq", "1"}}));
  REQUIRE(first.status == 201);
  const auto j = body(first);
  CHECK(j["schema_version"] == 1);
  CHECK(j["documents"] == 5);
  CHECK(j["label"] == "toy.medline");
  CHECK(j["diagram_state"] == "ready");
  CHECK(j["diagram_id"] == j["corpus_id"]);

  const auto again = svc.handle(upload_request("toy.medline", {{"min_doc_freq", "1"}}));
  CHECK(again.status == 200);
  CHECK(body(again)["corpus_id"] == j["corpus_id"]);

  const auto conflict = svc.handle(upload_request("toy.medline", {{"min_doc_freq", "2"}}));
  CHECK(conflict.status == 409);
  CHECK(error_code(conflict) == "Conflict");

  const auto corpus = svc.handle(request("GET", "/corpora/" + j["corpus_id"].get<std::string>()));
  CHECK(corpus.status == 200);
  CHECK(body(corpus)["parameters"].is_object());
}

TEST_CASE("upload errors") {
  Service svc(std::make_shared<MemoryStore>(), 64, inline_executor(), fixed_env());
  const auto big = svc.handle(upload_request("toy.medline"));
  CHECK(big.status == 413);
  CHECK(error_code(big) == "PayloadTooLarge");

  Service roomy(std::make_shared<MemoryStore>(), 1 << 20, inline_executor(), fixed_env());
  CHECK(roomy.handle(request("POST", "/corpora")).status == 400);
  const auto bad = roomy.handle(upload_request("toy.medline", {{"threshold", "1.5"}}));
  CHECK(bad.status == 400);
  CHECK(error_code(bad) == "InvalidArgument");
  const auto junk = roomy.handle(request("POST", "/corpora", "no records here\n"));
  CHECK(error_code(junk) == "EmptyCorpus");
  CHECK(roomy.handle(request("GET", "/corpora/nope")).status == 404);
  CHECK(roomy.handle(request("GET", "/nowhere")).status == 404);
}

TEST_CASE("diagrams are pending until analysis runs") {
  std::vector<std::function<void()>> jobs;
  Service svc(std::make_shared<MemoryStore>(), 1 << 20,
              [&](std::function<void()> job) { jobs.push_back(std::move(job)); }, fixed_env());
  const auto up = svc.handle(upload_request("fixture50/records.medline"));
  REQUIRE(up.status == 201);
  CHECK(body(up)["diagram_state"] == "pending");
  const std::string id = body(up)["corpus_id"];

  const auto pending = svc.handle(request("GET", "/corpora/" + id + "/diagram"));
  CHECK(pending.status == 409);
  CHECK(pending.headers.at("Retry-After") == "1");

  REQUIRE(jobs.size() == 1);
  jobs[0]();
  auto get = request("GET", "/corpora/" + id + "/diagram");
  const auto ready = svc.handle(get);
  CHECK(ready.status == 200);
  CHECK(ready.content_type == "application/json");
  CHECK(body(ready)["clusters"].size() == 2);

  get.query["format"] = "table";
  const auto table = svc.handle(get);
  CHECK(table.content_type.rfind("text/tab-separated-values", 0) == 0);
  CHECK(table.body == read_text(test_data("fixture50/reference/diagram.tsv")));

  get.query.clear();
  get.headers["accept"] = "image/svg+xml";
  CHECK(svc.handle(get).body.find("<svg") != std::string::npos);

  get.headers.clear();
  get.query["format"] = "png";
  const auto unknown = svc.handle(get);
  CHECK(unknown.status == 400);
  CHECK(error_code(unknown) == "UnknownFormat");
}

TEST_CASE("a corpus that forms no clusters fails its diagram") {
  Service svc(std::make_shared<MemoryStore>(), 1 << 20, inline_executor(), fixed_env());
  const auto up = svc.handle(request("POST", "/corpora", "PMID- 1\nMH  - A\nMH  - B\n"));
  REQUIRE(up.status == 201);
  CHECK(body(up)["diagram_state"] == "failed");
  const auto d = svc.handle(request("GET", "/corpora/" + body(up)["corpus_id"].get<std::string>() + "/diagram"));
  CHECK(d.status == 500);
}

TEST_CASE("the discovery workflow over the service") {
  Service svc(std::make_shared<MemoryStore>(), 1 << 20, inline_executor(), fixed_env());
  const std::string src = body(svc.handle(upload_request("workflow/source.medline")))["corpus_id"];
  const std::string inter = body(svc.handle(upload_request("workflow/intermediate.medline")))["corpus_id"];

  CHECK(svc.handle(request("POST", "/sessions", R"({"corpus_id":"nope","source":"X"})")).status == 404);
  CHECK(svc.handle(request("POST", "/sessions", "{}")).status == 400);
  const auto unknown = svc.handle(request("POST", "/sessions", Json{{"corpus_id", src}, {"source", "Zzz"}}.dump()));
  CHECK(unknown.status == 422);
  CHECK(error_code(unknown) == "UnknownTerm");

  const auto created =
      svc.handle(request("POST", "/sessions", Json{{"corpus_id", src}, {"source", "Raynaud Disease"}}.dump()));
  REQUIRE(created.status == 201);
  CHECK(body(created)["session"]["session_id"] == "s1");

  auto r = action(svc, "s1", {{"action", "targets"}, {"descriptor", "Fish Oils"}});
  CHECK(r["http_status"] == 422);
  CHECK(r["error"]["code"] == "UnknownIntermediate");

  r = action(svc, "s1", {{"action", "mark"}, {"descriptor", "Fish Oils"}});
  CHECK(r["http_status"] == 200);
  r = action(svc, "s1", {{"action", "mark"}, {"descriptor", "Thromboxane A2"}});
  CHECK(r["error"]["code"] == "InvalidIntermediate");
  r = action(svc, "s1", {{"action", "targets"}, {"descriptor", "Fish Oils"}});
  CHECK(r["error"]["code"] == "SourceTermAbsent");

  r = action(svc, "s1", {{"action", "attach"}, {"descriptor", "Fish Oils"}, {"corpus_id", inter}});
  CHECK(r["http_status"] == 200);
  CHECK(r["result"]["cluster_count"] == 3);

  r = action(svc, "s1", {{"action", "targets"}, {"descriptor", "Fish Oils"}});
  REQUIRE(r["http_status"] == 200);
  const auto& targets = r["result"]["targets"];
  REQUIRE(targets.size() == 15);
  CHECK(targets[0]["descriptor"] == "Adult");
  CHECK(targets[2]["descriptor"] == "Cholesterol");
  CHECK(targets[0]["flags"] == Json::array({"STR_NEAR_ONE"}));
  CHECK(r["session"]["target_candidate_count"] == 15);

  r = action(svc, "s1", {{"action", "suggest"}});
  CHECK(r["http_status"] == 200);
  r = action(svc, "s1", {{"action", "dance"}});
  CHECK(r["http_status"] == 400);
  CHECK(action(svc, "zz", {{"action", "mark"}})["http_status"] == 404);

  auto get = request("GET", "/sessions/s1");
  CHECK(body(svc.handle(get))["session"]["intermediates"].size() == 1);
  get.query["full"] = "true";
  CHECK(body(svc.handle(get))["session"]["target_candidates"].size() == 15);
}

TEST_CASE("a directory store survives a restart") {
  const auto dir = scratch_dir("server-store");
  std::string corpus_id;
  {
    Service svc(std::make_shared<DirectoryStore>(dir), 1 << 20, inline_executor(), fixed_env());
    corpus_id = body(svc.handle(upload_request("workflow/source.medline")))["corpus_id"];
    REQUIRE(svc.handle(request("POST", "/sessions",
                               Json{{"corpus_id", corpus_id}, {"source", "Raynaud Disease"}}.dump()))
                .status == 201);
    REQUIRE(action(svc, "s1", {{"action", "mark"}, {"descriptor", "Fish Oils"}})["http_status"] == 200);
  }
  Service svc(std::make_shared<DirectoryStore>(dir), 1 << 20, inline_executor(), fixed_env());
  CHECK(svc.handle(request("GET", "/corpora/" + corpus_id + "/diagram")).status == 200);
  const auto s = body(svc.handle(request("GET", "/sessions/s1")));
  CHECK(s["session"]["intermediates"][0]["descriptor"] == "Fish Oils");
}

TEST_CASE("pending analyses are resumed after a restart") {
  const auto dir = scratch_dir("server-pending");
  std::string corpus_id;
  {
    Service svc(std::make_shared<DirectoryStore>(dir), 1 << 20, [](std::function<void()>) {}, fixed_env());
    corpus_id = body(svc.handle(upload_request("toy.medline", {{"min_doc_freq", "1"}})))["corpus_id"];
  }
  Service svc(std::make_shared<DirectoryStore>(dir), 1 << 20, {}, fixed_env());
  svc.wait_idle();
  CHECK(svc.handle(request("GET", "/corpora/" + corpus_id + "/diagram")).status == 200);
}

TEST_CASE("the HTTP listener serves the same API") {
  Service svc(std::make_shared<MemoryStore>(), 1 << 20, {}, fixed_env());
  ServerConfig cfg;
  cfg.port = 0;
  HttpServer http(svc, cfg);
  const int port = http.bind();
  REQUIRE(port > 0);
  std::thread t([&] { http.run(); });

  httplib::Client client("127.0.0.1", port);
  httplib::Result res;
  for (int i = 0; i < 100 && !(res = client.Get("/corpora/none")); ++i) {
    std::this_thread::sleep_for(std::chrono::milliseconds(20));
  }
  REQUIRE(res);
  CHECK(res->status == 404);

  httplib::MultipartFormDataItems items{
      {"file", read_text(test_data("toy.medline")), "toy.medline", "text/plain"},
      {"min_doc_freq", "1", "", ""}};
  auto up = client.Post("/corpora", items);
  REQUIRE(up);
  CHECK(up->status == 201);
  const std::string id = Json::parse(up->body)["corpus_id"];
  svc.wait_idle();
  auto d = client.Get(("/corpora/" + id + "/diagram?format=tsv").c_str());
  REQUIRE(d);
  CHECK(d->status == 200);
  CHECK(d->body.find("1\tA\t0.275462963\t0.000000000\t") != std::string::npos);

  http.stop();
  t.join();
}
