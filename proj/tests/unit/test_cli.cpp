#include <doctest.h>

#include <json.hpp>

#include "cli_runner.hpp"
#include "mlink/discovery.hpp"
#include "workflow.hpp"

using Json = nlohmann::json;

namespace {

std::string data(const char* rel) { return test_data(rel).string(); }

}  // namespace

TEST_CASE("analyze writes the cluster table and the diagram") {
  const auto out = scratch_dir("cli-analyze");
  const auto r = run_cli({"analyze", data("fixture50/records.medline"), "--format", "table", "--out", out.string()});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out == read_text(test_data("fixture50/reference/summary.txt")));
  CHECK(read_text(out / "clusters.tsv") == read_text(test_data("fixture50/reference/clusters.tsv")));
  CHECK(read_text(out / "diagram.tsv") == read_text(test_data("fixture50/reference/diagram.tsv")));

  const auto svg = run_cli({"analyze", data("toy.medline"), "--min-doc-freq", "1", "--format", "svg", "--out", out.string()});
  REQUIRE(svg.exit_code == 0);
  CHECK(svg.out == "documents=5 terms=4 clusters=1\n");
  CHECK(read_text(out / "diagram.svg").find("<svg") != std::string::npos);
}

TEST_CASE("exit codes follow the error category") {
  CHECK(run_cli({}).exit_code == 1);
  CHECK(run_cli({"analyze"}).exit_code == 1);
  CHECK(run_cli({"analyze", data("toy.medline"), "--threshold", "1.5"}).exit_code == 1);
  CHECK(run_cli({"analyze", data("toy.medline"), "--format", "png"}).exit_code == 1);
  CHECK(run_cli({"analyze", "/nonexistent/x.medline"}).exit_code == 2);

  const auto dir = scratch_dir("cli-exit");
  const auto junk = dir / "junk.medline";
  std::ofstream(junk) << "nothing here\n";
  const auto empty = run_cli({"analyze", junk.string(), "--out", dir.string()});
  CHECK(empty.exit_code == 3);
  CHECK(empty.err.find("EmptyCorpus") != std::string::npos);

  REQUIRE(run_cli({"analyze", data("toy.medline"), "--min-doc-freq", "1", "--out", dir.string()}).exit_code == 0);
  const auto unknown = run_cli({"suggest", (dir / "diagram.json").string(), "Zzz"});
  CHECK(unknown.exit_code == 4);
  const auto single = run_cli({"suggest", (dir / "diagram.json").string(), "A"});
  CHECK(single.exit_code == 0);
  CHECK(single.out.empty());
}

TEST_CASE("session workflow through the command line") {
  const auto dir = scratch_dir("cli-session");
  const std::string session = (dir / "raynaud.session").string();
  const auto src = data("workflow/source.medline");
  const auto inter = data("workflow/intermediate.medline");

  const auto created = run_cli({"session", "create", "--session", session, "Raynaud Disease", src});
  REQUIRE(created.exit_code == 0);
  CHECK(created.out.size() == 17);  // 16 hex digits and a newline

  CHECK(run_cli({"session", "targets", "--session", session, "Fish Oils", "--source", src}).exit_code == 5);
  CHECK(run_cli({"session", "mark", "--session", session, "Thromboxane A2"}).exit_code == 4);
  REQUIRE(run_cli({"session", "mark", "--session", session, "Fish Oils"}).exit_code == 0);
  CHECK(run_cli({"session", "targets", "--session", session, "Fish Oils", "--source", src}).exit_code == 5);
  REQUIRE(run_cli({"session", "attach", "--session", session, "Fish Oils", inter}).exit_code == 0);
  CHECK(run_cli({"session", "targets", "--session", session, "Fish Oils", "--source", inter}).exit_code == 1);

  const auto text = run_cli({"session", "targets", "--session", session, "Fish Oils", "--source", src});
  REQUIRE(text.exit_code == 0);
  CHECK(text.out.rfind("1\tAdult\t2\t0.878854\t", 0) == 0);

  const auto json = run_cli({"session", "targets", "--session", session, "Fish Oils", "--source", src, "--format", "json"});
  REQUIRE(json.exit_code == 0);
  const auto targets = Json::parse(json.out);
  REQUIRE(targets.size() == 15);
  CHECK(targets[14]["descriptor"] == "Female");
  CHECK(targets[14]["disjoint"] == false);

  // the file on disk is a valid session equal to what the library computes
  const auto loaded = mlink::load_session(read_text(session));
  CHECK(loaded.target_candidates.size() == 15);
  const auto show = run_cli({"session", "show", "--session", session});
  CHECK(show.exit_code == 0);
  CHECK(show.out.find("targets") != std::string::npos);

  std::ofstream(dir / "broken.session") << "{";
  CHECK(run_cli({"session", "show", "--session", (dir / "broken.session").string()}).exit_code == 2);
}

TEST_CASE("suggest ranks the clusters of a saved diagram") {
  const auto dir = scratch_dir("cli-suggest");
  REQUIRE(run_cli({"analyze", data("workflow/intermediate.medline"), "--out", dir.string()}).exit_code == 0);
  const auto r = run_cli({"suggest", (dir / "diagram.json").string(), "Raynaud Disease"});
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.rfind("1\t2\tCholesterol\t0.878854\t", 0) == 0);
  CHECK(r.out.find("\n2\t3\tEicosapentaenoic Acid\t2.722999\t") != std::string::npos);
  const auto j = run_cli({"suggest", (dir / "diagram.json").string(), "Raynaud Disease", "--format", "json"});
  CHECK(Json::parse(j.out).size() == 2);
}
