#include <doctest.h>

#include "mlink/discovery.hpp"
#include "mlink/error.hpp"
#include "toy.hpp"
#include "workflow.hpp"

using namespace mlink;

namespace {

SessionEnv fixed_env() {
  auto counter = std::make_shared<int>(0);
  return {[] { return std::string("2024-01-01T00:00:00.000Z"); },
          [counter] { return "session-" + std::to_string(++*counter); }};
}

Errc code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return Errc::InvalidArgument;
}

struct Expected {
  const char* descriptor;
  int cluster;
  bool disjoint;
};

// Produced by tests/oracle/mlink_oracle.py targets on the workflow fixtures.
const Expected kExpected[] = {
    {"Adult", 2, false},          {"Arthritis, Rheumatoid", 2, true}, {"Cholesterol", 2, true},
    {"Humans", 2, false},         {"Hyperlipidemias", 2, true},       {"Inflammation", 2, true},
    {"Leukotriene B4", 2, true},  {"Lipoproteins", 2, true},          {"Neutrophils", 2, true},
    {"Triglycerides", 2, true},   {"Dietary Fats", 3, true},          {"Dietary Supplements", 3, true},
    {"Eicosapentaenoic Acid", 3, true}, {"Fatty Acids, Omega-3", 3, true}, {"Female", 3, false},
};

}  // namespace

TEST_CASE("the source term must occur in the corpus") {
  const auto env = fixed_env();
  CHECK(code_of([&] { create_session(toy_corpus(), "Q", {}, env); }) == Errc::UnknownTerm);
}

TEST_CASE("marking validates against the source vocabulary") {
  const auto env = fixed_env();
  const auto s = create_session(workflow_source(), "Raynaud Disease", {}, env);
  CHECK(s.session_id == "session-1");
  CHECK(code_of([&] { mark_intermediate(s, "Raynaud Disease", env); }) == Errc::InvalidIntermediate);
  CHECK(code_of([&] { mark_intermediate(s, "Thromboxane A2", env); }) == Errc::InvalidIntermediate);

  const auto m = mark_intermediate(s, "Fish Oils", env);
  REQUIRE(m.intermediates.size() == 1);
  CHECK(m.intermediates[0].descriptor == "Fish Oils");
  const auto again = mark_intermediate(m, "Fish Oils", env);
  CHECK(again.intermediates.size() == 1);
  CHECK(again.audit_log.back().action == "mark-noop");
  CHECK(s.intermediates.empty());  // inputs are never mutated
}

TEST_CASE("targets require a marked intermediate with attached literature") {
  const auto env = fixed_env();
  const auto source = workflow_source();
  const auto s = create_session(source, "Raynaud Disease", {}, env);
  CHECK(code_of([&] { candidate_targets(s, "Fish Oils", source, env); }) == Errc::UnknownIntermediate);
  CHECK(code_of([&] { attach_intermediate_corpus(s, "Fish Oils", workflow_intermediate(), env); }) ==
        Errc::UnknownIntermediate);
  const auto m = mark_intermediate(s, "Fish Oils", env);
  CHECK(code_of([&] { candidate_targets(m, "Fish Oils", source, env); }) == Errc::SourceTermAbsent);
  const auto a = attach_intermediate_corpus(m, "Fish Oils", workflow_intermediate(), env);
  CHECK(code_of([&] { candidate_targets(a, "Fish Oils", workflow_intermediate(), env); }) ==
        Errc::CorpusMismatch);
}

TEST_CASE("an intermediate literature without the source term has no targets") {
  const auto env = fixed_env();
  const auto source = workflow_source();
  auto s = mark_intermediate(create_session(source, "Raynaud Disease", {}, env), "Fish Oils", env);
  s = attach_intermediate_corpus(s, "Fish Oils", load_fixture("fixture50/records.medline"), env);
  CHECK(code_of([&] { candidate_targets(s, "Fish Oils", source, env); }) == Errc::SourceTermAbsent);
}

TEST_CASE("workflow ranking matches the independent oracle") {
  const auto env = fixed_env();
  const auto source = workflow_source();
  auto s = create_session(source, "Raynaud Disease", {}, env);
  s = mark_intermediate(s, "Fish Oils", env);
  s = attach_intermediate_corpus(s, "Fish Oils", workflow_intermediate(), env);
  auto [after, targets] = candidate_targets(s, "Fish Oils", source, env);

  REQUIRE(targets.size() == std::size(kExpected));
  for (std::size_t i = 0; i < targets.size(); ++i) {
    INFO("rank " << i + 1);
    CHECK(targets[i].descriptor == kExpected[i].descriptor);
    CHECK(targets[i].cluster_id == kExpected[i].cluster);
    CHECK(targets[i].disjointness.disjoint == kExpected[i].disjoint);
    CHECK(targets[i].intermediate == "Fish Oils");
    REQUIRE(targets[i].str);
  }
  CHECK(targets[0].str->ratio == doctest::Approx(0.878854).epsilon(1e-6));
  CHECK(targets[0].proximity == doctest::Approx(0.555794).epsilon(1e-6));
  CHECK(targets[0].flags.has(Flag::StrNearOne));
  CHECK(targets[10].str->ratio == doctest::Approx(2.722999).epsilon(1e-6));
  CHECK(targets[10].proximity == doctest::Approx(0.658625).epsilon(1e-6));
  CHECK(!targets[10].flags.has(Flag::StrNearOne));
  CHECK(after.target_candidates == targets);
  CHECK(after.audit_log.size() == 4);
  CHECK(after.audit_log.back().action == "targets");

  // re-running replaces rather than appends
  auto [again, targets2] = candidate_targets(after, "Fish Oils", source, env);
  CHECK(targets2 == targets);
  CHECK(again.target_candidates.size() == targets.size());
}

TEST_CASE("reattaching replaces the diagram and is logged") {
  const auto env = fixed_env();
  auto s = mark_intermediate(create_session(workflow_source(), "Raynaud Disease", {}, env), "Fish Oils", env);
  s = attach_intermediate_corpus(s, "Fish Oils", workflow_intermediate(), env);
  s = attach_intermediate_corpus(s, "Fish Oils", workflow_intermediate(), env);
  CHECK(s.audit_log.back().action == "attach-replace");
  CHECK(s.intermediates.size() == 1);
}

TEST_CASE("disjointness evidence is capped at ten pmids") {
  std::string text;
  for (int i = 1; i <= 14; ++i) text += "PMID- " + std::to_string(i) + "\nTI  - About magnesium\nMH  - Magnesium\nMH  - X\n\n";
  text += "PMID- 99\nTI  - Magnesium deficiency and cramps\nMH  - Cramp\nMH  - X\n";
  std::vector<std::string> src{text};
  const auto c = load_corpus(src, "mg");

  const auto r = check_disjoint(c, "Magnesium");
  CHECK(!r.disjoint);
  CHECK(r.evidence.size() == 10);
  CHECK(r.evidence.front() == "1");
  CHECK(r.title_warnings.empty());

  const auto cramp = check_disjoint(c, "Cramp");
  CHECK(!cramp.disjoint);
  CHECK(cramp.evidence == std::vector<std::string>{"99"});

  const auto strict = check_disjoint(c, "Potassium", true);
  CHECK(strict.disjoint);
  const auto strict2 = check_disjoint(c, "magnesium", true);
  CHECK(strict2.disjoint);  // descriptors are case-sensitive; titles only warn
  CHECK(strict2.title_warnings.size() == 15);
}

TEST_CASE("sessions survive a save and load round trip") {
  const auto env = fixed_env();
  const auto source = workflow_source();
  SessionConfig cfg;
  cfg.band = {0.4, 2.5};
  cfg.strict_titles = true;
  auto s = create_session(source, "Raynaud Disease", cfg, env);
  s = mark_intermediate(s, "Fish Oils", env);
  s = attach_intermediate_corpus(s, "Fish Oils", workflow_intermediate(), env);
  s = candidate_targets(s, "Fish Oils", source, env).first;

  const auto bytes = save_session(s);
  const auto back = load_session(bytes);
  CHECK(back == s);
  CHECK(save_session(back) == bytes);
  CHECK(format_audit_log(back).find("attach") != std::string::npos);
}

TEST_CASE("damaged session files are rejected") {
  const auto env = fixed_env();
  const auto bytes = save_session(create_session(toy_corpus(), "A", {}, env));
  CHECK(code_of([&] { load_session(bytes.substr(0, bytes.size() / 2)); }) == Errc::CorruptSession);
  CHECK(code_of([&] { load_session(""); }) == Errc::CorruptSession);
  CHECK(code_of([&] { load_session(R"({"format":"mlink-session"})"); }) == Errc::CorruptSession);

  auto tampered = bytes;
  const auto pos = tampered.find("\"A\"");
  REQUIRE(pos != std::string::npos);
  tampered[pos + 1] = 'B';
  CHECK(code_of([&] { load_session(tampered); }) == Errc::CorruptSession);
}

TEST_CASE("toy session: marking C records cluster 1") {
  const auto env = fixed_env();
  const auto s = create_session(toy_corpus(), "A", {}, env);
  CHECK(s.source.diagram.clusters.size() == 1);
  const auto m = mark_intermediate(s, "C", env);
  REQUIRE(m.intermediates[0].cluster_id);
  CHECK(*m.intermediates[0].cluster_id == 1);
  const auto other = create_session(toy_corpus(), "B", {}, env);
  CHECK(other.session_id != s.session_id);
}

TEST_CASE("toy disjointness") {
  CHECK(check_disjoint(toy_corpus(), "Z") == DisjointResult{});
  const auto a = check_disjoint(toy_corpus(), "A");
  CHECK(!a.disjoint);
  CHECK(a.evidence == std::vector<std::string>{"1", "2", "3", "5"});
}

TEST_CASE("a cluster with cdr 4.2 against a source cdr of 4 ranks first") {
  const auto env = fixed_env();
  const auto source = toy_corpus();
  auto s = mark_intermediate(create_session(source, "A", {}, env), "C", env);

  auto cluster = [](int id, std::vector<std::string> members, double density, double centrality) {
    Cluster c;
    c.id = id;
    c.members = std::move(members);
    c.label = c.members.front();
    c.density = density;
    c.centrality = centrality;
    c.seed_e = density;
    return c;
  };
  // source cluster cdr 4; "T" sits in a cdr 4.2 cluster, "U" in a cdr 1 cluster, "V" has no cdr
  auto d = build_diagram("constructed", {cluster(1, {"A", "S1", "S2"}, 0.5, 2.0),
                                         cluster(2, {"U", "U1", "U2"}, 0.2, 0.2),
                                         cluster(3, {"T", "T1", "T2"}, 0.25, 1.05),
                                         cluster(4, {"V", "V1", "V2"}, 0.3, 0.0)});
  s.intermediates[0].diagram = d;
  s.intermediates[0].corpus_id = "constructed";

  const auto targets = candidate_targets(s, "C", source, env).second;
  REQUIRE(targets.size() == 9);
  CHECK(targets[0].descriptor == "T");
  CHECK(targets[0].str->ratio == doctest::Approx(4.0 / 4.2));
  CHECK(targets[0].flags.has(Flag::StrNearOne));
  CHECK(targets[3].descriptor == "U");
  CHECK(!targets[3].flags.has(Flag::StrNearOne));
  CHECK(targets[6].descriptor == "V");
  CHECK(targets[6].flags.has(Flag::NoCdr));
  CHECK(!targets[6].str);
  CHECK(targets[0].disjointness.disjoint);
}
