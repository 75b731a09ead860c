#include <doctest.h>

#include <cmath>
#include <random>

#include "mlink/diagram.hpp"
#include "mlink/error.hpp"
#include "mlink/json_io.hpp"
#include "toy.hpp"

using namespace mlink;

namespace {

Cluster make(int id, std::vector<std::string> members, double density, double centrality) {
  Cluster c;
  c.id = id;
  c.members = std::move(members);
  c.label = c.members.front();
  c.density = density;
  c.centrality = centrality;
  c.seed_e = density;
  return c;
}

StrategicalDiagram three_clusters() {
  return build_diagram("ref", {make(1, {"s1", "s2", "s3"}, 0.5, 2.0),     // cdr 4
                               make(2, {"m1", "m2", "m3"}, 0.25, 1.05),   // cdr 4.2
                               make(3, {"f1", "f2", "f3"}, 0.1, 0.1)});   // cdr 1
}

std::size_t count(const std::string& hay, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("medians average the middle pair for even counts") {
  CHECK(median({3.0, 1.0, 2.0}) == 2.0);
  CHECK(median({4.0, 1.0, 3.0, 2.0}) == 2.5);
  CHECK(median({7.0}) == 7.0);
  CHECK_THROWS_AS(median({}), Error);
}

TEST_CASE("quadrants treat values on a median as high") {
  const auto d = three_clusters();
  CHECK(d.median_density == 0.25);
  CHECK(d.median_centrality == 1.05);
  CHECK(d.quadrant_of(1) == Quadrant::HighDensityHighCentrality);
  CHECK(d.quadrant_of(2) == Quadrant::HighDensityHighCentrality);
  CHECK(d.quadrant_of(3) == Quadrant::LowDensityLowCentrality);
  CHECK(d.below_medians(*d.find_cluster(3)));
  CHECK(!d.below_medians(*d.find_cluster(2)));
}

TEST_CASE("diagrams need at least one cluster") {
  try {
    build_diagram("ref", {});
    FAIL("expected NoClusters");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::NoClusters);
  }
}

TEST_CASE("cdr and ratio reports") {
  const auto d = three_clusters();
  CHECK(cdr(*d.find_cluster(1)) == 4.0);
  CHECK(cdr(*d.find_cluster(2)) == doctest::Approx(4.2));
  const auto r = ratio(*d.find_cluster(1), *d.find_cluster(2), RatioKind::STR);
  CHECK(r.ratio == doctest::Approx(4.0 / 4.2));
  CHECK(std::abs(r.ratio - 0.952) < 5e-4);
  CHECK(r.kind == RatioKind::STR);
  CHECK(r.cluster_a == 1);
  CHECK(r.cluster_b == 2);
}

TEST_CASE("zero centrality leaves the cdr undefined") {
  const auto c = make(9, {"a", "b", "c"}, 0.3, 0.0);
  try {
    cdr(c);
    FAIL("expected CdrUndefined");
  } catch (const CdrUndefinedError& e) {
    CHECK(e.code() == Errc::CdrUndefined);
    CHECK(e.cluster_id() == 9);
  }
  const auto other = make(1, {"x", "y", "z"}, 0.3, 0.6);
  CHECK_THROWS_AS(ratio(other, c, RatioKind::SIR), CdrUndefinedError);
  CHECK_THROWS_AS(ratio(c, other, RatioKind::SIR), CdrUndefinedError);
}

TEST_CASE("ratios are reciprocal for random cluster pairs") {
  std::mt19937_64 rng(4242);
  std::uniform_real_distribution<double> dens(1e-3, 1.0), cent(1e-3, 50.0);
  for (int i = 0; i < 1000; ++i) {
    const auto a = make(1, {"a"}, dens(rng), cent(rng));
    const auto b = make(2, {"b"}, dens(rng), cent(rng));
    const double ab = ratio(a, b, RatioKind::SIR).ratio;
    const double ba = ratio(b, a, RatioKind::SIR).ratio;
    CHECK(std::abs(ab * ba - 1.0) < 1e-9);
  }
}

TEST_CASE("locate_term finds the holding cluster") {
  const auto d = three_clusters();
  REQUIRE(locate_term(d, "m2") != nullptr);
  CHECK(locate_term(d, "m2")->id == 2);
  CHECK(locate_term(d, "nope") == nullptr);
}

TEST_CASE("intermediate suggestions rank by log-distance minus screening bonuses") {
  const auto d = three_clusters();
  const auto s = suggest_intermediates(d, 1);
  REQUIRE(s.size() == 2);
  // cluster 3: SIR 4, |ln 4| = 1.386, BELOW_MEDIANS bonus -> 0.886
  // cluster 2: SIR 0.952, |ln| = 0.049, SIR_NEAR_ONE bonus -> -0.451
  CHECK(s[0].cluster_id == 2);
  CHECK(s[0].flags.has(Flag::SirNearOne));
  CHECK(*s[0].score == doctest::Approx(std::abs(std::log(4.0 / 4.2)) - 0.5));
  CHECK(s[1].cluster_id == 3);
  CHECK(s[1].flags.has(Flag::BelowMedians));
  CHECK(!s[1].flags.has(Flag::SirNearOne));
  CHECK(*s[1].sir == 4.0);
  CHECK(*s[1].score == doctest::Approx(std::log(4.0) - 0.5));
}

TEST_CASE("highlighting is display-only") {
  const auto d = three_clusters();
  SuggestOptions opts;
  opts.highlight = {"f2"};
  const auto plain = suggest_intermediates(d, 1);
  const auto marked = suggest_intermediates(d, 1, opts);
  REQUIRE(marked.size() == plain.size());
  CHECK(marked[1].flags.has(Flag::Highlight));
  CHECK(*marked[1].score == *plain[1].score);
  CHECK(marked[0].cluster_id == plain[0].cluster_id);
}

TEST_CASE("clusters without a cdr go last in id order") {
  const auto d = build_diagram("ref", {make(1, {"a1"}, 0.5, 1.0), make(2, {"b1"}, 0.5, 0.0),
                                       make(3, {"c1"}, 0.4, 0.0), make(4, {"d1"}, 0.9, 3.0)});
  const auto s = suggest_intermediates(d, 1);
  REQUIRE(s.size() == 3);
  CHECK(s[0].cluster_id == 4);
  CHECK(s[1].cluster_id == 2);
  CHECK(s[2].cluster_id == 3);
  CHECK(s[1].flags.has(Flag::NoCdr));
  CHECK(!s[1].sir);
  CHECK_THROWS_AS(suggest_intermediates(d, 2), CdrUndefinedError);
  CHECK_THROWS_AS(suggest_intermediates(d, 77), Error);
}

TEST_CASE("a single-cluster diagram has nothing to suggest") {
  GraphParams gp;
  gp.min_doc_freq = 1;
  const auto d = analyze_corpus(toy_corpus(), AnalysisParams{gp, {}});
  REQUIRE(d.clusters.size() == 1);
  CHECK(suggest_intermediates(d, 1).empty());
}

TEST_CASE("a wider band admits more clusters as near one") {
  const auto d = three_clusters();
  SuggestOptions wide;
  wide.band = {0.2, 5.0};
  const auto s = suggest_intermediates(d, 1, wide);
  CHECK(s[0].flags.has(Flag::SirNearOne));
  CHECK(s[1].flags.has(Flag::SirNearOne));
}

TEST_CASE("toy corpus diagram and summary line") {
  GraphParams gp;
  gp.min_doc_freq = 1;
  const auto d = analyze_corpus(toy_corpus(), AnalysisParams{gp, {}});
  CHECK(summary_line(d) == "documents=5 terms=4 clusters=1");
  CHECK(d.statistics.edges == 6);
  CHECK(d.median_centrality == 0.0);
  CHECK(cluster_flags(d, d.clusters[0]).has(Flag::NoCdr));
}

TEST_CASE("canonical table export") {
  const auto t = export_diagram(three_clusters(), "table");
  CHECK(t ==
        "cluster_id\tlabel\tdensity\tcentrality\tquadrant\n"
        "1\ts1\t0.500000000\t2.000000000\thigh-density/high-centrality\n"
        "2\tm1\t0.250000000\t1.050000000\thigh-density/high-centrality\n"
        "3\tf1\t0.100000000\t0.100000000\tlow-density/low-centrality\n");
}

TEST_CASE("vector image has one marker per cluster and two median lines") {
  ExportOptions opts;
  opts.highlight = {"s2"};
  const auto svg = export_diagram(three_clusters(), ExportFormat::VectorImage, opts);
  CHECK(svg.find("<svg xmlns") != std::string::npos);
  CHECK(count(svg, "id=\"cluster-") == 3);
  CHECK(count(svg, "id=\"median-density\"") == 1);
  CHECK(count(svg, "id=\"median-centrality\"") == 1);
  CHECK(svg.find(">s1<") != std::string::npos);  // highlighted label
  CHECK(svg.find(">f1<") != std::string::npos);  // below both medians
  CHECK(svg.find(">m1<") == std::string::npos);
}

TEST_CASE("structured document round-trips exactly") {
  GraphParams gp;
  gp.min_doc_freq = 1;
  gp.stoplist = {"Z"};
  const auto d = analyze_corpus(toy_corpus(), AnalysisParams{gp, {}});
  const auto json = export_diagram(d, "json");
  const auto back = import_diagram(json);
  CHECK(back == d);
  CHECK(export_diagram(back, "json") == json);

  const auto three = three_clusters();
  CHECK(import_diagram(export_diagram(three, "json")) == three);
}

TEST_CASE("bad exports and imports") {
  try {
    export_diagram(three_clusters(), "png");
    FAIL("expected UnknownFormat");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::UnknownFormat);
  }
  CHECK_THROWS_AS(import_diagram("{not json"), Error);
  CHECK_THROWS_AS(import_diagram(R"({"schema":"something-else"})"), Error);
}

TEST_CASE("flag names round-trip") {
  FlagSet f;
  f.set(Flag::StrNearOne);
  f.set(Flag::BelowMedians);
  CHECK(f.names() == std::vector<std::string>{"BELOW_MEDIANS", "STR_NEAR_ONE"});
  CHECK(FlagSet::from_names(f.names()) == f);
  CHECK_THROWS_AS(FlagSet::from_names({"BOGUS"}), Error);
}
