#include <doctest.h>

#include <random>

#include "corpus_gen.hpp"
#include "mlink/cooccur.hpp"
#include "mlink/error.hpp"
#include "naive_oracle.hpp"
#include "toy.hpp"

using namespace mlink;

TEST_CASE("toy corpus document frequencies and pair counts") {
  const auto c = toy_corpus();
  const auto stats = term_counts(c);
  CHECK(stats.counts == std::map<std::string, std::uint32_t>{{"A", 4}, {"B", 3}, {"C", 3}, {"D", 2}});

  const auto pairs = pair_counts(c, {"A", "B", "C", "D"});
  const std::vector<PairCount> expected{{"A", "B", 3}, {"A", "C", 2}, {"A", "D", 1},
                                        {"B", "C", 1}, {"B", "D", 1}, {"C", "D", 1}};
  CHECK(pairs == expected);
  CHECK(pair_counts(c, {"A", "D"}) == std::vector<PairCount>{{"A", "D", 1}});
}

TEST_CASE("equivalence index values and domain") {
  CHECK(equivalence_index(3, 4, 3) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(equivalence_index(2, 2, 2) == 1.0);
  CHECK(equivalence_index(0, 5, 7) == 0.0);
  CHECK(equivalence_index(1, 4, 3) == doctest::Approx(1.0 / 12.0));
  for (auto [cij, ci, cj] : {std::tuple{1u, 0u, 3u}, {4u, 3u, 5u}, {2u, 5u, 1u}}) {
    try {
      equivalence_index(cij, ci, cj);
      FAIL("expected DomainError");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::Domain);
    }
  }
}

TEST_CASE("toy graph with threshold 0.05 keeps all six pairs") {
  GraphParams p;
  p.min_doc_freq = 1;
  const auto g = build_graph(toy_corpus(), p);
  CHECK(g.term_count() == 4);
  CHECK(g.edge_count() == 6);
  CHECK(g.pair("A", "B")->e_ij == 0.75);
  CHECK(g.pair("B", "A")->c_ij == 3);
  CHECK(g.pair("C", "D")->e_ij == 1.0 / 6.0);
  CHECK(g.pair("A", "D")->e_ij == 0.125);
  CHECK(g.document_count() == 5);
}

TEST_CASE("threshold 0.2 keeps only A-B and A-C") {
  GraphParams p;
  p.min_doc_freq = 1;
  p.threshold = 0.2;
  const auto g = build_graph(toy_corpus(), p);
  const auto edges = g.edge_list();
  REQUIRE(edges.size() == 2);
  CHECK(edges[0].term_i == "A");
  CHECK(edges[0].term_j == "B");
  CHECK(edges[1].term_i == "A");
  CHECK(edges[1].term_j == "C");
}

TEST_CASE("vocabulary pruning happens before thresholding") {
  GraphParams p;  // min_doc_freq 2 drops nothing from the toy (C_D = 2)
  auto g = build_graph(toy_corpus(), p);
  CHECK(g.term_count() == 4);
  p.min_doc_freq = 3;
  g = build_graph(toy_corpus(), p);
  CHECK(g.term_count() == 3);
  CHECK(!g.find("D"));
  p.min_doc_freq = 1;
  p.stoplist = {"A"};
  g = build_graph(toy_corpus(), p);
  CHECK(!g.find("A"));
  CHECK(g.edge_count() == 3);
}

TEST_CASE("invalid thresholds are rejected") {
  for (double t : {0.0, -0.1, 1.5}) {
    GraphParams p;
    p.threshold = t;
    try {
      build_graph(toy_corpus(), p);
      FAIL("expected InvalidArgument");
    } catch (const Error& e) {
      CHECK(e.code() == Errc::InvalidArgument);
    }
  }
}

TEST_CASE("graph table export") {
  GraphParams p;
  p.min_doc_freq = 1;
  p.threshold = 0.2;
  const auto table = export_graph_table(build_graph(toy_corpus(), p));
  CHECK(table.find("A\tB\t3\t0.75\n") != std::string::npos);
  CHECK(table.find("A\tC\t2\t0.3333333333333333\n") != std::string::npos);
  CHECK(table.rfind("#", 0) == 0);
}

TEST_CASE("from_parts validates its edges") {
  std::map<std::string, std::uint32_t> vocab{{"a", 2}, {"b", 2}};
  std::vector<PairStat> bad{{"a", "z", 1, 0.5}};
  CHECK_THROWS_AS(EquivalenceGraph::from_parts(vocab, bad, {}, 2), Error);
  std::vector<PairStat> self{{"a", "a", 1, 0.5}};
  CHECK_THROWS_AS(EquivalenceGraph::from_parts(vocab, self, {}, 2), Error);
  std::vector<PairStat> dup{{"a", "b", 1, 0.5}, {"b", "a", 1, 0.5}};
  CHECK_THROWS_AS(EquivalenceGraph::from_parts(vocab, dup, {}, 2), Error);
}

TEST_CASE("randomized corpora match the brute-force oracle") {
  std::mt19937_64 rng(20240601);
  for (int round = 0; round < 40; ++round) {
    const auto corpus = testgen::random_corpus(rng, 120, 30);
    naive::Params np;
    np.min_doc_freq = 1 + round % 3;
    np.threshold = round % 2 ? 0.05 : 0.2;
    const auto oracle = naive::run(naive::as_sets(corpus), np);

    GraphParams p;
    p.min_doc_freq = np.min_doc_freq;
    p.threshold = np.threshold;
    const auto g = build_graph(corpus, p);

    CHECK(term_counts(corpus).counts == oracle.counts);
    CHECK(g.term_count() == oracle.admitted.size());
    std::set<std::string> admitted;
    for (const auto& [t, c] : oracle.admitted) admitted.insert(t);
    const auto pc = pair_counts(corpus, admitted);
    REQUIRE(pc.size() == oracle.pairs.size());
    for (const auto& p2 : pc) CHECK(oracle.pairs.at({p2.term_i, p2.term_j}) == p2.c_ij);

    const auto edges = g.edge_list();
    REQUIRE(edges.size() == oracle.edges.size());
    for (const auto& e : edges) CHECK(oracle.edges.at({e.term_i, e.term_j}) == e.e_ij);
  }
}

TEST_CASE("raising the threshold or frequency floor never adds edges") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 20; ++round) {
    const auto corpus = testgen::random_corpus(rng, 80, 25);
    GraphParams lo, hi;
    lo.min_doc_freq = hi.min_doc_freq = 1;
    lo.threshold = 0.05;
    hi.threshold = 0.3;
    const auto gl = build_graph(corpus, lo), gh = build_graph(corpus, hi);
    for (const auto& e : gh.edge_list()) CHECK(gl.pair(e.term_i, e.term_j));
    GraphParams f2 = lo;
    f2.min_doc_freq = 3;
    const auto gf = build_graph(corpus, f2);
    CHECK(gf.term_count() <= gl.term_count());
    for (const auto& e : gf.edge_list()) {
      REQUIRE(gl.pair(e.term_i, e.term_j));
      CHECK(gl.pair(e.term_i, e.term_j)->e_ij == e.e_ij);
    }
  }
}

TEST_CASE("graph scaling multiplies every edge") {
  GraphParams p;
  p.min_doc_freq = 1;
  const auto g = build_graph(toy_corpus(), p);
  const auto s = g.scaled(0.5);
  REQUIRE(s.edge_count() == g.edge_count());
  for (std::size_t i = 0; i < g.edge_count(); ++i) CHECK(s.edges()[i].e == g.edges()[i].e * 0.5);
  CHECK_THROWS_AS(g.scaled(0.0), Error);
}
