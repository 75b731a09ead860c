#include "mlink/cooccur.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "mlink/error.hpp"

namespace mlink {

namespace {

using TermId = EquivalenceGraph::TermId;

constexpr std::uint64_t pack(TermId a, TermId b) {
  return (static_cast<std::uint64_t>(a) << 32) | b;
}

struct IdPairCount {
  TermId a;
  TermId b;
  std::uint32_t count;
};

// Per document, maps admitted terms to ids and emits each unordered pair once;
// a sort + run-length pass then yields exact counts in canonical order.
std::vector<IdPairCount> count_pairs(const Corpus& corpus,
                                     const std::unordered_map<std::string_view, TermId>& ids) {
  std::vector<std::uint64_t> keys;
  std::vector<TermId> doc_ids;
  for (const auto& doc : corpus.documents) {
    doc_ids.clear();
    for (const auto& t : doc.mesh_terms) {
      if (auto it = ids.find(t); it != ids.end()) doc_ids.push_back(it->second);
    }
    std::sort(doc_ids.begin(), doc_ids.end());
    doc_ids.erase(std::unique(doc_ids.begin(), doc_ids.end()), doc_ids.end());
    for (std::size_t i = 0; i < doc_ids.size(); ++i) {
      for (std::size_t j = i + 1; j < doc_ids.size(); ++j) {
        keys.push_back(pack(doc_ids[i], doc_ids[j]));
      }
    }
  }
  std::sort(keys.begin(), keys.end());
  std::vector<IdPairCount> out;
  for (std::size_t i = 0; i < keys.size();) {
    std::size_t j = i;
    while (j < keys.size() && keys[j] == keys[i]) ++j;
    out.push_back({static_cast<TermId>(keys[i] >> 32), static_cast<TermId>(keys[i] & 0xffffffffU),
                   static_cast<std::uint32_t>(j - i)});
    i = j;
  }
  return out;
}

std::unordered_map<std::string_view, TermId> index_terms(const std::vector<std::string>& sorted) {
  std::unordered_map<std::string_view, TermId> ids;
  ids.reserve(sorted.size());
  for (TermId i = 0; i < sorted.size(); ++i) ids.emplace(sorted[i], i);
  return ids;
}

}  // namespace

TermStats term_counts(const Corpus& corpus) {
  std::unordered_map<std::string_view, std::uint32_t> freq;
  for (const auto& doc : corpus.documents) {
    for (const auto& t : doc.mesh_terms) ++freq[t];
  }
  TermStats stats;
  for (const auto& [term, c] : freq) stats.counts.emplace(std::string(term), c);
  return stats;
}

std::vector<PairCount> pair_counts(const Corpus& corpus, const std::set<std::string>& admitted) {
  std::vector<std::string> terms(admitted.begin(), admitted.end());
  auto ids = index_terms(terms);
  std::vector<PairCount> out;
  for (const auto& p : count_pairs(corpus, ids)) out.push_back({terms[p.a], terms[p.b], p.count});
  return out;
}

double equivalence_index(std::uint64_t c_ij, std::uint64_t c_i, std::uint64_t c_j) {
  if (c_i < 1 || c_j < 1 || c_ij > std::min(c_i, c_j)) {
    throw Error(Errc::Domain,
                fmt::format("equivalence index undefined for c_ij={} c_i={} c_j={}", c_ij, c_i, c_j));
  }
  const auto cij = static_cast<double>(c_ij);
  return cij * cij / (static_cast<double>(c_i) * static_cast<double>(c_j));
}

EquivalenceGraph build_graph(const Corpus& corpus, const GraphParams& params) {
  if (!(params.threshold > 0.0 && params.threshold <= 1.0)) {
    throw Error(Errc::InvalidArgument,
                fmt::format("threshold must lie in (0, 1], got {}", params.threshold));
  }
  if (corpus.documents.empty()) {
    throw Error(Errc::EmptyCorpus, fmt::format("corpus '{}' contains no documents", corpus.label));
  }
  const TermStats stats = term_counts(corpus);
  std::map<std::string, std::uint32_t> vocabulary;
  for (const auto& [term, c] : stats.counts) {
    if (c >= params.min_doc_freq && !params.stoplist.contains(term)) vocabulary.emplace(term, c);
  }
  std::vector<std::string> terms;
  terms.reserve(vocabulary.size());
  for (const auto& [term, c] : vocabulary) terms.push_back(term);
  const auto ids = index_terms(terms);

  std::vector<PairStat> edges;
  for (const auto& p : count_pairs(corpus, ids)) {
    const double e = equivalence_index(p.count, vocabulary.at(terms[p.a]), vocabulary.at(terms[p.b]));
    if (e >= params.threshold) edges.push_back({terms[p.a], terms[p.b], p.count, e});
  }
  return EquivalenceGraph::from_parts(vocabulary, edges, params, corpus.documents.size());
}

EquivalenceGraph EquivalenceGraph::from_parts(const std::map<std::string, std::uint32_t>& vocabulary,
                                              std::span<const PairStat> edges, GraphParams params,
                                              std::size_t document_count) {
  EquivalenceGraph g;
  g.params_ = std::move(params);
  g.documents_ = document_count;
  for (const auto& [term, c] : vocabulary) {
    g.terms_.push_back(term);
    g.doc_freq_.push_back(c);
  }
  const auto ids = index_terms(g.terms_);
  g.edges_.reserve(edges.size());
  for (const auto& p : edges) {
    auto ia = ids.find(p.term_i);
    auto ib = ids.find(p.term_j);
    if (ia == ids.end() || ib == ids.end()) {
      throw Error(Errc::InvalidArgument,
                  fmt::format("edge ({}, {}) references a term outside the vocabulary", p.term_i,
                              p.term_j));
    }
    if (ia->second == ib->second) {
      throw Error(Errc::InvalidArgument, fmt::format("self-edge on '{}'", p.term_i));
    }
    auto [a, b] = std::minmax(ia->second, ib->second);
    g.edges_.push_back({a, b, p.c_ij, p.e_ij});
  }
  std::sort(g.edges_.begin(), g.edges_.end(),
            [](const Edge& x, const Edge& y) { return pack(x.a, x.b) < pack(y.a, y.b); });
  auto dup = std::adjacent_find(g.edges_.begin(), g.edges_.end(), [](const Edge& x, const Edge& y) {
    return x.a == y.a && x.b == y.b;
  });
  if (dup != g.edges_.end()) {
    throw Error(Errc::InvalidArgument, fmt::format("duplicate edge ({}, {})", g.terms_[dup->a],
                                                   g.terms_[dup->b]));
  }
  g.build_adjacency();
  return g;
}

void EquivalenceGraph::build_adjacency() {
  std::vector<std::size_t> degree(terms_.size(), 0);
  for (const auto& e : edges_) {
    ++degree[e.a];
    ++degree[e.b];
  }
  adj_offsets_.assign(terms_.size() + 1, 0);
  for (std::size_t i = 0; i < terms_.size(); ++i) adj_offsets_[i + 1] = adj_offsets_[i] + degree[i];
  adj_.assign(edges_.size() * 2, Neighbor{});
  std::vector<std::size_t> fill(adj_offsets_.begin(), adj_offsets_.end() - 1);
  for (const auto& e : edges_) {
    adj_[fill[e.a]++] = {e.b, e.e};
    adj_[fill[e.b]++] = {e.a, e.e};
  }
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    std::sort(adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i]),
              adj_.begin() + static_cast<std::ptrdiff_t>(adj_offsets_[i + 1]),
              [](const Neighbor& x, const Neighbor& y) { return x.term < y.term; });
  }
}

std::optional<EquivalenceGraph::TermId> EquivalenceGraph::find(std::string_view descriptor) const {
  auto it = std::lower_bound(terms_.begin(), terms_.end(), descriptor,
                             [](const std::string& t, std::string_view d) { return t < d; });
  if (it == terms_.end() || *it != descriptor) return std::nullopt;
  return static_cast<TermId>(it - terms_.begin());
}

std::span<const EquivalenceGraph::Neighbor> EquivalenceGraph::neighbors(TermId id) const {
  if (id >= terms_.size()) return {};
  return std::span<const Neighbor>(adj_).subspan(adj_offsets_[id],
                                                 adj_offsets_[id + 1] - adj_offsets_[id]);
}

std::optional<double> EquivalenceGraph::strength(TermId x, TermId y) const {
  auto nb = neighbors(x);
  auto it = std::lower_bound(nb.begin(), nb.end(), y,
                             [](const Neighbor& n, TermId t) { return n.term < t; });
  if (it == nb.end() || it->term != y) return std::nullopt;
  return it->e;
}

std::optional<PairStat> EquivalenceGraph::pair(std::string_view x, std::string_view y) const {
  auto ix = find(x);
  auto iy = find(y);
  if (!ix || !iy || *ix == *iy) return std::nullopt;
  auto [a, b] = std::minmax(*ix, *iy);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), pack(a, b),
                             [](const Edge& e, std::uint64_t key) { return pack(e.a, e.b) < key; });
  if (it == edges_.end() || it->a != a || it->b != b) return std::nullopt;
  return PairStat{terms_[a], terms_[b], it->c_ab, it->e};
}

std::vector<PairStat> EquivalenceGraph::edge_list() const {
  std::vector<PairStat> out;
  out.reserve(edges_.size());
  for (const auto& e : edges_) out.push_back({terms_[e.a], terms_[e.b], e.c_ab, e.e});
  return out;
}

TermStats EquivalenceGraph::term_stats() const {
  TermStats s;
  for (std::size_t i = 0; i < terms_.size(); ++i) s.counts.emplace(terms_[i], doc_freq_[i]);
  return s;
}

EquivalenceGraph EquivalenceGraph::scaled(double k) const {
  if (!(k > 0.0)) throw Error(Errc::InvalidArgument, fmt::format("scale factor must be positive, got {}", k));
  EquivalenceGraph g = *this;
  for (auto& e : g.edges_) e.e *= k;
  for (auto& n : g.adj_) n.e *= k;
  return g;
}

bool EquivalenceGraph::operator==(const EquivalenceGraph& other) const {
  return params_ == other.params_ && documents_ == other.documents_ && terms_ == other.terms_ &&
         doc_freq_ == other.doc_freq_ && edges_ == other.edges_;
}

std::string export_graph_table(const EquivalenceGraph& graph) {
  const auto& p = graph.params();
  std::string out;
  out += "# mlink equivalence graph v1\n";
  out += fmt::format("# threshold={}\n", p.threshold);
  out += fmt::format("# min_doc_freq={}\n", p.min_doc_freq);
  out += fmt::format("# stoplist_size={}\n", p.stoplist.size());
  out += fmt::format("# documents={}\n", graph.document_count());
  out += fmt::format("# terms={}\n", graph.term_count());
  out += fmt::format("# edges={}\n", graph.edge_count());
  for (const auto& e : graph.edges()) {
    out += fmt::format("{}\t{}\t{}\t{}\n", graph.term(e.a), graph.term(e.b), e.c_ab, e.e);
  }
  return out;
}

}  // namespace mlink
