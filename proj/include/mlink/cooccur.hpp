#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/medline.hpp"

namespace mlink {

/// Document frequency C_i per descriptor.
struct TermStats {
  std::map<std::string, std::uint32_t> counts;

  bool operator==(const TermStats&) const = default;
};

/// Unordered pair in canonical order (term_i < term_j) with its co-document count.
struct PairCount {
  std::string term_i;
  std::string term_j;
  std::uint32_t c_ij = 0;

  bool operator==(const PairCount&) const = default;
};

struct PairStat {
  std::string term_i;
  std::string term_j;
  std::uint32_t c_ij = 0;
  double e_ij = 0.0;

  bool operator==(const PairStat&) const = default;
};

struct GraphParams {
  double threshold = 0.05;
  std::uint32_t min_doc_freq = 2;
  std::set<std::string> stoplist;

  bool operator==(const GraphParams&) const = default;
};

/// Thresholded equivalence-index graph over the admitted vocabulary.
/// Term ids follow lexicographic order of the descriptors, so comparing ids
/// compares descriptors. Immutable once built.
class EquivalenceGraph {
 public:
  using TermId = std::uint32_t;

  struct Edge {
    TermId a = 0;  // a < b
    TermId b = 0;
    std::uint32_t c_ab = 0;
    double e = 0.0;

    bool operator==(const Edge&) const = default;
  };

  struct Neighbor {
    TermId term = 0;
    double e = 0.0;

    bool operator==(const Neighbor&) const = default;
  };

  EquivalenceGraph() = default;

  /// Assembles a graph from explicit parts. `vocabulary` maps descriptor to
  /// C_i; every edge endpoint must be in it. Used for constructed fixtures.
  static EquivalenceGraph from_parts(const std::map<std::string, std::uint32_t>& vocabulary,
                                     std::span<const PairStat> edges, GraphParams params,
                                     std::size_t document_count);

  const GraphParams& params() const noexcept { return params_; }
  std::size_t document_count() const noexcept { return documents_; }
  std::size_t term_count() const noexcept { return terms_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }

  const std::string& term(TermId id) const { return terms_.at(id); }
  std::uint32_t doc_freq(TermId id) const { return doc_freq_.at(id); }
  std::optional<TermId> find(std::string_view descriptor) const;

  /// Edges sorted by (a, b).
  std::span<const Edge> edges() const noexcept { return edges_; }
  /// Neighbors of `id`, sorted by term id.
  std::span<const Neighbor> neighbors(TermId id) const;
  std::optional<double> strength(TermId x, TermId y) const;

  /// Resolves (x, y) and (y, x) to the same canonical entry.
  std::optional<PairStat> pair(std::string_view x, std::string_view y) const;
  std::vector<PairStat> edge_list() const;
  TermStats term_stats() const;

  /// Copy with every edge strength multiplied by k (k > 0).
  EquivalenceGraph scaled(double k) const;

  bool operator==(const EquivalenceGraph& other) const;

 private:
  void build_adjacency();

  GraphParams params_;
  std::size_t documents_ = 0;
  std::vector<std::string> terms_;
  std::vector<std::uint32_t> doc_freq_;
  std::vector<Edge> edges_;
  std::vector<std::size_t> adj_offsets_;
  std::vector<Neighbor> adj_;
};

TermStats term_counts(const Corpus& corpus);

/// Exact co-document counts for every admitted pair that co-occurs at least
/// once, sorted by (term_i, term_j).
std::vector<PairCount> pair_counts(const Corpus& corpus, const std::set<std::string>& admitted);

/// c_ij^2 / (c_i * c_j). Throws Error(Domain) unless c_i, c_j >= 1 and
/// 0 <= c_ij <= min(c_i, c_j).
double equivalence_index(std::uint64_t c_ij, std::uint64_t c_i, std::uint64_t c_j);

/// Prunes the vocabulary (min_doc_freq, stoplist) first, then thresholds
/// edges. Throws Error(EmptyCorpus) for a corpus without documents and
/// Error(InvalidArgument) unless 0 < threshold <= 1.
EquivalenceGraph build_graph(const Corpus& corpus, const GraphParams& params);

/// Canonical tab-separated export: `#`-prefixed parameter header, then one
/// `term_i TAB term_j TAB c_ij TAB e_ij` line per edge in lexicographic order.
std::string export_graph_table(const EquivalenceGraph& graph);

}  // namespace mlink
