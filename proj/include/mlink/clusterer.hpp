#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mlink/cooccur.hpp"

namespace mlink {

/// How a candidate's link strength to the growing cluster is measured.
enum class Attachment {
  MaxLink,  ///< strongest single edge to any member (default)
  SumLink,  ///< sum of edges to all members
};

struct ClusterParams {
  std::size_t min_size = 3;
  std::size_t max_size = 10;
  Attachment attachment = Attachment::MaxLink;

  bool operator==(const ClusterParams&) const = default;
};

struct Cluster {
  int id = 0;  ///< 1-based, creation order
  std::vector<std::string> members;  ///< sorted
  std::string label;
  double density = 0.0;
  double centrality = 0.0;
  double seed_e = 0.0;

  bool contains(std::string_view descriptor) const;
  bool operator==(const Cluster&) const = default;
};

/// Greedy single-pass clustering. Seeds are taken in descending equivalence
/// index (ties: lexicographically smallest pair); each group grows by the
/// candidate with the strongest attachment until max_size or no candidate
/// remains. Groups below min_size are discarded, but their terms stay
/// consumed.
///
/// Attachment tie-breaks, in order: the other link measure (sum for MaxLink,
/// max for SumLink), higher document frequency, lexicographic order.
std::vector<Cluster> build_clusters(const EquivalenceGraph& graph, const ClusterParams& params = {});

/// Mean strength of graph edges with both endpoints in `members`. Pairs
/// below the threshold have no edge and do not enter the mean.
double cluster_density(std::span<const std::string> members, const EquivalenceGraph& graph);

/// Sum of strengths of graph edges with exactly one endpoint in `members`.
double cluster_centrality(std::span<const std::string> members, const EquivalenceGraph& graph);

/// Member with the highest document frequency; ties go to the
/// lexicographically smallest.
std::string label_cluster(std::span<const std::string> members, const EquivalenceGraph& graph);

/// Tab-separated, header row, one row per cluster sorted by id:
/// id, label, size, density, centrality, seed_e, members joined by ';'.
std::string export_cluster_table(std::span<const Cluster> clusters);

void validate(const ClusterParams& params);

}  // namespace mlink
