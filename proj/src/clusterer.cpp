#include "mlink/clusterer.hpp"

#include <algorithm>
#include <unordered_map>

#include <fmt/format.h>

#include "mlink/error.hpp"

namespace mlink {

namespace {

using TermId = EquivalenceGraph::TermId;
using Edge = EquivalenceGraph::Edge;

struct Attach {
  double max = 0.0;
  double sum = 0.0;
};

// true when candidate x should be preferred over y
bool better(const EquivalenceGraph& g, Attachment mode, TermId x, const Attach& ax, TermId y,
            const Attach& ay) {
  const double px = mode == Attachment::MaxLink ? ax.max : ax.sum;
  const double py = mode == Attachment::MaxLink ? ay.max : ay.sum;
  if (px != py) return px > py;
  const double sx = mode == Attachment::MaxLink ? ax.sum : ax.max;
  const double sy = mode == Attachment::MaxLink ? ay.sum : ay.max;
  if (sx != sy) return sx > sy;
  if (g.doc_freq(x) != g.doc_freq(y)) return g.doc_freq(x) > g.doc_freq(y);
  return x < y;
}

std::vector<TermId> resolve(std::span<const std::string> members, const EquivalenceGraph& g) {
  std::vector<TermId> ids;
  ids.reserve(members.size());
  for (const auto& m : members) {
    auto id = g.find(m);
    if (!id) throw Error(Errc::UnknownTerm, fmt::format("'{}' is not in the graph vocabulary", m));
    ids.push_back(*id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

// Internal and boundary edges, each in canonical (a, b) order so sums are
// accumulated in a fixed order independent of how the members were found.
void collect_edges(const std::vector<TermId>& ids, const EquivalenceGraph& g,
                   std::vector<Edge>& internal, std::vector<Edge>& boundary) {
  auto member = [&](TermId t) { return std::binary_search(ids.begin(), ids.end(), t); };
  for (TermId m : ids) {
    for (const auto& n : g.neighbors(m)) {
      if (member(n.term)) {
        if (m < n.term) internal.push_back({m, n.term, 0, n.e});
      } else {
        auto [a, b] = std::minmax(m, n.term);
        boundary.push_back({a, b, 0, n.e});
      }
    }
  }
  auto order = [](const Edge& x, const Edge& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; };
  std::sort(internal.begin(), internal.end(), order);
  std::sort(boundary.begin(), boundary.end(), order);
}

double density_of(const std::vector<TermId>& ids, const EquivalenceGraph& g) {
  std::vector<Edge> internal, boundary;
  collect_edges(ids, g, internal, boundary);
  if (internal.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& e : internal) sum += e.e;
  return sum / static_cast<double>(internal.size());
}

double centrality_of(const std::vector<TermId>& ids, const EquivalenceGraph& g) {
  std::vector<Edge> internal, boundary;
  collect_edges(ids, g, internal, boundary);
  double sum = 0.0;
  for (const auto& e : boundary) sum += e.e;
  return sum;
}

std::string label_of(const std::vector<TermId>& ids, const EquivalenceGraph& g) {
  TermId best = ids.front();
  for (TermId t : ids) {
    if (g.doc_freq(t) > g.doc_freq(best) || (g.doc_freq(t) == g.doc_freq(best) && t < best)) {
      best = t;
    }
  }
  return g.term(best);
}

}  // namespace

bool Cluster::contains(std::string_view descriptor) const {
  return std::binary_search(members.begin(), members.end(), descriptor,
                            [](std::string_view a, std::string_view b) { return a < b; });
}

void validate(const ClusterParams& params) {
  if (params.min_size < 2 || params.max_size < params.min_size) {
    throw Error(Errc::InvalidArgument,
                fmt::format("cluster size bounds must satisfy 2 <= min <= max, got {}..{}",
                            params.min_size, params.max_size));
  }
}

std::vector<Cluster> build_clusters(const EquivalenceGraph& graph, const ClusterParams& params) {
  validate(params);

  std::vector<Edge> seeds(graph.edges().begin(), graph.edges().end());
  std::sort(seeds.begin(), seeds.end(), [](const Edge& x, const Edge& y) {
    if (x.e != y.e) return x.e > y.e;
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  });

  std::vector<bool> consumed(graph.term_count(), false);
  std::vector<Cluster> clusters;
  std::unordered_map<TermId, Attach> candidates;
  std::vector<TermId> group;

  auto absorb = [&](TermId t) {
    group.push_back(t);
    consumed[t] = true;
    candidates.erase(t);
    for (const auto& n : graph.neighbors(t)) {
      if (consumed[n.term]) continue;
      auto& a = candidates[n.term];
      a.max = std::max(a.max, n.e);
      a.sum += n.e;
    }
  };

  for (const auto& seed : seeds) {
    if (consumed[seed.a] || consumed[seed.b]) continue;
    group.clear();
    candidates.clear();
    consumed[seed.a] = consumed[seed.b] = true;
    absorb(seed.a);
    absorb(seed.b);

    while (group.size() < params.max_size && !candidates.empty()) {
      auto best = candidates.begin();
      for (auto it = std::next(candidates.begin()); it != candidates.end(); ++it) {
        if (better(graph, params.attachment, it->first, it->second, best->first, best->second)) {
          best = it;
        }
      }
      absorb(best->first);
    }

    if (group.size() < params.min_size) continue;

    std::vector<TermId> ids = group;
    std::sort(ids.begin(), ids.end());
    Cluster c;
    c.id = static_cast<int>(clusters.size()) + 1;
    for (TermId t : ids) c.members.push_back(graph.term(t));
    c.label = label_of(ids, graph);
    c.density = density_of(ids, graph);
    c.centrality = centrality_of(ids, graph);
    c.seed_e = seed.e;
    clusters.push_back(std::move(c));
  }
  return clusters;
}

double cluster_density(std::span<const std::string> members, const EquivalenceGraph& graph) {
  return density_of(resolve(members, graph), graph);
}

double cluster_centrality(std::span<const std::string> members, const EquivalenceGraph& graph) {
  return centrality_of(resolve(members, graph), graph);
}

std::string label_cluster(std::span<const std::string> members, const EquivalenceGraph& graph) {
  if (members.empty()) throw Error(Errc::InvalidArgument, "cannot label an empty member set");
  return label_of(resolve(members, graph), graph);
}

std::string export_cluster_table(std::span<const Cluster> clusters) {
  std::vector<const Cluster*> rows;
  for (const auto& c : clusters) rows.push_back(&c);
  std::sort(rows.begin(), rows.end(), [](auto* x, auto* y) { return x->id < y->id; });
  std::string out = "id\tlabel\tsize\tdensity\tcentrality\tseed_e\tmembers\n";
  for (const auto* c : rows) {
    out += fmt::format("{}\t{}\t{}\t{:.9f}\t{:.9f}\t{:.9f}\t{}\n", c->id, c->label,
                       c->members.size(), c->density, c->centrality, c->seed_e,
                       fmt::join(c->members, ";"));
  }
  return out;
}

}  // namespace mlink
