#pragma once

// Brute-force reference implementation of counting, equivalence index,
// thresholding and greedy clustering. Shares no code with the engine: every
// quantity is recomputed from plain std::set documents by exhaustive loops.

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mlink/medline.hpp"

namespace naive {

using Doc = std::set<std::string>;
using Pair = std::pair<std::string, std::string>;

struct Cluster {
  std::vector<std::string> members;  // sorted
  std::string label;
  double density = 0.0;
  double centrality = 0.0;
  double seed = 0.0;
};

struct Result {
  std::map<std::string, std::uint32_t> counts;    // every descriptor
  std::map<std::string, std::uint32_t> admitted;  // after pruning
  std::map<Pair, std::uint32_t> pairs;            // admitted pairs with c > 0
  std::map<Pair, double> edges;                   // e >= threshold
  std::vector<Cluster> clusters;
};

struct Params {
  double threshold = 0.05;
  std::uint32_t min_doc_freq = 2;
  std::set<std::string> stoplist;
  std::size_t min_size = 3;
  std::size_t max_size = 10;
  bool sum_link = false;
};

std::vector<Doc> as_sets(const mlink::Corpus& corpus);
Result run(const std::vector<Doc>& docs, const Params& params);

}  // namespace naive
