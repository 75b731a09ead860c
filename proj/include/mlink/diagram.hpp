#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "mlink/clusterer.hpp"
#include "mlink/cooccur.hpp"
#include "mlink/medline.hpp"

namespace mlink {

/// Position of a cluster relative to the two medians. Values equal to a
/// median count as high.
enum class Quadrant {
  HighDensityHighCentrality,
  HighDensityLowCentrality,
  LowDensityHighCentrality,
  LowDensityLowCentrality,
};

std::string_view to_string(Quadrant q) noexcept;
Quadrant quadrant_from_string(std::string_view s);

enum class Flag : std::uint8_t {
  BelowMedians = 1u << 0,
  SirNearOne = 1u << 1,
  StrNearOne = 1u << 2,
  NoCdr = 1u << 3,
  Highlight = 1u << 4,
};

class FlagSet {
 public:
  constexpr FlagSet() = default;

  constexpr void set(Flag f) noexcept { bits_ |= static_cast<std::uint8_t>(f); }
  constexpr bool has(Flag f) const noexcept { return (bits_ & static_cast<std::uint8_t>(f)) != 0; }
  constexpr std::uint8_t bits() const noexcept { return bits_; }
  /// Number of screening flags (BELOW_MEDIANS, SIR_NEAR_ONE) set.
  int screening_count() const noexcept { return int(has(Flag::BelowMedians)) + int(has(Flag::SirNearOne)); }

  /// Upper-case names in bit order, e.g. {"BELOW_MEDIANS", "SIR_NEAR_ONE"}.
  std::vector<std::string> names() const;
  static FlagSet from_names(const std::vector<std::string>& names);

  bool operator==(const FlagSet&) const = default;

 private:
  std::uint8_t bits_ = 0;
};

/// Closed multiplicative interval that makes "a ratio of about 1" precise.
struct RatioBand {
  double low = 0.5;
  double high = 2.0;

  bool contains(double ratio) const noexcept { return ratio >= low && ratio <= high; }
  bool operator==(const RatioBand&) const = default;
};

struct AnalysisParams {
  GraphParams graph;
  ClusterParams cluster;

  bool operator==(const AnalysisParams&) const = default;
};

struct DiagramStatistics {
  std::size_t documents = 0;
  std::size_t distinct_terms = 0;  ///< before vocabulary pruning
  std::size_t terms = 0;           ///< admitted vocabulary
  std::size_t edges = 0;

  bool operator==(const DiagramStatistics&) const = default;
};

struct StrategicalDiagram {
  std::string corpus_ref;
  std::string corpus_label;
  std::vector<Cluster> clusters;
  std::vector<Quadrant> quadrants;  ///< parallel to clusters
  double median_density = 0.0;
  double median_centrality = 0.0;
  AnalysisParams parameters;
  DiagramStatistics statistics;
  /// Admitted vocabulary with document frequencies.
  std::map<std::string, std::uint32_t> vocabulary;

  const Cluster* find_cluster(int id) const noexcept;
  Quadrant quadrant_of(int id) const;
  bool below_medians(const Cluster& c) const noexcept;

  bool operator==(const StrategicalDiagram&) const = default;
};

/// Computes medians (mean of the two middle values for even counts) and
/// quadrants. Throws Error(NoClusters) for an empty list.
StrategicalDiagram build_diagram(std::string corpus_ref, std::vector<Cluster> clusters);

/// Full pipeline: graph, clusters, diagram with vocabulary and statistics.
StrategicalDiagram analyze_corpus(const Corpus& corpus, const AnalysisParams& params);

double median(std::vector<double> values);

/// centrality / density. Throws CdrUndefinedError when centrality is 0.
double cdr(const Cluster& cluster);

enum class RatioKind { SIR, STR };
std::string_view to_string(RatioKind k) noexcept;

struct RatioReport {
  int cluster_a = 0;
  int cluster_b = 0;
  double cdr_a = 0.0;
  double cdr_b = 0.0;
  double ratio = 0.0;
  RatioKind kind = RatioKind::SIR;

  bool operator==(const RatioReport&) const = default;
};

/// cdr(a) / cdr(b); `a` plays the source role.
RatioReport ratio(const Cluster& a, const Cluster& b, RatioKind kind);

/// The cluster holding `descriptor`, or nullptr.
const Cluster* locate_term(const StrategicalDiagram& diagram, std::string_view descriptor);

struct SuggestOptions {
  RatioBand band;
  double flag_bonus = 0.5;
  /// Optional user-supplied descriptors that earn a HIGHLIGHT display flag.
  std::set<std::string> highlight;

  bool operator==(const SuggestOptions&) const = default;
};

struct Suggestion {
  int cluster_id = 0;
  std::optional<double> sir;    ///< absent for NO_CDR clusters
  std::optional<double> score;  ///< |ln SIR| - bonus per screening flag
  FlagSet flags;

  bool operator==(const Suggestion&) const = default;
};

/// Ranks every cluster except the source by ascending score, cluster id
/// breaking ties; clusters without a cdr follow in id order.
/// A single-cluster diagram yields an empty list. Otherwise throws
/// CdrUndefinedError when the source cluster has centrality 0 and
/// Error(InvalidArgument) for an unknown source id.
std::vector<Suggestion> suggest_intermediates(const StrategicalDiagram& diagram, int source_cluster,
                                              const SuggestOptions& options = {});

/// Source-independent flags of one cluster (BELOW_MEDIANS, NO_CDR, HIGHLIGHT).
FlagSet cluster_flags(const StrategicalDiagram& diagram, const Cluster& cluster,
                      const std::set<std::string>& highlight = {});

enum class ExportFormat { CanonicalTable, StructuredDocument, VectorImage };

/// Accepts "table"/"tsv", "json", "svg". Throws Error(UnknownFormat).
ExportFormat parse_export_format(std::string_view name);

struct ExportOptions {
  std::set<std::string> highlight;
};

std::string export_diagram(const StrategicalDiagram& diagram, ExportFormat format,
                           const ExportOptions& options = {});
std::string export_diagram(const StrategicalDiagram& diagram, std::string_view format,
                           const ExportOptions& options = {});

/// Parses a structured-document export. Throws Error(InvalidArgument) on
/// schema mismatch.
StrategicalDiagram import_diagram(std::string_view json);

/// `documents=<n> terms=<v> clusters=<k>`
std::string summary_line(const StrategicalDiagram& diagram);

}  // namespace mlink
