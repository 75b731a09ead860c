#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "mlink/diagram.hpp"
#include "mlink/medline.hpp"

namespace mlink {

struct SessionConfig {
  AnalysisParams analysis;
  RatioBand band;
  /// Also scan titles during disjointness checks (advisory warnings only).
  bool strict_titles = false;

  bool operator==(const SessionConfig&) const = default;
};

struct AuditEntry {
  std::uint64_t seq = 0;
  std::string timestamp;  ///< ISO-8601 UTC
  std::string action;
  std::string detail;

  bool operator==(const AuditEntry&) const = default;
};

struct SourceLiterature {
  std::string corpus_id;
  std::string descriptor;
  StrategicalDiagram diagram;

  bool operator==(const SourceLiterature&) const = default;
};

struct IntermediateEntry {
  std::string descriptor;
  /// Cluster of the source diagram holding the descriptor, if any.
  std::optional<int> cluster_id;
  std::optional<std::string> corpus_id;
  std::optional<StrategicalDiagram> diagram;

  bool operator==(const IntermediateEntry&) const = default;
};

struct DisjointResult {
  bool disjoint = true;
  /// Up to 10 pmids whose MeSH terms contain the descriptor.
  std::vector<std::string> evidence;
  /// Strict mode only: pmids whose title mentions the descriptor.
  std::vector<std::string> title_warnings;

  bool operator==(const DisjointResult&) const = default;
};

struct TargetCandidate {
  std::string descriptor;
  std::string intermediate;
  int cluster_id = 0;
  /// Source cluster vs this cluster; absent when either cdr is undefined.
  std::optional<RatioReport> str;
  /// L1 distance of median-normalized (density, centrality) coordinates.
  double proximity = 0.0;
  FlagSet flags;
  DisjointResult disjointness;

  bool operator==(const TargetCandidate&) const = default;
};

struct DiscoverySession {
  std::string session_id;
  SessionConfig config;
  SourceLiterature source;
  std::vector<IntermediateEntry> intermediates;
  std::vector<TargetCandidate> target_candidates;
  std::vector<AuditEntry> audit_log;

  const IntermediateEntry* find_intermediate(std::string_view descriptor) const noexcept;

  bool operator==(const DiscoverySession&) const = default;
};

/// Time and id sources, injectable for tests.
struct SessionEnv {
  std::function<std::string()> now;
  std::function<std::string()> new_id;
};

const SessionEnv& default_session_env();

/// Builds the source diagram. Throws Error(UnknownTerm) when the
/// descriptor occurs in no document of the corpus.
DiscoverySession create_session(const Corpus& source_corpus, std::string_view source_descriptor,
                                const SessionConfig& config = {},
                                const SessionEnv& env = default_session_env());

/// Throws Error(InvalidIntermediate) for the source descriptor or a
/// descriptor outside the source vocabulary. Re-marking is a logged no-op.
DiscoverySession mark_intermediate(const DiscoverySession& session, std::string_view descriptor,
                                   const SessionEnv& env = default_session_env());

/// Analyzes `corpus` with the session's parameters and stores the diagram
/// on the marked entry, replacing any previous one. Throws
/// Error(UnknownIntermediate) when the descriptor was never marked.
DiscoverySession attach_intermediate_corpus(const DiscoverySession& session,
                                            std::string_view descriptor, const Corpus& corpus,
                                            const SessionEnv& env = default_session_env());

/// Ranks members of the intermediate diagram's clusters as targets: by
/// |ln STR| (source cluster vs candidate cluster), then proximity, then
/// cluster id; clusters without a cdr follow in id order. Each candidate
/// carries check_disjoint against `source_corpus`. The ranking replaces
/// any candidates previously stored for this intermediate.
///
/// Throws Error(UnknownIntermediate), Error(SourceTermAbsent) when no
/// diagram is attached or it does not cluster the source descriptor, and
/// Error(CorpusMismatch) when `source_corpus` is not the session's source.
std::pair<DiscoverySession, std::vector<TargetCandidate>> candidate_targets(
    const DiscoverySession& session, std::string_view intermediate, const Corpus& source_corpus,
    const SessionEnv& env = default_session_env());

DisjointResult check_disjoint(const Corpus& corpus, std::string_view descriptor,
                              bool strict_titles = false);

/// Versioned, checksummed JSON document.
std::string save_session(const DiscoverySession& session);
/// Throws Error(CorruptSession) on parse failure, checksum mismatch or an
/// unknown version.
DiscoverySession load_session(std::string_view bytes);

/// Human-readable audit log, one entry per line.
std::string format_audit_log(const DiscoverySession& session);

}  // namespace mlink
