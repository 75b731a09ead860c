#include "mlink/discovery.hpp"

#include <zlib.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <random>

#include <fmt/format.h>

#include "mlink/error.hpp"
#include "mlink/json_io.hpp"
#include "text_util.hpp"

namespace mlink {

namespace {

constexpr std::size_t kMaxEvidence = 10;
constexpr std::string_view kSessionFormat = "mlink-session";

std::string utc_now() {
  using namespace std::chrono;
  const auto now = system_clock::now();
  const auto ms = duration_cast<milliseconds>(now.time_since_epoch()).count() % 1000;
  const std::time_t t = system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

std::string random_id() {
  static thread_local std::mt19937_64 rng{std::random_device{}()};
  return fmt::format("{:016x}", rng());
}

void audit(DiscoverySession& s, const SessionEnv& env, std::string action, std::string detail) {
  s.audit_log.push_back(
      AuditEntry{s.audit_log.size() + 1, env.now(), std::move(action), std::move(detail)});
}

IntermediateEntry* find_entry(DiscoverySession& s, std::string_view descriptor) {
  for (auto& e : s.intermediates) {
    if (e.descriptor == descriptor) return &e;
  }
  return nullptr;
}

double normalized(double value, double med) { return med > 0.0 ? value / med : value; }

std::string checksum(const std::string& payload) {
  const auto crc = crc32(0L, reinterpret_cast<const Bytef*>(payload.data()),
                         static_cast<uInt>(payload.size()));
  return fmt::format("crc32:{:08x}", crc);
}

}  // namespace

const SessionEnv& default_session_env() {
  static const SessionEnv env{utc_now, random_id};
  return env;
}

const IntermediateEntry* DiscoverySession::find_intermediate(std::string_view descriptor) const noexcept {
  for (const auto& e : intermediates) {
    if (e.descriptor == descriptor) return &e;
  }
  return nullptr;
}

DiscoverySession create_session(const Corpus& source_corpus, std::string_view source_descriptor,
                                const SessionConfig& config, const SessionEnv& env) {
  const bool present = std::any_of(
      source_corpus.documents.begin(), source_corpus.documents.end(), [&](const Document& d) {
        return std::find(d.mesh_terms.begin(), d.mesh_terms.end(), source_descriptor) !=
               d.mesh_terms.end();
      });
  if (!present) {
    throw Error(Errc::UnknownTerm, fmt::format("'{}' does not occur in corpus '{}'",
                                               source_descriptor, source_corpus.label));
  }
  DiscoverySession s;
  s.session_id = env.new_id();
  s.config = config;
  s.source.corpus_id = source_corpus.corpus_id;
  s.source.descriptor = std::string(source_descriptor);
  s.source.diagram = analyze_corpus(source_corpus, config.analysis);
  audit(s, env, "create",
        fmt::format("source={} corpus={}", source_descriptor, source_corpus.corpus_id));
  return s;
}

DiscoverySession mark_intermediate(const DiscoverySession& session, std::string_view descriptor,
                                   const SessionEnv& env) {
  if (descriptor == session.source.descriptor) {
    throw Error(Errc::InvalidIntermediate,
                fmt::format("'{}' is the source term and cannot be an intermediate", descriptor));
  }
  const auto& vocab = session.source.diagram.vocabulary;
  if (vocab.find(std::string(descriptor)) == vocab.end()) {
    throw Error(Errc::InvalidIntermediate,
                fmt::format("'{}' is not in the source diagram vocabulary", descriptor));
  }
  DiscoverySession s = session;
  if (s.find_intermediate(descriptor) != nullptr) {
    audit(s, env, "mark-noop", fmt::format("intermediate={} already marked", descriptor));
    return s;
  }
  IntermediateEntry e;
  e.descriptor = std::string(descriptor);
  if (const Cluster* c = locate_term(s.source.diagram, descriptor)) e.cluster_id = c->id;
  s.intermediates.push_back(std::move(e));
  audit(s, env, "mark",
        fmt::format("intermediate={} cluster={}", descriptor,
                    s.intermediates.back().cluster_id ? std::to_string(*s.intermediates.back().cluster_id)
                                                      : std::string("none")));
  return s;
}

DiscoverySession attach_intermediate_corpus(const DiscoverySession& session,
                                            std::string_view descriptor, const Corpus& corpus,
                                            const SessionEnv& env) {
  if (session.find_intermediate(descriptor) == nullptr) {
    throw Error(Errc::UnknownIntermediate,
                fmt::format("'{}' has not been marked as an intermediate", descriptor));
  }
  auto diagram = analyze_corpus(corpus, session.config.analysis);
  DiscoverySession s = session;
  IntermediateEntry* e = find_entry(s, descriptor);
  const bool replacing = e->diagram.has_value();
  const std::string previous = e->corpus_id.value_or("");
  e->corpus_id = corpus.corpus_id;
  e->diagram = std::move(diagram);
  if (replacing) {
    audit(s, env, "attach-replace",
          fmt::format("intermediate={} corpus={} replaced={}", descriptor, corpus.corpus_id, previous));
  } else {
    audit(s, env, "attach", fmt::format("intermediate={} corpus={}", descriptor, corpus.corpus_id));
  }
  return s;
}

DisjointResult check_disjoint(const Corpus& corpus, std::string_view descriptor, bool strict_titles) {
  DisjointResult r;
  const std::string needle = detail::to_lower(descriptor);
  for (const auto& doc : corpus.documents) {
    if (std::find(doc.mesh_terms.begin(), doc.mesh_terms.end(), descriptor) != doc.mesh_terms.end()) {
      r.disjoint = false;
      if (r.evidence.size() < kMaxEvidence) r.evidence.push_back(doc.pmid);
    } else if (strict_titles && !needle.empty() &&
               detail::to_lower(doc.title).find(needle) != std::string::npos) {
      r.title_warnings.push_back(doc.pmid);
    }
  }
  return r;
}

std::pair<DiscoverySession, std::vector<TargetCandidate>> candidate_targets(
    const DiscoverySession& session, std::string_view intermediate, const Corpus& source_corpus,
    const SessionEnv& env) {
  const IntermediateEntry* entry = session.find_intermediate(intermediate);
  if (entry == nullptr) {
    throw Error(Errc::UnknownIntermediate,
                fmt::format("'{}' has not been marked as an intermediate", intermediate));
  }
  if (!entry->diagram) {
    throw Error(Errc::SourceTermAbsent,
                fmt::format("no literature attached for intermediate '{}'", intermediate));
  }
  if (source_corpus.corpus_id != session.source.corpus_id) {
    throw Error(Errc::CorpusMismatch,
                fmt::format("corpus {} is not the session's source corpus {}",
                            source_corpus.corpus_id, session.source.corpus_id));
  }
  const StrategicalDiagram& d = *entry->diagram;
  const Cluster* source = locate_term(d, session.source.descriptor);
  if (source == nullptr) {
    throw Error(Errc::SourceTermAbsent,
                fmt::format("the '{}' literature diagram does not cluster the source term '{}'",
                            intermediate, session.source.descriptor));
  }

  struct Ranked {
    const Cluster* cluster;
    std::optional<RatioReport> str;
    double proximity;
  };
  std::vector<Ranked> ranked, undefined;
  const double sx = normalized(source->density, d.median_density);
  const double sy = normalized(source->centrality, d.median_centrality);
  for (const auto& c : d.clusters) {
    if (c.id == source->id) continue;
    const double proximity = std::abs(normalized(c.density, d.median_density) - sx) +
                             std::abs(normalized(c.centrality, d.median_centrality) - sy);
    if (source->centrality == 0.0 || c.centrality == 0.0) {
      undefined.push_back({&c, std::nullopt, proximity});
    } else {
      ranked.push_back({&c, ratio(*source, c, RatioKind::STR), proximity});
    }
  }
  std::sort(ranked.begin(), ranked.end(), [](const Ranked& x, const Ranked& y) {
    const double lx = std::abs(std::log(x.str->ratio));
    const double ly = std::abs(std::log(y.str->ratio));
    if (lx != ly) return lx < ly;
    if (x.proximity != y.proximity) return x.proximity < y.proximity;
    return x.cluster->id < y.cluster->id;
  });
  std::sort(undefined.begin(), undefined.end(),
            [](const Ranked& x, const Ranked& y) { return x.cluster->id < y.cluster->id; });
  ranked.insert(ranked.end(), undefined.begin(), undefined.end());

  std::vector<TargetCandidate> out;
  for (const auto& r : ranked) {
    for (const auto& member : r.cluster->members) {
      if (member == session.source.descriptor || member == intermediate) continue;
      TargetCandidate t;
      t.descriptor = member;
      t.intermediate = std::string(intermediate);
      t.cluster_id = r.cluster->id;
      t.str = r.str;
      t.proximity = r.proximity;
      if (!r.str) t.flags.set(Flag::NoCdr);
      else if (session.config.band.contains(r.str->ratio)) t.flags.set(Flag::StrNearOne);
      t.disjointness = check_disjoint(source_corpus, member, session.config.strict_titles);
      out.push_back(std::move(t));
    }
  }

  DiscoverySession s = session;
  std::erase_if(s.target_candidates,
                [&](const TargetCandidate& t) { return t.intermediate == intermediate; });
  s.target_candidates.insert(s.target_candidates.end(), out.begin(), out.end());
  audit(s, env, "targets",
        fmt::format("intermediate={} source_cluster={} candidates={}", intermediate, source->id,
                    out.size()));
  return {std::move(s), std::move(out)};
}

std::string save_session(const DiscoverySession& session) {
  Json payload = session_to_json(session);
  Json doc{{"format", kSessionFormat},
           {"version", kSessionFormatVersion},
           {"checksum", checksum(payload.dump())},
           {"payload", std::move(payload)}};
  return doc.dump(1) + "\n";
}

DiscoverySession load_session(std::string_view bytes) {
  Json doc;
  try {
    doc = Json::parse(bytes);
  } catch (const Json::exception& e) {
    throw Error(Errc::CorruptSession, fmt::format("session file is not valid JSON: {}", e.what()));
  }
  if (!doc.is_object() || doc.value("format", std::string{}) != kSessionFormat ||
      !doc.contains("payload") || !doc.contains("checksum") || !doc.contains("version")) {
    throw Error(Errc::CorruptSession, "not an mlink session file");
  }
  if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kSessionFormatVersion) {
    throw Error(Errc::CorruptSession, fmt::format("unsupported session version {}", doc["version"].dump()));
  }
  if (!doc["checksum"].is_string() || doc["checksum"].get<std::string>() != checksum(doc["payload"].dump())) {
    throw Error(Errc::CorruptSession, "session checksum mismatch");
  }
  try {
    return session_from_json(doc["payload"]);
  } catch (const Error& e) {
    throw Error(Errc::CorruptSession, e.what());
  }
}

std::string format_audit_log(const DiscoverySession& session) {
  std::string out;
  for (const auto& a : session.audit_log) {
    out += fmt::format("{}\t{}\t{}\t{}\n", a.seq, a.timestamp, a.action, a.detail);
  }
  return out;
}

}  // namespace mlink
