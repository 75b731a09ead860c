#include "mlink/json_io.hpp"

#include <fmt/format.h>

#include "mlink/error.hpp"

namespace mlink {

namespace {

template <class T>
Json optional_json(const std::optional<T>& v) {
  return v ? Json(*v) : Json(nullptr);
}

Json ratio_to_json(const RatioReport& r) {
  return Json{{"kind", to_string(r.kind)}, {"cluster_a", r.cluster_a}, {"cluster_b", r.cluster_b},
              {"cdr_a", r.cdr_a},          {"cdr_b", r.cdr_b},          {"ratio", r.ratio}};
}

RatioReport ratio_from_json(const Json& j) {
  RatioReport r;
  const auto kind = j.at("kind").get<std::string>();
  if (kind != "SIR" && kind != "STR") throw Error(Errc::InvalidArgument, "unknown ratio kind " + kind);
  r.kind = kind == "SIR" ? RatioKind::SIR : RatioKind::STR;
  r.cluster_a = j.at("cluster_a").get<int>();
  r.cluster_b = j.at("cluster_b").get<int>();
  r.cdr_a = j.at("cdr_a").get<double>();
  r.cdr_b = j.at("cdr_b").get<double>();
  r.ratio = j.at("ratio").get<double>();
  return r;
}

// Wraps nlohmann's exceptions so callers only see mlink::Error.
template <class F>
auto guarded(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidArgument, fmt::format("malformed {}: {}", what, e.what()));
  }
}

}  // namespace

Json params_to_json(const AnalysisParams& p) {
  return Json{
      {"threshold", p.graph.threshold},
      {"min_doc_freq", p.graph.min_doc_freq},
      {"stoplist", Json(std::vector<std::string>(p.graph.stoplist.begin(), p.graph.stoplist.end()))},
      {"min_cluster", p.cluster.min_size},
      {"max_cluster", p.cluster.max_size},
      {"attachment", p.cluster.attachment == Attachment::MaxLink ? "max" : "sum"},
  };
}

AnalysisParams params_from_json(const Json& j) {
  AnalysisParams p;
  p.graph.threshold = j.at("threshold").get<double>();
  p.graph.min_doc_freq = j.at("min_doc_freq").get<std::uint32_t>();
  for (const auto& s : j.at("stoplist")) p.graph.stoplist.insert(s.get<std::string>());
  p.cluster.min_size = j.at("min_cluster").get<std::size_t>();
  p.cluster.max_size = j.at("max_cluster").get<std::size_t>();
  const auto att = j.at("attachment").get<std::string>();
  if (att != "max" && att != "sum") throw Error(Errc::InvalidArgument, "unknown attachment " + att);
  p.cluster.attachment = att == "max" ? Attachment::MaxLink : Attachment::SumLink;
  return p;
}

Json diagram_to_json(const StrategicalDiagram& d, const ExportOptions& options) {
  Json clusters = Json::array();
  for (std::size_t i = 0; i < d.clusters.size(); ++i) {
    const auto& c = d.clusters[i];
    Json members = Json::array();
    for (const auto& m : c.members) {
      auto it = d.vocabulary.find(m);
      members.push_back(
          Json{{"descriptor", m}, {"doc_freq", it == d.vocabulary.end() ? 0U : it->second}});
    }
    clusters.push_back(Json{
        {"id", c.id},
        {"label", c.label},
        {"size", c.members.size()},
        {"density", c.density},
        {"centrality", c.centrality},
        {"seed_e", c.seed_e},
        {"cdr", c.centrality > 0.0 ? Json(c.centrality / c.density) : Json(nullptr)},
        {"quadrant", to_string(d.quadrants.at(i))},
        {"flags", cluster_flags(d, c, options.highlight).names()},
        {"members", std::move(members)},
    });
  }
  Json vocabulary = Json::object();
  for (const auto& [term, freq] : d.vocabulary) vocabulary[term] = freq;
  return Json{
      {"schema", "mlink-diagram"},
      {"schema_version", kDiagramSchemaVersion},
      {"corpus_ref", d.corpus_ref},
      {"corpus_label", d.corpus_label},
      {"parameters", params_to_json(d.parameters)},
      {"statistics",
       Json{{"documents", d.statistics.documents},
            {"distinct_terms", d.statistics.distinct_terms},
            {"terms", d.statistics.terms},
            {"edges", d.statistics.edges},
            {"clusters", d.clusters.size()}}},
      {"cluster_count", d.clusters.size()},
      {"median_density", d.median_density},
      {"median_centrality", d.median_centrality},
      {"clusters", std::move(clusters)},
      {"vocabulary", std::move(vocabulary)},
  };
}

StrategicalDiagram diagram_from_json(const Json& j) {
  return guarded("diagram document", [&] {
    if (j.value("schema", std::string{}) != "mlink-diagram") {
      throw Error(Errc::InvalidArgument, "not an mlink diagram document");
    }
    if (j.at("schema_version").get<int>() != kDiagramSchemaVersion) {
      throw Error(Errc::InvalidArgument,
                  fmt::format("unsupported diagram schema version {}", j.at("schema_version").dump()));
    }
    StrategicalDiagram d;
    d.corpus_ref = j.at("corpus_ref").get<std::string>();
    d.corpus_label = j.at("corpus_label").get<std::string>();
    d.parameters = params_from_json(j.at("parameters"));
    const auto& st = j.at("statistics");
    d.statistics.documents = st.at("documents").get<std::size_t>();
    d.statistics.distinct_terms = st.at("distinct_terms").get<std::size_t>();
    d.statistics.terms = st.at("terms").get<std::size_t>();
    d.statistics.edges = st.at("edges").get<std::size_t>();
    d.median_density = j.at("median_density").get<double>();
    d.median_centrality = j.at("median_centrality").get<double>();
    for (const auto& cj : j.at("clusters")) {
      Cluster c;
      c.id = cj.at("id").get<int>();
      c.label = cj.at("label").get<std::string>();
      c.density = cj.at("density").get<double>();
      c.centrality = cj.at("centrality").get<double>();
      c.seed_e = cj.at("seed_e").get<double>();
      for (const auto& m : cj.at("members")) c.members.push_back(m.at("descriptor").get<std::string>());
      d.quadrants.push_back(quadrant_from_string(cj.at("quadrant").get<std::string>()));
      d.clusters.push_back(std::move(c));
    }
    for (const auto& [term, freq] : j.at("vocabulary").items()) {
      d.vocabulary.emplace(term, freq.get<std::uint32_t>());
    }
    return d;
  });
}

Json suggestions_to_json(const std::vector<Suggestion>& suggestions, const StrategicalDiagram& d) {
  Json out = Json::array();
  int rank = 0;
  for (const auto& s : suggestions) {
    const Cluster* c = d.find_cluster(s.cluster_id);
    out.push_back(Json{
        {"rank", ++rank},
        {"cluster_id", s.cluster_id},
        {"label", c != nullptr ? c->label : std::string{}},
        {"sir", optional_json(s.sir)},
        {"score", optional_json(s.score)},
        {"flags", s.flags.names()},
        {"members", c != nullptr ? Json(c->members) : Json::array()},
    });
  }
  return out;
}

Json targets_to_json(const std::vector<TargetCandidate>& targets) {
  Json out = Json::array();
  int rank = 0;
  for (const auto& t : targets) {
    out.push_back(Json{
        {"rank", ++rank},
        {"descriptor", t.descriptor},
        {"intermediate", t.intermediate},
        {"cluster_id", t.cluster_id},
        {"str", t.str ? ratio_to_json(*t.str) : Json(nullptr)},
        {"proximity", t.proximity},
        {"flags", t.flags.names()},
        {"disjoint", t.disjointness.disjoint},
        {"evidence", t.disjointness.evidence},
        {"title_warnings", t.disjointness.title_warnings},
    });
  }
  return out;
}

namespace {

std::vector<TargetCandidate> targets_from_json(const Json& arr) {
  std::vector<TargetCandidate> out;
  for (const auto& j : arr) {
    TargetCandidate t;
    t.descriptor = j.at("descriptor").get<std::string>();
    t.intermediate = j.at("intermediate").get<std::string>();
    t.cluster_id = j.at("cluster_id").get<int>();
    if (!j.at("str").is_null()) t.str = ratio_from_json(j.at("str"));
    t.proximity = j.at("proximity").get<double>();
    t.flags = FlagSet::from_names(j.at("flags").get<std::vector<std::string>>());
    t.disjointness.disjoint = j.at("disjoint").get<bool>();
    t.disjointness.evidence = j.at("evidence").get<std::vector<std::string>>();
    t.disjointness.title_warnings = j.at("title_warnings").get<std::vector<std::string>>();
    out.push_back(std::move(t));
  }
  return out;
}

}  // namespace

Json session_to_json(const DiscoverySession& s) {
  Json intermediates = Json::array();
  for (const auto& e : s.intermediates) {
    intermediates.push_back(Json{
        {"descriptor", e.descriptor},
        {"cluster_id", optional_json(e.cluster_id)},
        {"corpus_id", optional_json(e.corpus_id)},
        {"diagram", e.diagram ? diagram_to_json(*e.diagram) : Json(nullptr)},
    });
  }
  Json audit = Json::array();
  for (const auto& a : s.audit_log) {
    audit.push_back(Json{{"seq", a.seq}, {"timestamp", a.timestamp}, {"action", a.action},
                         {"detail", a.detail}});
  }
  return Json{
      {"session_id", s.session_id},
      {"config",
       Json{{"analysis", params_to_json(s.config.analysis)},
            {"band", Json{{"low", s.config.band.low}, {"high", s.config.band.high}}},
            {"strict_titles", s.config.strict_titles}}},
      {"source",
       Json{{"corpus_id", s.source.corpus_id},
            {"descriptor", s.source.descriptor},
            {"diagram", diagram_to_json(s.source.diagram)}}},
      {"intermediates", std::move(intermediates)},
      {"target_candidates", targets_to_json(s.target_candidates)},
      {"audit_log", std::move(audit)},
  };
}

DiscoverySession session_from_json(const Json& j) {
  return guarded("session", [&] {
    DiscoverySession s;
    s.session_id = j.at("session_id").get<std::string>();
    const auto& cfg = j.at("config");
    s.config.analysis = params_from_json(cfg.at("analysis"));
    s.config.band.low = cfg.at("band").at("low").get<double>();
    s.config.band.high = cfg.at("band").at("high").get<double>();
    s.config.strict_titles = cfg.at("strict_titles").get<bool>();
    const auto& src = j.at("source");
    s.source.corpus_id = src.at("corpus_id").get<std::string>();
    s.source.descriptor = src.at("descriptor").get<std::string>();
    s.source.diagram = diagram_from_json(src.at("diagram"));
    for (const auto& ej : j.at("intermediates")) {
      IntermediateEntry e;
      e.descriptor = ej.at("descriptor").get<std::string>();
      if (!ej.at("cluster_id").is_null()) e.cluster_id = ej.at("cluster_id").get<int>();
      if (!ej.at("corpus_id").is_null()) e.corpus_id = ej.at("corpus_id").get<std::string>();
      if (!ej.at("diagram").is_null()) e.diagram = diagram_from_json(ej.at("diagram"));
      s.intermediates.push_back(std::move(e));
    }
    s.target_candidates = targets_from_json(j.at("target_candidates"));
    for (const auto& aj : j.at("audit_log")) {
      s.audit_log.push_back(AuditEntry{aj.at("seq").get<std::uint64_t>(),
                                       aj.at("timestamp").get<std::string>(),
                                       aj.at("action").get<std::string>(),
                                       aj.at("detail").get<std::string>()});
    }
    return s;
  });
}

}  // namespace mlink
