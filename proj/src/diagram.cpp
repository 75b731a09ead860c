#include "mlink/diagram.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include <fmt/format.h>

#include "mlink/error.hpp"
#include "mlink/json_io.hpp"

namespace mlink {

namespace {

struct FlagName {
  Flag flag;
  std::string_view name;
};

constexpr FlagName kFlagNames[] = {
    {Flag::BelowMedians, "BELOW_MEDIANS"}, {Flag::SirNearOne, "SIR_NEAR_ONE"},
    {Flag::StrNearOne, "STR_NEAR_ONE"},    {Flag::NoCdr, "NO_CDR"},
    {Flag::Highlight, "HIGHLIGHT"},
};

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string render_table(const StrategicalDiagram& d) {
  std::vector<std::size_t> order(d.clusters.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](auto x, auto y) { return d.clusters[x].id < d.clusters[y].id; });
  std::string out = "cluster_id\tlabel\tdensity\tcentrality\tquadrant\n";
  for (auto i : order) {
    const auto& c = d.clusters[i];
    out += fmt::format("{}\t{}\t{:.9f}\t{:.9f}\t{}\n", c.id, c.label, c.density, c.centrality,
                       to_string(d.quadrants[i]));
  }
  return out;
}

std::string render_svg(const StrategicalDiagram& d, const ExportOptions& options) {
  constexpr double kWidth = 640, kHeight = 480, kMargin = 60;
  double max_x = d.median_density, max_y = d.median_centrality;
  for (const auto& c : d.clusters) {
    max_x = std::max(max_x, c.density);
    max_y = std::max(max_y, c.centrality);
  }
  max_x = max_x > 0 ? max_x * 1.1 : 1.0;
  max_y = max_y > 0 ? max_y * 1.1 : 1.0;
  const double plot_w = kWidth - 2 * kMargin, plot_h = kHeight - 2 * kMargin;
  auto px = [&](double v) { return kMargin + v / max_x * plot_w; };
  auto py = [&](double v) { return kHeight - kMargin - v / max_y * plot_h; };

  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} "
      "{1}\">\n",
      kWidth, kHeight);
  out += fmt::format("<title>Strategical diagram: {}</title>\n", xml_escape(d.corpus_label));
  out += fmt::format(
      "<rect class=\"frame\" x=\"{:.2f}\" y=\"{:.2f}\" width=\"{:.2f}\" height=\"{:.2f}\" "
      "fill=\"none\" stroke=\"#000\"/>\n",
      kMargin, kMargin, plot_w, plot_h);
  out += fmt::format(
      "<text class=\"axis-label\" x=\"{:.2f}\" y=\"{:.2f}\" text-anchor=\"middle\">density</text>\n",
      kWidth / 2, kHeight - 20);
  out += fmt::format(
      "<text class=\"axis-label\" x=\"20\" y=\"{:.2f}\" text-anchor=\"middle\" "
      "transform=\"rotate(-90 20 {:.2f})\">centrality</text>\n",
      kHeight / 2, kHeight / 2);
  out += fmt::format(
      "<line id=\"median-density\" class=\"median\" x1=\"{0:.2f}\" y1=\"{1:.2f}\" x2=\"{0:.2f}\" "
      "y2=\"{2:.2f}\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>\n",
      px(d.median_density), kMargin, kHeight - kMargin);
  out += fmt::format(
      "<line id=\"median-centrality\" class=\"median\" x1=\"{1:.2f}\" y1=\"{0:.2f}\" "
      "x2=\"{2:.2f}\" y2=\"{0:.2f}\" stroke=\"#555\" stroke-dasharray=\"4 3\"/>\n",
      py(d.median_centrality), kMargin, kWidth - kMargin);
  for (const auto& c : d.clusters) {
    const double x = px(c.density), y = py(c.centrality);
    out += fmt::format(
        "<path id=\"cluster-{}\" class=\"marker\" d=\"M {:.2f} {:.2f} L {:.2f} {:.2f} L {:.2f} "
        "{:.2f} Z\"><title>{} (density {:.6f}, centrality {:.6f})</title></path>\n",
        c.id, x, y - 6, x + 5, y + 4, x - 5, y + 4, xml_escape(c.label), c.density, c.centrality);
  }
  for (const auto& c : d.clusters) {
    auto flags = cluster_flags(d, c, options.highlight);
    if (!flags.has(Flag::BelowMedians) && !flags.has(Flag::Highlight)) continue;
    out += fmt::format("<text class=\"label\" x=\"{:.2f}\" y=\"{:.2f}\">{}</text>\n",
                       px(c.density) + 7, py(c.centrality) - 7, xml_escape(c.label));
  }
  out += "</svg>\n";
  return out;
}

}  // namespace

std::string_view to_string(Quadrant q) noexcept {
  switch (q) {
    case Quadrant::HighDensityHighCentrality: return "high-density/high-centrality";
    case Quadrant::HighDensityLowCentrality: return "high-density/low-centrality";
    case Quadrant::LowDensityHighCentrality: return "low-density/high-centrality";
    case Quadrant::LowDensityLowCentrality: return "low-density/low-centrality";
  }
  return "";
}

Quadrant quadrant_from_string(std::string_view s) {
  for (auto q : {Quadrant::HighDensityHighCentrality, Quadrant::HighDensityLowCentrality,
                 Quadrant::LowDensityHighCentrality, Quadrant::LowDensityLowCentrality}) {
    if (to_string(q) == s) return q;
  }
  throw Error(Errc::InvalidArgument, fmt::format("unknown quadrant '{}'", s));
}

std::vector<std::string> FlagSet::names() const {
  std::vector<std::string> out;
  for (const auto& f : kFlagNames) {
    if (has(f.flag)) out.emplace_back(f.name);
  }
  return out;
}

FlagSet FlagSet::from_names(const std::vector<std::string>& names) {
  FlagSet s;
  for (const auto& n : names) {
    auto it = std::find_if(std::begin(kFlagNames), std::end(kFlagNames),
                           [&](const FlagName& f) { return f.name == n; });
    if (it == std::end(kFlagNames)) throw Error(Errc::InvalidArgument, "unknown flag " + n);
    s.set(it->flag);
  }
  return s;
}

const Cluster* StrategicalDiagram::find_cluster(int id) const noexcept {
  for (const auto& c : clusters) {
    if (c.id == id) return &c;
  }
  return nullptr;
}

Quadrant StrategicalDiagram::quadrant_of(int id) const {
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    if (clusters[i].id == id) return quadrants.at(i);
  }
  throw Error(Errc::InvalidArgument, fmt::format("no cluster with id {}", id));
}

bool StrategicalDiagram::below_medians(const Cluster& c) const noexcept {
  return c.density < median_density && c.centrality < median_centrality;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(Errc::InvalidArgument, "median of an empty list");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  if (n % 2 == 1) return values[n / 2];
  return (values[n / 2 - 1] + values[n / 2]) / 2.0;
}

StrategicalDiagram build_diagram(std::string corpus_ref, std::vector<Cluster> clusters) {
  if (clusters.empty()) {
    throw Error(Errc::NoClusters,
                fmt::format("no clusters could be formed for corpus '{}'", corpus_ref));
  }
  StrategicalDiagram d;
  d.corpus_ref = std::move(corpus_ref);
  std::vector<double> dens, cent;
  for (const auto& c : clusters) {
    dens.push_back(c.density);
    cent.push_back(c.centrality);
  }
  d.median_density = median(dens);
  d.median_centrality = median(cent);
  for (const auto& c : clusters) {
    const bool hd = c.density >= d.median_density;
    const bool hc = c.centrality >= d.median_centrality;
    d.quadrants.push_back(hd ? (hc ? Quadrant::HighDensityHighCentrality
                                   : Quadrant::HighDensityLowCentrality)
                             : (hc ? Quadrant::LowDensityHighCentrality
                                   : Quadrant::LowDensityLowCentrality));
  }
  d.clusters = std::move(clusters);
  return d;
}

StrategicalDiagram analyze_corpus(const Corpus& corpus, const AnalysisParams& params) {
  validate(params.cluster);
  const auto graph = build_graph(corpus, params.graph);
  auto d = build_diagram(corpus.corpus_id, build_clusters(graph, params.cluster));
  d.corpus_label = corpus.label;
  d.parameters = params;
  d.vocabulary = graph.term_stats().counts;
  std::unordered_set<std::string_view> distinct;
  for (const auto& doc : corpus.documents) distinct.insert(doc.mesh_terms.begin(), doc.mesh_terms.end());
  d.statistics = {corpus.documents.size(), distinct.size(), graph.term_count(), graph.edge_count()};
  return d;
}

double cdr(const Cluster& cluster) {
  if (cluster.centrality == 0.0) throw CdrUndefinedError(cluster.id);
  return cluster.centrality / cluster.density;
}

std::string_view to_string(RatioKind k) noexcept { return k == RatioKind::SIR ? "SIR" : "STR"; }

RatioReport ratio(const Cluster& a, const Cluster& b, RatioKind kind) {
  RatioReport r;
  r.cluster_a = a.id;
  r.cluster_b = b.id;
  r.cdr_a = cdr(a);
  r.cdr_b = cdr(b);
  r.ratio = r.cdr_a / r.cdr_b;
  r.kind = kind;
  return r;
}

const Cluster* locate_term(const StrategicalDiagram& diagram, std::string_view descriptor) {
  for (const auto& c : diagram.clusters) {
    if (c.contains(descriptor)) return &c;
  }
  return nullptr;
}

FlagSet cluster_flags(const StrategicalDiagram& diagram, const Cluster& cluster,
                      const std::set<std::string>& highlight) {
  FlagSet f;
  if (diagram.below_medians(cluster)) f.set(Flag::BelowMedians);
  if (cluster.centrality == 0.0) f.set(Flag::NoCdr);
  for (const auto& h : highlight) {
    if (cluster.contains(h)) {
      f.set(Flag::Highlight);
      break;
    }
  }
  return f;
}

std::vector<Suggestion> suggest_intermediates(const StrategicalDiagram& diagram, int source_cluster,
                                              const SuggestOptions& options) {
  const Cluster* source = diagram.find_cluster(source_cluster);
  if (source == nullptr) {
    throw Error(Errc::InvalidArgument, fmt::format("no cluster with id {}", source_cluster));
  }
  if (diagram.clusters.size() == 1) return {};
  const double source_cdr = cdr(*source);

  std::vector<Suggestion> ranked, undefined;
  for (const auto& c : diagram.clusters) {
    if (c.id == source->id) continue;
    Suggestion s;
    s.cluster_id = c.id;
    if (diagram.below_medians(c)) s.flags.set(Flag::BelowMedians);
    for (const auto& h : options.highlight) {
      if (c.contains(h)) {
        s.flags.set(Flag::Highlight);
        break;
      }
    }
    if (c.centrality == 0.0) {
      s.flags.set(Flag::NoCdr);
      undefined.push_back(s);
      continue;
    }
    s.sir = source_cdr / cdr(c);
    if (options.band.contains(*s.sir)) s.flags.set(Flag::SirNearOne);
    s.score = std::abs(std::log(*s.sir)) - options.flag_bonus * s.flags.screening_count();
    ranked.push_back(s);
  }
  std::sort(ranked.begin(), ranked.end(), [](const Suggestion& x, const Suggestion& y) {
    if (*x.score != *y.score) return *x.score < *y.score;
    return x.cluster_id < y.cluster_id;
  });
  std::sort(undefined.begin(), undefined.end(),
            [](const Suggestion& x, const Suggestion& y) { return x.cluster_id < y.cluster_id; });
  ranked.insert(ranked.end(), undefined.begin(), undefined.end());
  return ranked;
}

ExportFormat parse_export_format(std::string_view name) {
  if (name == "table" || name == "tsv" || name == "canonical-table") return ExportFormat::CanonicalTable;
  if (name == "json" || name == "structured-document") return ExportFormat::StructuredDocument;
  if (name == "svg" || name == "vector-image") return ExportFormat::VectorImage;
  throw Error(Errc::UnknownFormat, fmt::format("unknown export format '{}'", name));
}

std::string export_diagram(const StrategicalDiagram& diagram, ExportFormat format,
                           const ExportOptions& options) {
  switch (format) {
    case ExportFormat::CanonicalTable: return render_table(diagram);
    case ExportFormat::StructuredDocument: return diagram_to_json(diagram, options).dump(2) + "\n";
    case ExportFormat::VectorImage: return render_svg(diagram, options);
  }
  throw Error(Errc::UnknownFormat, "unknown export format");
}

std::string export_diagram(const StrategicalDiagram& diagram, std::string_view format,
                           const ExportOptions& options) {
  return export_diagram(diagram, parse_export_format(format), options);
}

StrategicalDiagram import_diagram(std::string_view json) {
  Json doc;
  try {
    doc = Json::parse(json);
  } catch (const Json::exception& e) {
    throw Error(Errc::InvalidArgument, fmt::format("diagram document is not valid JSON: {}", e.what()));
  }
  return diagram_from_json(doc);
}

std::string summary_line(const StrategicalDiagram& diagram) {
  return fmt::format("documents={} terms={} clusters={}", diagram.statistics.documents,
                     diagram.statistics.terms, diagram.clusters.size());
}

}  // namespace mlink
