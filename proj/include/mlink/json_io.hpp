#pragma once

#include <vector>

#include <json.hpp>

#include "mlink/diagram.hpp"
#include "mlink/discovery.hpp"

namespace mlink {

/// Insertion-ordered JSON keeps the field order of every document stable.
using Json = nlohmann::ordered_json;

inline constexpr int kDiagramSchemaVersion = 1;
inline constexpr int kSessionFormatVersion = 1;
inline constexpr int kApiSchemaVersion = 1;

Json diagram_to_json(const StrategicalDiagram& diagram, const ExportOptions& options = {});
StrategicalDiagram diagram_from_json(const Json& doc);

Json suggestions_to_json(const std::vector<Suggestion>& suggestions,
                         const StrategicalDiagram& diagram);
Json targets_to_json(const std::vector<TargetCandidate>& targets);

Json session_to_json(const DiscoverySession& session);
DiscoverySession session_from_json(const Json& doc);

Json params_to_json(const AnalysisParams& params);
AnalysisParams params_from_json(const Json& doc);

}  // namespace mlink
