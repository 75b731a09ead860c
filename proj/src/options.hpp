#pragma once

#include <string_view>

#include "mlink/diagram.hpp"
#include "mlink/discovery.hpp"

namespace mlink::detail {

/// User-facing option surface shared by the C API and the HTTP service.
struct Options {
  SessionConfig session;  ///< analysis params, ratio band, strict titles
  SuggestOptions suggest;
};

/// Applies one `key=value` option. Keys: threshold, min_doc_freq,
/// min_cluster, max_cluster, attachment (max|sum), band_low, band_high,
/// strict_titles (true|false), stoplist (newline-separated descriptors),
/// highlight (newline-separated descriptors).
/// Returns false for an unknown key; throws Error(InvalidArgument) for a
/// malformed or out-of-range value.
bool apply_option(Options& opts, std::string_view key, std::string_view value);

/// Cross-field checks (cluster bounds, band ordering).
void validate(const Options& opts);

double parse_double(std::string_view key, std::string_view value);
long long parse_integer(std::string_view key, std::string_view value);

}  // namespace mlink::detail
