#include "options.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "mlink/error.hpp"
#include "text_util.hpp"

namespace mlink::detail {

namespace {

std::set<std::string> split_lines(std::string_view value) {
  std::set<std::string> out;
  while (!value.empty()) {
    auto nl = value.find('\n');
    auto item = trim(value.substr(0, nl));
    if (!item.empty() && item.front() != '#') out.emplace(item);
    if (nl == std::string_view::npos) break;
    value.remove_prefix(nl + 1);
  }
  return out;
}

}  // namespace

double parse_double(std::string_view key, std::string_view value) {
  auto v = trim(value);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty() || !std::isfinite(out)) {
    throw Error(Errc::InvalidArgument, fmt::format("--{}: '{}' is not a number", key, value));
  }
  return out;
}

long long parse_integer(std::string_view key, std::string_view value) {
  auto v = trim(value);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size() || v.empty()) {
    throw Error(Errc::InvalidArgument, fmt::format("--{}: '{}' is not an integer", key, value));
  }
  return out;
}

bool apply_option(Options& opts, std::string_view key, std::string_view value) {
  auto& analysis = opts.session.analysis;
  if (key == "threshold") {
    const double t = parse_double(key, value);
    if (!(t > 0.0 && t <= 1.0)) {
      throw Error(Errc::InvalidArgument, fmt::format("--threshold must lie in (0, 1], got {}", value));
    }
    analysis.graph.threshold = t;
  } else if (key == "min_doc_freq") {
    const auto n = parse_integer(key, value);
    if (n < 1) throw Error(Errc::InvalidArgument, "--min-doc-freq must be at least 1");
    analysis.graph.min_doc_freq = static_cast<std::uint32_t>(n);
  } else if (key == "min_cluster" || key == "max_cluster") {
    const auto n = parse_integer(key, value);
    if (n < 2 || n > 1000) {
      throw Error(Errc::InvalidArgument, fmt::format("--{} must lie in [2, 1000]", key));
    }
    (key == "min_cluster" ? analysis.cluster.min_size : analysis.cluster.max_size) =
        static_cast<std::size_t>(n);
  } else if (key == "attachment") {
    if (value == "max") analysis.cluster.attachment = Attachment::MaxLink;
    else if (value == "sum") analysis.cluster.attachment = Attachment::SumLink;
    else throw Error(Errc::InvalidArgument, fmt::format("--attachment must be max or sum, got '{}'", value));
  } else if (key == "band_low" || key == "band_high") {
    const double b = parse_double(key, value);
    if (!(b > 0.0)) throw Error(Errc::InvalidArgument, fmt::format("--{} must be positive", key));
    (key == "band_low" ? opts.session.band.low : opts.session.band.high) = b;
    opts.suggest.band = opts.session.band;
  } else if (key == "strict_titles") {
    if (value == "true" || value == "1") opts.session.strict_titles = true;
    else if (value == "false" || value == "0") opts.session.strict_titles = false;
    else throw Error(Errc::InvalidArgument, "--strict-titles must be true or false");
  } else if (key == "stoplist") {
    analysis.graph.stoplist = split_lines(value);
  } else if (key == "highlight") {
    opts.suggest.highlight = split_lines(value);
  } else {
    return false;
  }
  return true;
}

void validate(const Options& opts) {
  mlink::validate(opts.session.analysis.cluster);
  if (opts.session.band.low > opts.session.band.high) {
    throw Error(Errc::InvalidArgument,
                fmt::format("ratio band is inverted: {} > {}", opts.session.band.low,
                            opts.session.band.high));
  }
}

}  // namespace mlink::detail
