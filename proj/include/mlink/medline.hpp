#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mlink {

/// One MEDLINE record reduced to what the analysis needs.
struct Document {
  std::string pmid;
  std::string title;
  /// Normalized descriptors, unique, in first-occurrence order.
  std::vector<std::string> mesh_terms;

  bool operator==(const Document&) const = default;
};

/// Where a corpus came from. All fields are caller-supplied.
struct Provenance {
  std::string query;
  std::optional<int> date_from;
  std::optional<int> date_to;
  std::string fetched_at;

  bool operator==(const Provenance&) const = default;
};

struct Corpus {
  /// Content hash of label and documents; stable across runs.
  std::string corpus_id;
  std::string label;
  std::vector<Document> documents;
  std::optional<Provenance> provenance;

  bool operator==(const Corpus&) const = default;
};

struct ParseReport {
  std::size_t records_without_pmid = 0;
  std::size_t malformed_lines = 0;
  std::size_t empty_headings = 0;
  /// 1-based line numbers of skipped lines, capped at 100 entries.
  std::vector<std::size_t> malformed_line_numbers;

  bool empty() const noexcept {
    return records_without_pmid == 0 && malformed_lines == 0 && empty_headings == 0;
  }
  bool operator==(const ParseReport&) const = default;
};

struct ParseResult {
  std::vector<Document> documents;
  ParseReport report;
};

/// Strips a leading major-topic `*`, drops everything from the first `/`,
/// trims whitespace. Throws Error(EmptyHeading) when nothing is left.
std::string normalize_mesh_heading(std::string_view raw);

/// Parses tagged MEDLINE text. Never throws on malformed input; problems are
/// counted in the report.
ParseResult parse_medline(std::string_view text);

/// Writes documents back as MEDLINE text (PMID, TI, MH fields only).
std::string to_medline(std::span<const Document> documents);

/// Merges sources, keeping the first occurrence of each pmid.
/// Throws Error(EmptyCorpus) if nothing survives.
Corpus load_corpus(std::span<const std::string> sources, std::string label,
                   std::optional<Provenance> provenance = std::nullopt,
                   ParseReport* report = nullptr);

/// Reads a file, transparently gunzipping when it starts with the gzip magic.
/// Throws Error(Io) when unreadable.
std::string read_medline_file(const std::filesystem::path& path);

/// Replaces invalid UTF-8 sequences with U+FFFD.
std::string sanitize_utf8(std::string_view bytes);

/// gzip/zlib inflate; throws Error(Io) on corrupt data.
std::string gunzip(std::string_view compressed);

std::string compute_corpus_id(std::string_view label, std::span<const Document> documents);

}  // namespace mlink
