#include "mlink/medline.hpp"

#include <zlib.h>

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <sstream>
#include <unordered_set>

#include <fmt/format.h>

#include "mlink/error.hpp"
#include "text_util.hpp"

namespace mlink {

namespace {

constexpr std::size_t kMaxReportedLines = 100;

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

// `TAG - value` with TAG left-justified in four columns.
bool split_tag_line(std::string_view line, std::string_view& tag, std::string_view& value) {
  if (line.size() < 5 || line[4] != '-') return false;
  if (line.size() > 5 && line[5] != ' ') return false;
  tag = detail::trim(line.substr(0, 4));
  if (tag.empty() || line[0] == ' ') return false;
  for (char c : tag) {
    if (!std::isalnum(static_cast<unsigned char>(c))) return false;
  }
  value = line.size() > 5 ? detail::trim(line.substr(5)) : std::string_view{};
  return true;
}

struct PendingRecord {
  std::string pmid;
  std::string title;
  std::vector<std::string> headings;
  std::string* current = nullptr;
  bool has_content = false;
  bool has_title = false;
  std::string ignored;  // sink for fields we do not keep

  void reset() { *this = PendingRecord{}; }
};

void flush(PendingRecord& rec, ParseResult& out) {
  if (!rec.has_content) return;
  if (rec.pmid.empty()) {
    ++out.report.records_without_pmid;
    rec.reset();
    return;
  }
  Document doc;
  doc.pmid = std::move(rec.pmid);
  doc.title = std::move(rec.title);
  std::unordered_set<std::string> seen;
  for (const auto& raw : rec.headings) {
    std::string term;
    try {
      term = normalize_mesh_heading(raw);
    } catch (const Error&) {
      ++out.report.empty_headings;
      continue;
    }
    if (seen.insert(term).second) doc.mesh_terms.push_back(std::move(term));
  }
  out.documents.push_back(std::move(doc));
  rec.reset();
}

}  // namespace

std::string normalize_mesh_heading(std::string_view raw) {
  std::string_view s = detail::trim(raw);
  while (!s.empty() && s.front() == '*') s.remove_prefix(1);
  if (auto slash = s.find('/'); slash != std::string_view::npos) s = s.substr(0, slash);
  s = detail::trim(s);
  if (s.empty()) {
    throw Error(Errc::EmptyHeading, fmt::format("empty MeSH heading: '{}'", raw));
  }
  return std::string(s);
}

ParseResult parse_medline(std::string_view input) {
  const std::string text = sanitize_utf8(input);
  ParseResult out;
  PendingRecord rec;
  std::size_t line_no = 0;

  auto malformed = [&](std::size_t n) {
    ++out.report.malformed_lines;
    if (out.report.malformed_line_numbers.size() < kMaxReportedLines) {
      out.report.malformed_line_numbers.push_back(n);
    }
  };

  std::string_view rest = text;
  while (!rest.empty()) {
    auto nl = rest.find('\n');
    std::string_view line = rest.substr(0, nl);
    rest = nl == std::string_view::npos ? std::string_view{} : rest.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    if (is_blank(line)) {
      flush(rec, out);
      continue;
    }
    if (line.front() == ' ' || line.front() == '\t') {
      if (rec.current == nullptr) {
        malformed(line_no);
        continue;
      }
      auto cont = detail::trim(line);
      if (!rec.current->empty()) rec.current->push_back(' ');
      rec.current->append(cont);
      continue;
    }

    std::string_view tag, value;
    if (!split_tag_line(line, tag, value)) {
      malformed(line_no);
      continue;
    }
    if (tag == "PMID") {
      // A second PMID without a separating blank line starts a new record.
      if (!rec.pmid.empty()) flush(rec, out);
      rec.pmid.assign(value);
      rec.current = &rec.pmid;
    } else if (tag == "TI") {
      if (!rec.has_title) {
        rec.title.assign(value);
        rec.has_title = true;
        rec.current = &rec.title;
      } else {
        rec.current = &rec.ignored;
      }
    } else if (tag == "MH") {
      rec.headings.emplace_back(value);
      rec.current = &rec.headings.back();
    } else {
      rec.ignored.clear();
      rec.current = &rec.ignored;
    }
    rec.has_content = true;
  }
  flush(rec, out);
  return out;
}

std::string to_medline(std::span<const Document> documents) {
  std::string out;
  for (const auto& doc : documents) {
    out += fmt::format("PMID- {}\n", doc.pmid);
    if (!doc.title.empty()) out += fmt::format("TI  - {}\n", doc.title);
    for (const auto& term : doc.mesh_terms) out += fmt::format("MH  - {}\n", term);
    out += '\n';
  }
  return out;
}

std::string compute_corpus_id(std::string_view label, std::span<const Document> documents) {
  detail::Fnv1a h;
  h.update(label);
  h.update(std::string_view("\0", 1));
  for (const auto& doc : documents) {
    h.update(doc.pmid);
    h.update(std::string_view("\x1f", 1));
    for (const auto& t : doc.mesh_terms) {
      h.update(t);
      h.update(std::string_view("\x1e", 1));
    }
    h.update(std::string_view("\x1d", 1));
  }
  return fmt::format("{:016x}", h.value());
}

Corpus load_corpus(std::span<const std::string> sources, std::string label,
                   std::optional<Provenance> provenance, ParseReport* report) {
  Corpus corpus;
  corpus.label = std::move(label);
  corpus.provenance = std::move(provenance);
  std::unordered_set<std::string> seen;
  ParseReport total;
  for (const auto& src : sources) {
    auto parsed = parse_medline(src);
    total.records_without_pmid += parsed.report.records_without_pmid;
    total.malformed_lines += parsed.report.malformed_lines;
    total.empty_headings += parsed.report.empty_headings;
    for (auto& doc : parsed.documents) {
      if (seen.insert(doc.pmid).second) corpus.documents.push_back(std::move(doc));
    }
  }
  if (report != nullptr) *report = total;
  if (corpus.documents.empty()) {
    throw Error(Errc::EmptyCorpus,
                fmt::format("corpus '{}' contains no documents", corpus.label));
  }
  corpus.corpus_id = compute_corpus_id(corpus.label, corpus.documents);
  return corpus;
}

std::string gunzip(std::string_view compressed) {
  z_stream zs{};
  // 15 window bits + 32: accept both gzip and zlib headers.
  if (inflateInit2(&zs, 15 + 32) != Z_OK) throw Error(Errc::Io, "inflateInit2 failed");
  zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(compressed.data()));
  zs.avail_in = static_cast<uInt>(compressed.size());
  std::string out;
  char buf[1 << 15];
  int rc = Z_OK;
  while (true) {
    zs.next_out = reinterpret_cast<Bytef*>(buf);
    zs.avail_out = sizeof(buf);
    rc = inflate(&zs, Z_NO_FLUSH);
    out.append(buf, sizeof(buf) - zs.avail_out);
    if (rc == Z_STREAM_END) {
      if (zs.avail_in == 0) break;
      inflateReset(&zs);  // concatenated gzip members
      continue;
    }
    if (rc != Z_OK) break;
    if (zs.avail_in == 0 && zs.avail_out != 0) break;
  }
  inflateEnd(&zs);
  if (rc != Z_STREAM_END) throw Error(Errc::Io, "corrupt or truncated gzip stream");
  return out;
}

std::string read_medline_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::Io, fmt::format("cannot read '{}'", path.string()));
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(Errc::Io, fmt::format("read error on '{}'", path.string()));
  if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1f &&
      static_cast<unsigned char>(bytes[1]) == 0x8b) {
    return gunzip(bytes);
  }
  return bytes;
}

std::string sanitize_utf8(std::string_view in) {
  static constexpr std::string_view kReplacement = "\xEF\xBF\xBD";
  std::string out;
  out.reserve(in.size());
  std::size_t i = 0;
  while (i < in.size()) {
    auto c = static_cast<unsigned char>(in[i]);
    if (c < 0x80) {
      out.push_back(static_cast<char>(c));
      ++i;
      continue;
    }
    std::size_t len = 0;
    std::uint32_t cp = 0;
    if ((c & 0xE0) == 0xC0) {
      len = 2;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      len = 3;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      len = 4;
      cp = c & 0x07;
    }
    bool ok = len != 0 && i + len <= in.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      auto cc = static_cast<unsigned char>(in[i + k]);
      if ((cc & 0xC0) != 0x80) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (ok) {
      // reject overlong encodings, surrogates and out-of-range values
      static constexpr std::uint32_t kMin[] = {0, 0, 0x80, 0x800, 0x10000};
      ok = cp >= kMin[len] && cp <= 0x10FFFF && !(cp >= 0xD800 && cp <= 0xDFFF);
    }
    if (ok) {
      out.append(in.substr(i, len));
      i += len;
    } else {
      out.append(kReplacement);
      ++i;
    }
  }
  return out;
}

}  // namespace mlink
