#include "mlink/error.hpp"

namespace mlink {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Io: return "IoError";
    case Errc::EmptyHeading: return "EmptyHeading";
    case Errc::EmptyCorpus: return "EmptyCorpus";
    case Errc::Domain: return "DomainError";
    case Errc::NoClusters: return "NoClusters";
    case Errc::CdrUndefined: return "CdrUndefined";
    case Errc::UnknownFormat: return "UnknownFormat";
    case Errc::UnknownTerm: return "UnknownTerm";
    case Errc::InvalidIntermediate: return "InvalidIntermediate";
    case Errc::UnknownIntermediate: return "UnknownIntermediate";
    case Errc::SourceTermAbsent: return "SourceTermAbsent";
    case Errc::CorpusMismatch: return "CorpusMismatch";
    case Errc::CorruptSession: return "CorruptSession";
    case Errc::Network: return "NetworkError";
    case Errc::Service: return "ServiceError";
    case Errc::Quota: return "QuotaError";
  }
  return "Unknown";
}

CdrUndefinedError::CdrUndefinedError(int cluster_id)
    : Error(Errc::CdrUndefined,
            "cdr undefined for cluster " + std::to_string(cluster_id) +
                " (centrality is 0)"),
      cluster_id_(cluster_id) {}

}  // namespace mlink
