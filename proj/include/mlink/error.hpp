#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mlink {

/// Error categories raised by the engine. The CLI and the C API map these
/// onto exit codes and status values.
enum class Errc {
  InvalidArgument,
  Io,
  EmptyHeading,
  EmptyCorpus,
  Domain,
  NoClusters,
  CdrUndefined,
  UnknownFormat,
  UnknownTerm,
  InvalidIntermediate,
  UnknownIntermediate,
  SourceTermAbsent,
  CorpusMismatch,
  CorruptSession,
  Network,
  Service,
  Quota,
};

std::string_view to_string(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised when a cdr is requested for a cluster whose centrality is zero.
class CdrUndefinedError : public Error {
 public:
  explicit CdrUndefinedError(int cluster_id);

  int cluster_id() const noexcept { return cluster_id_; }

 private:
  int cluster_id_;
};

/// Transport/service failure during a paged E-utilities exchange.
/// `completed` counts the requests that succeeded before the failure.
class FetchError : public Error {
 public:
  FetchError(Errc code, const std::string& message, std::size_t completed)
      : Error(code, message), completed_(completed) {}

  std::size_t completed_requests() const noexcept { return completed_; }

 private:
  std::size_t completed_;
};

}  // namespace mlink
