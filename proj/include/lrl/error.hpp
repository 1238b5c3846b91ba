#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace lrl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data violates a format or invariant (bad rows, empty files, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Invalid options, specs or run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// An inference backend call failed. `transient()` errors are retried by the
/// harness; everything else is surfaced immediately.
class BackendError : public Error {
 public:
  BackendError(const std::string& what, std::string request_id, bool transient)
      : Error(what + (request_id.empty() ? "" : " [request " + request_id + "]")),
        request_id_(std::move(request_id)),
        transient_(transient) {}

  const std::string& request_id() const noexcept { return request_id_; }
  bool transient() const noexcept { return transient_; }

 private:
  std::string request_id_;
  bool transient_;
};

/// Transport-level failure: nothing answered at the configured endpoint.
class BackendUnreachable : public BackendError {
 public:
  BackendUnreachable(const std::string& what, std::string request_id)
      : BackendError(what, std::move(request_id), true) {}
};

/// Retrieval pool and evaluation split share example ids.
class LeakageError : public Error {
 public:
  using Error::Error;
};

}  // namespace lrl
