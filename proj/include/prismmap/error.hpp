#pragma once

#include <stdexcept>
#include <string>

namespace prismmap {

enum class ErrorKind {
  kInvalidPolygon,
  kInvalidFov,
  kInvalidArgument,
  kAspectRatio,
  kUndecodableImage,
  kIo,
  kBackendConfig,
  kBackendTransport,
  kBackendAuth,
  kBackendQuota,
  kReplayMissing,
  kInconsistency,
};

const char* to_string(ErrorKind kind);

// Single exception type for the library; the kind drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Maps an error kind onto the process exit code used by the CLI:
/// 1 I/O, 2 validation, 3 backend, 4 evaluation inconsistency.
int exit_code_for(ErrorKind kind);

}  // namespace prismmap
