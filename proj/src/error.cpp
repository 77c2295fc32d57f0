#include "prismmap/error.hpp"

namespace prismmap {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidPolygon: return "invalid-polygon";
    case ErrorKind::kInvalidFov: return "invalid-fov";
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kAspectRatio: return "aspect-ratio";
    case ErrorKind::kUndecodableImage: return "undecodable-image";
    case ErrorKind::kIo: return "io";
    case ErrorKind::kBackendConfig: return "backend-config";
    case ErrorKind::kBackendTransport: return "backend-transport";
    case ErrorKind::kBackendAuth: return "backend-auth";
    case ErrorKind::kBackendQuota: return "backend-quota";
    case ErrorKind::kReplayMissing: return "replay-missing";
    case ErrorKind::kInconsistency: return "inconsistency";
  }
  return "unknown";
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kIo:
      return 1;
    case ErrorKind::kInvalidPolygon:
    case ErrorKind::kInvalidFov:
    case ErrorKind::kInvalidArgument:
    case ErrorKind::kAspectRatio:
    case ErrorKind::kUndecodableImage:
      return 2;
    case ErrorKind::kBackendConfig:
    case ErrorKind::kBackendTransport:
    case ErrorKind::kBackendAuth:
    case ErrorKind::kBackendQuota:
    case ErrorKind::kReplayMissing:
      return 3;
    case ErrorKind::kInconsistency:
      return 4;
  }
  return 1;
}

}  // namespace prismmap
