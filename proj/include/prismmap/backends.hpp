#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "prismmap/image.hpp"
#include "prismmap/labels.hpp"

namespace prismmap {

// A face as handed to a labeling backend: decoded pixels for local
// detectors, encoded bytes for uploads, and the SHA-256 of those bytes as
// the cache/replay key.
class FaceImage {
 public:
  static FaceImage from_image(Image pixels, ImageFormat format, int jpeg_quality = 90);
  static FaceImage from_encoded(std::vector<std::uint8_t> encoded);

  const Image& pixels() const { return pixels_; }
  std::span<const std::uint8_t> encoded() const { return encoded_; }
  ImageFormat format() const { return format_; }
  const std::string& sha256() const { return sha256_; }

 private:
  Image pixels_;
  std::vector<std::uint8_t> encoded_;
  ImageFormat format_ = ImageFormat::kPng;
  std::string sha256_;
};

// One backend answer for one image; the unit of the label dump format.
struct LabelDump {
  std::string image;    // SHA-256 of the encoded face bytes
  std::string backend;  // backend name that produced the labels
  std::vector<LabelObservation> labels;
};

/// {"image": ..., "backend": ..., "labels": [{"label": ..., "confidence": ...}]}
/// pretty-printed with a trailing newline.
std::string dump_to_json_text(const LabelDump& dump);

/// Accepts a single dump object or an array of them.
std::vector<LabelDump> parse_label_dumps(const std::string& text);

class LabelBackend {
 public:
  virtual ~LabelBackend() = default;
  virtual std::string name() const = 0;
  /// Must be safe to call concurrently.
  virtual LabelDump obtain_labels(const FaceImage& face) = 0;
};

/// Convenience wrapper returning only the observations.
std::vector<LabelObservation> obtain_labels(const FaceImage& face, LabelBackend& backend);

// ---- stub: deterministic colour-fiducial detector ----

enum class FiducialColor { kRed, kGreen, kBlue };

const char* to_string(FiducialColor color);
/// "fiducial-red", "fiducial-green", "fiducial-blue".
std::string fiducial_label(FiducialColor color);

struct StubOptions {
  // Detections need at least this fraction of the 16x16 template matched.
  double min_match = 0.98;
  // Confidence reported for a fully matched template; scaled by the match.
  double full_match_confidence = 0.95;
  // Smallest bounding-box side (px) considered a candidate.
  int min_side = 16;
};

struct FiducialDetection {
  FiducialColor color;
  double match;  // matched cells / 256
  int x, y, width, height;
};

/// All candidate blobs with their template match (including those below
/// min_match), for diagnostics and tests.
std::vector<FiducialDetection> find_fiducial_candidates(const Image& image, const StubOptions& options = {});

class StubBackend : public LabelBackend {
 public:
  explicit StubBackend(StubOptions options = {}) : options_(options) {}
  std::string name() const override { return "stub"; }
  LabelDump obtain_labels(const FaceImage& face) override;

 private:
  StubOptions options_;
};

// ---- replay: labels looked up by face hash from recorded dumps ----

struct ReplayOptions {
  // A dump file (object or array) or a directory of *.json dump files.
  std::filesystem::path path;
};

class ReplayBackend : public LabelBackend {
 public:
  explicit ReplayBackend(const ReplayOptions& options);
  explicit ReplayBackend(std::vector<LabelDump> dumps);

  std::string name() const override { return "replay"; }
  /// Returns the recorded dump unchanged (including its backend name).
  /// Throws kReplayMissing naming the hash when absent.
  LabelDump obtain_labels(const FaceImage& face) override;
  std::size_t size() const { return by_hash_.size(); }

 private:
  std::map<std::string, LabelDump> by_hash_;
};

// ---- remote: HTTP cognition services ----

struct HttpRequest {
  std::string url;
  std::multimap<std::string, std::string> headers;
  std::string body;
  std::string content_type;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  /// Throws std::runtime_error on connection-level failures.
  virtual HttpResponse post(const HttpRequest& request) = 0;
};

/// cpp-httplib backed transport (http, and https when built with OpenSSL).
std::shared_ptr<HttpTransport> make_http_transport(std::chrono::milliseconds timeout);

// Translates between face bytes and one provider's wire format.
class ProviderAdapter {
 public:
  virtual ~ProviderAdapter() = default;
  virtual std::string name() const = 0;
  virtual HttpRequest build_request(const std::string& endpoint, const std::string& api_key,
                                    const FaceImage& face) const = 0;
  virtual std::vector<LabelObservation> parse_response(const std::string& body) const = 0;
};

/// "generic", "google" or "azure"; throws kBackendConfig otherwise.
std::unique_ptr<ProviderAdapter> make_provider_adapter(const std::string& provider);

struct RemoteOptions {
  std::string endpoint;
  std::string api_key;
  std::string provider = "generic";
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  // Requests per second across all threads; 0 disables limiting.
  double rate_limit = 0.0;
  std::chrono::milliseconds timeout{30000};
};

// Minimum-interval limiter shared by every caller of one backend.
class RateLimiter {
 public:
  using Clock = std::chrono::steady_clock;
  using Sleeper = std::function<void(std::chrono::nanoseconds)>;

  RateLimiter(double per_second, Sleeper sleeper);
  void acquire();

 private:
  std::chrono::nanoseconds interval_;
  Sleeper sleeper_;
  std::mutex mutex_;
  Clock::time_point next_slot_{};
};

class RemoteBackend : public LabelBackend {
 public:
  using Sleeper = std::function<void(std::chrono::nanoseconds)>;

  /// Throws kBackendConfig when the endpoint or key is missing, before any
  /// request is made.
  RemoteBackend(RemoteOptions options, std::shared_ptr<HttpTransport> transport,
                Sleeper sleeper = nullptr);

  std::string name() const override;
  LabelDump obtain_labels(const FaceImage& face) override;

  /// Delay before retry number `attempt` (1-based).
  std::chrono::milliseconds backoff_delay(int attempt) const;

 private:
  RemoteOptions options_;
  std::shared_ptr<HttpTransport> transport_;
  std::unique_ptr<ProviderAdapter> adapter_;
  Sleeper sleeper_;
  RateLimiter limiter_;
};

// Exactly one kind's parameters, selected by the variant alternative.
using BackendDescriptor = std::variant<StubOptions, ReplayOptions, RemoteOptions>;

/// Fills endpoint/key from PRISMMAP_BACKEND_URL / PRISMMAP_BACKEND_KEY
/// when they are empty in `options`.
RemoteOptions remote_options_from_environment(RemoteOptions options);

std::unique_ptr<LabelBackend> make_backend(const BackendDescriptor& descriptor);

}  // namespace prismmap
