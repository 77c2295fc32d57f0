#include <algorithm>
#include <stdexcept>
#include <thread>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <openssl/evp.h>

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include "prismmap/backends.hpp"
#include "prismmap/error.hpp"

namespace prismmap {

namespace {

using nlohmann::json;

std::string base64(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int written = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                      static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(written));
  return out;
}

const char* mime_type(ImageFormat format) {
  return format == ImageFormat::kPng ? "image/png" : "image/jpeg";
}

json parse_body(const std::string& body) {
  try {
    return json::parse(body);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::kBackendTransport, fmt::format("response is not JSON: {}", e.what()));
  }
}

// Raw image POST, bearer token, {"labels": [{"label", "confidence"}]}.
class GenericAdapter : public ProviderAdapter {
 public:
  std::string name() const override { return "generic"; }

  HttpRequest build_request(const std::string& endpoint, const std::string& api_key,
                            const FaceImage& face) const override {
    HttpRequest req;
    req.url = endpoint;
    req.headers.emplace("Authorization", "Bearer " + api_key);
    req.body.assign(face.encoded().begin(), face.encoded().end());
    req.content_type = mime_type(face.format());
    return req;
  }

  std::vector<LabelObservation> parse_response(const std::string& body) const override {
    const json j = parse_body(body);
    std::vector<LabelObservation> out;
    for (const auto& e : j.at("labels")) {
      out.emplace_back(e.at("label").get<std::string>(), e.at("confidence").get<double>());
    }
    return out;
  }
};

// Google Cloud Vision images:annotate with LABEL_DETECTION.
class GoogleVisionAdapter : public ProviderAdapter {
 public:
  std::string name() const override { return "google"; }

  HttpRequest build_request(const std::string& endpoint, const std::string& api_key,
                            const FaceImage& face) const override {
    json body = {{"requests",
                  {{{"image", {{"content", base64(face.encoded())}}},
                    {"features", {{{"type", "LABEL_DETECTION"}, {"maxResults", 50}}}}}}}};
    HttpRequest req;
    req.url = endpoint + (endpoint.find('?') == std::string::npos ? "?" : "&") + "key=" + api_key;
    req.body = body.dump();
    req.content_type = "application/json";
    return req;
  }

  std::vector<LabelObservation> parse_response(const std::string& body) const override {
    const json j = parse_body(body);
    const auto& first = j.at("responses").at(0);
    if (first.contains("error")) {
      throw Error(ErrorKind::kBackendTransport, fmt::format("provider error: {}", first["error"].dump()));
    }
    std::vector<LabelObservation> out;
    if (!first.contains("labelAnnotations")) return out;
    for (const auto& e : first.at("labelAnnotations")) {
      out.emplace_back(e.at("description").get<std::string>(), e.at("score").get<double>());
    }
    return out;
  }
};

// Azure Computer Vision analyze (visualFeatures=Tags).
class AzureVisionAdapter : public ProviderAdapter {
 public:
  std::string name() const override { return "azure"; }

  HttpRequest build_request(const std::string& endpoint, const std::string& api_key,
                            const FaceImage& face) const override {
    HttpRequest req;
    req.url = endpoint;
    req.headers.emplace("Ocp-Apim-Subscription-Key", api_key);
    req.body.assign(face.encoded().begin(), face.encoded().end());
    req.content_type = "application/octet-stream";
    return req;
  }

  std::vector<LabelObservation> parse_response(const std::string& body) const override {
    const json j = parse_body(body);
    std::vector<LabelObservation> out;
    for (const auto& e : j.at("tags")) {
      out.emplace_back(e.at("name").get<std::string>(), e.at("confidence").get<double>());
    }
    return out;
  }
};

class HttplibTransport : public HttpTransport {
 public:
  explicit HttplibTransport(std::chrono::milliseconds timeout) : timeout_(timeout) {}

  HttpResponse post(const HttpRequest& request) override {
    const auto scheme_end = request.url.find("://");
    if (scheme_end == std::string::npos) {
      throw std::runtime_error(fmt::format("malformed URL '{}'", request.url));
    }
    const auto path_start = request.url.find('/', scheme_end + 3);
    const std::string origin = request.url.substr(0, path_start);
    const std::string path = path_start == std::string::npos ? "/" : request.url.substr(path_start);

    httplib::Client client(origin);
    const auto seconds = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto micros = std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - seconds);
    client.set_connection_timeout(seconds.count(), micros.count());
    client.set_read_timeout(seconds.count(), micros.count());
    client.set_write_timeout(seconds.count(), micros.count());
    httplib::Headers headers(request.headers.begin(), request.headers.end());
    auto result = client.Post(path, headers, request.body, request.content_type);
    if (!result) {
      throw std::runtime_error(fmt::format("{} ({})", httplib::to_string(result.error()), origin));
    }
    return {result->status, result->body};
  }

 private:
  std::chrono::milliseconds timeout_;
};

void real_sleep(std::chrono::nanoseconds d) {
  if (d.count() > 0) std::this_thread::sleep_for(d);
}

}  // namespace

std::shared_ptr<HttpTransport> make_http_transport(std::chrono::milliseconds timeout) {
  return std::make_shared<HttplibTransport>(timeout);
}

std::unique_ptr<ProviderAdapter> make_provider_adapter(const std::string& provider) {
  if (provider == "generic") return std::make_unique<GenericAdapter>();
  if (provider == "google") return std::make_unique<GoogleVisionAdapter>();
  if (provider == "azure") return std::make_unique<AzureVisionAdapter>();
  throw Error(ErrorKind::kBackendConfig,
              fmt::format("unknown provider '{}' (expected generic, google or azure)", provider));
}

RateLimiter::RateLimiter(double per_second, Sleeper sleeper)
    : interval_(per_second > 0.0 ? std::chrono::nanoseconds(static_cast<std::int64_t>(1e9 / per_second))
                                 : std::chrono::nanoseconds(0)),
      sleeper_(std::move(sleeper)) {}

void RateLimiter::acquire() {
  if (interval_.count() == 0) return;
  std::chrono::nanoseconds wait{0};
  {
    std::lock_guard lock(mutex_);
    const auto now = Clock::now();
    const auto slot = std::max(now, next_slot_);
    wait = slot - now;
    next_slot_ = slot + interval_;
  }
  sleeper_(wait);
}

RemoteBackend::RemoteBackend(RemoteOptions options, std::shared_ptr<HttpTransport> transport,
                             Sleeper sleeper)
    : options_(std::move(options)),
      transport_(std::move(transport)),
      adapter_(make_provider_adapter(options_.provider)),
      sleeper_(sleeper ? std::move(sleeper) : Sleeper(real_sleep)),
      limiter_(options_.rate_limit, sleeper_) {
  if (options_.api_key.empty()) {
    throw Error(ErrorKind::kBackendConfig, "remote backend requires PRISMMAP_BACKEND_KEY");
  }
  if (options_.endpoint.empty()) {
    throw Error(ErrorKind::kBackendConfig, "remote backend requires PRISMMAP_BACKEND_URL");
  }
  if (options_.max_retries < 0) {
    throw Error(ErrorKind::kBackendConfig, "max_retries must be non-negative");
  }
}

std::string RemoteBackend::name() const { return "remote:" + adapter_->name(); }

std::chrono::milliseconds RemoteBackend::backoff_delay(int attempt) const {
  auto delay = options_.initial_backoff;
  for (int i = 1; i < attempt && delay < options_.max_backoff; ++i) delay *= 2;
  return std::min(delay, options_.max_backoff);
}

LabelDump RemoteBackend::obtain_labels(const FaceImage& face) {
  const HttpRequest request = adapter_->build_request(options_.endpoint, options_.api_key, face);
  const std::string identity = fmt::format("{} at {}", name(), options_.endpoint);
  ErrorKind last_kind = ErrorKind::kBackendTransport;
  std::string last_message;
  const int attempts = options_.max_retries + 1;
  for (int attempt = 0; attempt < attempts; ++attempt) {
    if (attempt > 0) sleeper_(backoff_delay(attempt));
    limiter_.acquire();
    HttpResponse response;
    try {
      response = transport_->post(request);
    } catch (const std::runtime_error& e) {
      last_kind = ErrorKind::kBackendTransport;
      last_message = e.what();
      continue;
    }
    if (response.status >= 200 && response.status < 300) {
      try {
        return {face.sha256(), name(), adapter_->parse_response(response.body)};
      } catch (const Error& e) {
        throw Error(ErrorKind::kBackendTransport, fmt::format("{}: {}", identity, e.what()));
      } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::kBackendTransport,
                    fmt::format("{}: unexpected response shape: {}", identity, e.what()));
      }
    }
    if (response.status == 401 || response.status == 403) {
      throw Error(ErrorKind::kBackendAuth,
                  fmt::format("{}: authentication rejected (HTTP {})", identity, response.status));
    }
    if (response.status == 429) {
      last_kind = ErrorKind::kBackendQuota;
      last_message = "HTTP 429 rate limit / quota exceeded";
      continue;
    }
    if (response.status >= 500) {
      last_kind = ErrorKind::kBackendTransport;
      last_message = fmt::format("HTTP {}", response.status);
      continue;
    }
    throw Error(ErrorKind::kBackendTransport,
                fmt::format("{}: request rejected (HTTP {})", identity, response.status));
  }
  throw Error(last_kind, fmt::format("{}: giving up after {} attempts: {}", identity, attempts, last_message));
}

}  // namespace prismmap
