#include "prismmap/backends.hpp"

#include <algorithm>
#include <cstdlib>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "prismmap/error.hpp"
#include "prismmap/hash.hpp"

namespace prismmap {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

FaceImage FaceImage::from_image(Image pixels, ImageFormat format, int jpeg_quality) {
  FaceImage face;
  face.encoded_ = encode_image(pixels, format, jpeg_quality);
  face.pixels_ = std::move(pixels);
  face.format_ = format;
  face.sha256_ = sha256_hex(face.encoded_);
  return face;
}

FaceImage FaceImage::from_encoded(std::vector<std::uint8_t> encoded) {
  FaceImage face;
  face.pixels_ = decode_image(encoded);
  face.format_ = (encoded.size() > 1 && encoded[0] == 0xFF) ? ImageFormat::kJpeg : ImageFormat::kPng;
  face.sha256_ = sha256_hex(encoded);
  face.encoded_ = std::move(encoded);
  return face;
}

std::string dump_to_json_text(const LabelDump& dump) {
  ordered_json j;
  j["image"] = dump.image;
  j["backend"] = dump.backend;
  j["labels"] = ordered_json::array();
  for (const auto& obs : dump.labels) {
    ordered_json entry;
    entry["label"] = obs.label();
    entry["confidence"] = obs.confidence();
    j["labels"].push_back(std::move(entry));
  }
  return j.dump(2) + "\n";
}

namespace {

LabelDump dump_from_json(const nlohmann::json& j) {
  LabelDump dump;
  dump.image = j.at("image").get<std::string>();
  dump.backend = j.at("backend").get<std::string>();
  for (const auto& entry : j.at("labels")) {
    dump.labels.emplace_back(entry.at("label").get<std::string>(), entry.at("confidence").get<double>());
  }
  return dump;
}

}  // namespace

std::vector<LabelDump> parse_label_dumps(const std::string& text) {
  std::vector<LabelDump> out;
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.is_array()) {
      for (const auto& item : j) out.push_back(dump_from_json(item));
    } else {
      out.push_back(dump_from_json(j));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("malformed label dump: {}", e.what()));
  }
  return out;
}

std::vector<LabelObservation> obtain_labels(const FaceImage& face, LabelBackend& backend) {
  return backend.obtain_labels(face).labels;
}

ReplayBackend::ReplayBackend(std::vector<LabelDump> dumps) {
  for (auto& d : dumps) {
    const std::string key = d.image;
    by_hash_.insert_or_assign(key, std::move(d));
  }
}

ReplayBackend::ReplayBackend(const ReplayOptions& options) {
  std::vector<fs::path> files;
  if (fs::is_directory(options.path)) {
    for (const auto& entry : fs::directory_iterator(options.path)) {
      if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
  } else if (fs::is_regular_file(options.path)) {
    files.push_back(options.path);
  } else {
    throw Error(ErrorKind::kBackendConfig,
                fmt::format("replay source '{}' does not exist", options.path.string()));
  }
  for (const auto& file : files) {
    const auto bytes = read_file(file);
    for (auto& d : parse_label_dumps(std::string(bytes.begin(), bytes.end()))) {
      const std::string key = d.image;
      by_hash_.insert_or_assign(key, std::move(d));
    }
  }
}

LabelDump ReplayBackend::obtain_labels(const FaceImage& face) {
  const auto it = by_hash_.find(face.sha256());
  if (it == by_hash_.end()) {
    throw Error(ErrorKind::kReplayMissing,
                fmt::format("replay backend has no labels for image {}", face.sha256()));
  }
  return it->second;
}

RemoteOptions remote_options_from_environment(RemoteOptions options) {
  if (options.endpoint.empty()) {
    if (const char* url = std::getenv("PRISMMAP_BACKEND_URL")) options.endpoint = url;
  }
  if (options.api_key.empty()) {
    if (const char* key = std::getenv("PRISMMAP_BACKEND_KEY")) options.api_key = key;
  }
  return options;
}

std::unique_ptr<LabelBackend> make_backend(const BackendDescriptor& descriptor) {
  struct Visitor {
    std::unique_ptr<LabelBackend> operator()(const StubOptions& o) const {
      return std::make_unique<StubBackend>(o);
    }
    std::unique_ptr<LabelBackend> operator()(const ReplayOptions& o) const {
      return std::make_unique<ReplayBackend>(o);
    }
    std::unique_ptr<LabelBackend> operator()(const RemoteOptions& o) const {
      // Validate configuration before building any network machinery.
      if (o.api_key.empty()) {
        throw Error(ErrorKind::kBackendConfig, "remote backend requires PRISMMAP_BACKEND_KEY");
      }
      if (o.endpoint.empty()) {
        throw Error(ErrorKind::kBackendConfig, "remote backend requires PRISMMAP_BACKEND_URL");
      }
      return std::make_unique<RemoteBackend>(o, make_http_transport(o.timeout));
    }
  };
  return std::visit(Visitor{}, descriptor);
}

}  // namespace prismmap
