#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "prismmap/image.hpp"
#include "prismmap/reproject.hpp"

// The four CLI subcommands as callable functions. Each returns the process
// exit code and reports progress to `log`, problems to `err`.
namespace prismmap::cli {

namespace fs = std::filesystem;

struct ManifestFace {
  int index = 0;
  double heading_deg = 0.0;
  std::string file;  // relative to the manifest's directory
};

struct Manifest {
  std::string source_id;
  int n = 0;
  double fov_deg = 0.0;
  int face_size = 0;
  std::string sampling;  // "bilinear", "nearest", or "identity" for the baseline
  std::vector<ManifestFace> faces;

  bool is_baseline() const { return sampling == "identity"; }
};

std::string manifest_to_json_text(const Manifest& manifest);
Manifest load_manifest(const fs::path& path);

/// "<stem>_n<n>_fov<fov>"
std::string map_stem(const std::string& stem, int n, double fov_deg);
/// Manifest file name with the "_n<n>_fov<fov>.manifest.json" tail removed.
std::string sample_id_from_manifest(const fs::path& path);

struct RenderOptions {
  int face_size = 1024;
  Sampling sampling = Sampling::kBilinear;
  ImageFormat format = ImageFormat::kPng;
  int jpeg_quality = 90;
  bool allow_narrow_fov = false;
  bool resample_to_2to1 = false;
  int jobs = 0;
};

struct ConvertOptions {
  fs::path input;
  fs::path out_dir = ".";
  int n = 8;
  double fov_deg = 52.0;
  RenderOptions render;
};

int cmd_convert(const ConvertOptions& options, std::ostream& log, std::ostream& err);

struct SweepOptions {
  fs::path input;  // a photosphere or a directory of them
  fs::path out_dir = ".";
  // (n, fov) pairs; empty means the 11 default configurations.
  std::vector<std::pair<int, double>> configs;
  RenderOptions render;
  bool skip_existing = false;
  bool include_baseline = false;
};

struct SweepSummary {
  int maps_rendered = 0;
  int maps_skipped = 0;
  int files_failed = 0;
};

int cmd_sweep(const SweepOptions& options, std::ostream& log, std::ostream& err,
              SweepSummary* summary = nullptr);

struct LabelsOptions {
  std::vector<fs::path> manifests;  // files, or directories searched for *.manifest.json
  fs::path out_dir = "labels";
  std::string backend = "stub";  // stub | replay | remote
  fs::path replay;
  std::string provider = "generic";
  double rate_limit = 0.0;
  int max_retries = 3;
  int jobs = 0;
};

struct LabelsSummary {
  int labeled = 0;
  int skipped = 0;
  int failed = 0;
};

int cmd_labels(const LabelsOptions& options, std::ostream& log, std::ostream& err,
               LabelsSummary* summary = nullptr);

struct EvalOptions {
  std::vector<fs::path> manifests;
  std::vector<fs::path> dumps;   // dump files or directories of *.json
  std::vector<fs::path> truths;  // truth files or directories of *.json
  std::vector<double> thresholds{0.25, 0.50, 0.75};
  bool per_sample = false;
  bool include_baseline = false;
  bool baseline_in_vocabulary = false;
  // Writes <out>.csv and <out>.json (and <out>.per_sample.csv).
  fs::path out = "report";
};

int cmd_eval(const EvalOptions& options, std::ostream& log, std::ostream& err);

/// Runs fn, turning library and filesystem errors into an exit code and a
/// one-line "error[<kind>]: ..." message.
template <typename Fn>
int guarded(std::ostream& err, Fn&& fn);

int report_error(std::ostream& err, const std::exception& e);

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const std::exception& e) {
    return report_error(err, e);
  }
}

}  // namespace prismmap::cli
