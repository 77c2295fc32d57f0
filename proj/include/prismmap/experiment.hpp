#pragma once

#include <span>
#include <string>
#include <vector>

#include "prismmap/backends.hpp"
#include "prismmap/metrics.hpp"
#include "prismmap/reproject.hpp"

namespace prismmap {

struct ExperimentSample {
  std::string id;
  EquirectImage image;
};

struct ExperimentOptions {
  std::vector<PrismMapConfig> configs = default_sweep_configs();
  std::vector<double> thresholds{std::begin(kDefaultThresholds), std::end(kDefaultThresholds)};
  // Feed the whole photosphere as one extra "direct" configuration.
  bool include_baseline = false;
  bool baseline_in_vocabulary = false;
  int workers = 1;
  ImageFormat face_format = ImageFormat::kPng;
};

ConfigKey config_key(const PrismMapConfig& config);

/// Renders every configuration and labels each face (and the baseline when
/// asked) with the backend. Faces are labeled in parallel.
SampleLabels label_sample(const ExperimentSample& sample, LabelBackend& backend, const ExperimentOptions& options);

struct ExperimentResult {
  AggregateReport report;
  std::vector<SampleEvaluation> samples;
};

/// Samples without truth for every threshold are listed in
/// report.skipped_samples and not rendered.
ExperimentResult run_experiment(std::span<const ExperimentSample> samples, LabelBackend& backend,
                                const TruthIndex& truths, const ExperimentOptions& options = {});

}  // namespace prismmap
