#include "prismmap/experiment.hpp"

#include "prismmap/parallel.hpp"

namespace prismmap {

ConfigKey config_key(const PrismMapConfig& config) { return {config.id(), config.n, config.fov_deg}; }

SampleLabels label_sample(const ExperimentSample& sample, LabelBackend& backend, const ExperimentOptions& options) {
  SampleLabels out{sample.id, {}};
  for (const auto& cfg : options.configs) {
    const PrismMap map = render_prism_map(sample.image, cfg, options.workers);
    ConfigLabels labels{config_key(cfg), std::vector<std::vector<LabelObservation>>(map.faces.size()), false};
    parallel_for(static_cast<int>(map.faces.size()), options.workers, [&](int k) {
      const auto face = FaceImage::from_image(map.faces[k], options.face_format);
      labels.faces[k] = backend.obtain_labels(face).labels;
    });
    out.configs.push_back(std::move(labels));
  }
  if (options.include_baseline) {
    const auto whole = FaceImage::from_image(sample.image.image(), options.face_format);
    out.configs.push_back({baseline_key(), {backend.obtain_labels(whole).labels}, true});
  }
  return out;
}

ExperimentResult run_experiment(std::span<const ExperimentSample> samples, LabelBackend& backend,
                                const TruthIndex& truths, const ExperimentOptions& options) {
  ExperimentResult result;
  std::vector<std::string> skipped;
  for (const auto& s : samples) {
    if (!has_truth(truths, s.id, options.thresholds)) {
      skipped.push_back(s.id);
      continue;
    }
    const auto labels = label_sample(s, backend, options);
    result.samples.push_back(
        evaluate_sample(labels, options.thresholds, truths, {options.baseline_in_vocabulary}));
  }
  result.report = aggregate(result.samples);
  result.report.skipped_samples = std::move(skipped);
  return result;
}

}  // namespace prismmap
