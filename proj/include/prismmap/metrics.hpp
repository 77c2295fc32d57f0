#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "prismmap/labels.hpp"

namespace prismmap {

/// Union of the positives of every configuration at one threshold.
/// Throws kInvalidArgument on an empty list.
LabelSet vocabulary(std::span<const LabelSet> positive_lists);

/// vocab \ positives. Throws kInconsistency unless positives is a subset
/// of vocab.
LabelSet negatives(const LabelSet& vocab, const LabelSet& positives);

struct Confusion {
  LabelSet tp, fp, fn;
};

/// Throws kInconsistency naming the labels of truth outside
/// positives and negatives.
Confusion confusion(const LabelSet& positives, const LabelSet& negatives, const LabelSet& truth);

// nullopt marks an undefined (0/0) value.
struct Scores {
  std::optional<double> precision, recall, f1;
};

Scores prf1(std::size_t tp, std::size_t fp, std::size_t fn);
inline Scores prf1(const Confusion& c) { return prf1(c.tp.size(), c.fp.size(), c.fn.size()); }

// ---- truth ----

struct TruthSet {
  std::string sample_id;
  // Set: the file judges exactly this threshold's vocabulary. Unset: one
  // file shared by every threshold, intersected with each vocabulary.
  std::optional<double> threshold;
  LabelSet labels;
};

/// {"sample": "<id>", "threshold": 0.5, "truth": ["label", ...]}
TruthSet parse_truth(const std::string& text);
TruthSet load_truth(const std::filesystem::path& path);

class TruthIndex {
 public:
  void add(TruthSet truth);
  /// Exact-threshold file first, then the shared one; nullptr if neither.
  const TruthSet* find(const std::string& sample_id, double threshold) const;

 private:
  std::vector<TruthSet> sets_;
};

/// Labels judged correct for one vocabulary. Strict files must lie inside
/// it (kInconsistency otherwise); shared files are intersected with it.
LabelSet truth_within(const TruthSet& truth, const LabelSet& vocab);

// ---- per-sample evaluation and aggregation ----

struct ConfigKey {
  std::string id;  // "n8_fov52", or "direct" for the whole-photosphere baseline
  int n = 0;
  double fov_deg = 0.0;

  friend bool operator==(const ConfigKey&, const ConfigKey&) = default;
};

ConfigKey baseline_key();

// Per-face observations of one configuration of one sample.
struct ConfigLabels {
  ConfigKey config;
  std::vector<std::vector<LabelObservation>> faces;
  bool baseline = false;
};

struct SampleLabels {
  std::string sample_id;
  std::vector<ConfigLabels> configs;
};

struct EvaluationRow {
  ConfigKey config;
  double threshold = 0.0;
  std::size_t tp = 0, fp = 0, fn = 0;
  Scores scores;
};

struct SampleEvaluation {
  std::string sample_id;
  std::vector<EvaluationRow> rows;  // config order, then threshold order
};

struct EvaluationOptions {
  // Whether the baseline's positives join the vocabulary union.
  bool baseline_in_vocabulary = false;
};

/// Positives per configuration, vocabulary, negatives, confusion and
/// scores for every threshold. A baseline kept out of the vocabulary is
/// scored against it: its positives outside the vocabulary count as FP.
SampleEvaluation evaluate_sample(const SampleLabels& sample, std::span<const double> thresholds,
                                 const TruthIndex& truths, const EvaluationOptions& options = {});

struct MetricSummary {
  std::optional<double> mean, stddev;  // over defined samples; (n - 1) std dev
};

struct AggregateRow {
  ConfigKey config;
  double threshold = 0.0;
  MetricSummary precision, recall, f1;
  // Samples with at least one undefined metric in this row.
  int undefined_count = 0;
};

struct AggregateReport {
  std::vector<AggregateRow> rows;
  std::vector<std::string> skipped_samples;  // listed because truth was missing

  bool complete() const { return skipped_samples.empty(); }
};

/// Mean and sample standard deviation of defined values; a single value
/// has std dev 0.
MetricSummary summarize(std::span<const double> values);

AggregateReport aggregate(std::span<const SampleEvaluation> samples);

/// True when every requested threshold has truth for the sample.
bool has_truth(const TruthIndex& truths, const std::string& sample_id, std::span<const double> thresholds);

inline const double kDefaultThresholds[] = {0.25, 0.50, 0.75};

std::string report_csv(const AggregateReport& report);
std::string report_json(const AggregateReport& report);
std::string per_sample_csv(std::span<const SampleEvaluation> samples);

}  // namespace prismmap
