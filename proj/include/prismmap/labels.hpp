#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

namespace prismmap {

/// Lowercases ASCII, trims, and collapses internal whitespace runs to a
/// single space.
std::string normalize_label(const std::string& raw);

class LabelObservation {
 public:
  /// Normalizes the label; throws kInvalidArgument if it ends up empty or
  /// if confidence is outside [0, 1].
  LabelObservation(const std::string& label, double confidence);

  const std::string& label() const { return label_; }
  double confidence() const { return confidence_; }

  friend bool operator==(const LabelObservation&, const LabelObservation&) = default;

 private:
  std::string label_;
  double confidence_;
};

using LabelSet = std::set<std::string>;

// Labels whose confidence strictly exceeds the threshold, with the highest
// confidence seen for each.
struct PositivesList {
  std::map<std::string, double> provenance;
  std::string config_id;
  std::string sample_id;
  double threshold = 0.0;

  LabelSet entries() const;
  bool contains(const std::string& label) const { return provenance.count(label) != 0; }
  std::size_t size() const { return provenance.size(); }
};

/// Union over all faces of observations with confidence > threshold.
/// Throws kInvalidArgument if threshold is outside [0, 1].
PositivesList positives_for_map(const std::vector<std::vector<LabelObservation>>& faces, double threshold);

}  // namespace prismmap
