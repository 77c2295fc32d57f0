#include "prismmap/labels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include <fmt/format.h>

#include "prismmap/error.hpp"

namespace prismmap {

std::string normalize_label(const std::string& raw) {
  std::string out;
  out.reserve(raw.size());
  bool pending_space = false;
  for (unsigned char c : raw) {
    if (std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(static_cast<char>(std::tolower(c)));
  }
  return out;
}

LabelObservation::LabelObservation(const std::string& label, double confidence)
    : label_(normalize_label(label)), confidence_(confidence) {
  if (label_.empty()) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("label '{}' is empty after normalization", label));
  }
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument,
                fmt::format("confidence {} for label '{}' outside [0, 1]", confidence, label_));
  }
}

LabelSet PositivesList::entries() const {
  LabelSet out;
  for (const auto& [label, conf] : provenance) out.insert(label);
  return out;
}

PositivesList positives_for_map(const std::vector<std::vector<LabelObservation>>& faces, double threshold) {
  if (!(threshold >= 0.0 && threshold <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("threshold {} outside [0, 1]", threshold));
  }
  PositivesList out;
  out.threshold = threshold;
  for (const auto& face : faces) {
    for (const auto& obs : face) {
      if (!(obs.confidence() > threshold)) continue;
      auto [it, inserted] = out.provenance.emplace(obs.label(), obs.confidence());
      if (!inserted) it->second = std::max(it->second, obs.confidence());
    }
  }
  return out;
}

}  // namespace prismmap
