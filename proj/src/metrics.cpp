#include "prismmap/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <map>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <nlohmann/json.hpp>

#include "prismmap/error.hpp"
#include "prismmap/image.hpp"

namespace prismmap {

namespace {

LabelSet difference(const LabelSet& a, const LabelSet& b) {
  LabelSet out;
  std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

LabelSet intersection(const LabelSet& a, const LabelSet& b) {
  LabelSet out;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::inserter(out, out.end()));
  return out;
}

bool same_threshold(double a, double b) { return std::abs(a - b) < 1e-9; }

std::string fixed(const std::optional<double>& v) { return v ? fmt::format("{:.6f}", *v) : std::string(); }

}  // namespace

LabelSet vocabulary(std::span<const LabelSet> positive_lists) {
  if (positive_lists.empty()) throw Error(ErrorKind::kInvalidArgument, "vocabulary needs at least one list");
  LabelSet out;
  for (const auto& p : positive_lists) out.insert(p.begin(), p.end());
  return out;
}

LabelSet negatives(const LabelSet& vocab, const LabelSet& positives) {
  const auto stray = difference(positives, vocab);
  if (!stray.empty()) {
    throw Error(ErrorKind::kInconsistency,
                fmt::format("positives not in vocabulary: {}", fmt::join(stray, ", ")));
  }
  return difference(vocab, positives);
}

Confusion confusion(const LabelSet& positives, const LabelSet& negatives, const LabelSet& truth) {
  LabelSet judged = positives;
  judged.insert(negatives.begin(), negatives.end());
  const auto stray = difference(truth, judged);
  if (!stray.empty()) {
    throw Error(ErrorKind::kInconsistency,
                fmt::format("truth labels outside positives and negatives: {}", fmt::join(stray, ", ")));
  }
  return {intersection(positives, truth), difference(positives, truth), intersection(negatives, truth)};
}

Scores prf1(std::size_t tp, std::size_t fp, std::size_t fn) {
  Scores s;
  if (tp + fp > 0) s.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  if (tp + fn > 0) s.recall = static_cast<double>(tp) / static_cast<double>(tp + fn);
  if (s.precision && s.recall) {
    const double sum = *s.precision + *s.recall;
    s.f1 = sum > 0.0 ? 2.0 * *s.precision * *s.recall / sum : 0.0;
  }
  return s;
}

TruthSet parse_truth(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    TruthSet t;
    t.sample_id = j.at("sample").get<std::string>();
    if (j.contains("threshold") && !j["threshold"].is_null()) {
      const double th = j["threshold"].get<double>();
      if (!(th >= 0.0 && th <= 1.0)) {
        throw Error(ErrorKind::kInvalidArgument, fmt::format("truth threshold {} outside [0, 1]", th));
      }
      t.threshold = th;
    }
    for (const auto& label : j.at("truth")) {
      const auto norm = normalize_label(label.get<std::string>());
      if (norm.empty()) throw Error(ErrorKind::kInvalidArgument, "empty truth label");
      t.labels.insert(norm);
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("malformed truth file: {}", e.what()));
  }
}

TruthSet load_truth(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  try {
    return parse_truth(std::string(bytes.begin(), bytes.end()));
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", path.string(), e.what()));
  }
}

void TruthIndex::add(TruthSet truth) {
  for (const auto& t : sets_) {
    const bool clash = t.sample_id == truth.sample_id && t.threshold.has_value() == truth.threshold.has_value() &&
                       (!t.threshold || same_threshold(*t.threshold, *truth.threshold));
    if (clash) {
      throw Error(ErrorKind::kInvalidArgument, fmt::format("duplicate truth for sample '{}'", truth.sample_id));
    }
  }
  sets_.push_back(std::move(truth));
}

const TruthSet* TruthIndex::find(const std::string& sample_id, double threshold) const {
  const TruthSet* shared = nullptr;
  for (const auto& t : sets_) {
    if (t.sample_id != sample_id) continue;
    if (!t.threshold) {
      shared = &t;
    } else if (same_threshold(*t.threshold, threshold)) {
      return &t;
    }
  }
  return shared;
}

LabelSet truth_within(const TruthSet& truth, const LabelSet& vocab) {
  if (!truth.threshold) return intersection(truth.labels, vocab);
  const auto stray = difference(truth.labels, vocab);
  if (!stray.empty()) {
    throw Error(ErrorKind::kInconsistency,
                fmt::format("truth for sample '{}' at threshold {} has labels outside the vocabulary: {}",
                            truth.sample_id, *truth.threshold, fmt::join(stray, ", ")));
  }
  return truth.labels;
}

ConfigKey baseline_key() { return {"direct", 1, 360.0}; }

SampleEvaluation evaluate_sample(const SampleLabels& sample, std::span<const double> thresholds,
                                 const TruthIndex& truths, const EvaluationOptions& options) {
  SampleEvaluation out{sample.sample_id, {}};
  const std::size_t nc = sample.configs.size();
  // positives[t][c]
  std::vector<std::vector<LabelSet>> positives(thresholds.size(), std::vector<LabelSet>(nc));
  std::vector<LabelSet> vocab(thresholds.size());
  std::vector<LabelSet> truth(thresholds.size());
  for (std::size_t t = 0; t < thresholds.size(); ++t) {
    std::vector<LabelSet> members;
    for (std::size_t c = 0; c < nc; ++c) {
      positives[t][c] = positives_for_map(sample.configs[c].faces, thresholds[t]).entries();
      if (!sample.configs[c].baseline || options.baseline_in_vocabulary) members.push_back(positives[t][c]);
    }
    if (members.empty()) {
      throw Error(ErrorKind::kInvalidArgument,
                  fmt::format("sample '{}' has no configuration to build a vocabulary from", sample.sample_id));
    }
    vocab[t] = vocabulary(members);
    const TruthSet* ts = truths.find(sample.sample_id, thresholds[t]);
    if (!ts) {
      throw Error(ErrorKind::kInconsistency,
                  fmt::format("no truth for sample '{}' at threshold {}", sample.sample_id, thresholds[t]));
    }
    truth[t] = truth_within(*ts, vocab[t]);
  }
  for (std::size_t c = 0; c < nc; ++c) {
    const auto& cfg = sample.configs[c];
    for (std::size_t t = 0; t < thresholds.size(); ++t) {
      const auto& p = positives[t][c];
      const bool outside = cfg.baseline && !options.baseline_in_vocabulary;
      const LabelSet neg = outside ? difference(vocab[t], p) : negatives(vocab[t], p);
      const Confusion conf = confusion(p, neg, truth[t]);
      EvaluationRow row{cfg.config, thresholds[t], conf.tp.size(), conf.fp.size(), conf.fn.size(), prf1(conf)};
      out.rows.push_back(std::move(row));
    }
  }
  return out;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  const double mean = sum / static_cast<double>(values.size());
  s.mean = mean;
  if (values.size() == 1) {
    s.stddev = 0.0;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  return s;
}

AggregateReport aggregate(std::span<const SampleEvaluation> samples) {
  struct Acc {
    ConfigKey config;
    double threshold;
    std::vector<double> p, r, f;
    int undefined = 0;
  };
  std::vector<Acc> accs;
  std::map<std::pair<std::string, double>, std::size_t> index;
  for (const auto& s : samples) {
    for (const auto& row : s.rows) {
      const auto key = std::make_pair(row.config.id, row.threshold);
      auto it = index.find(key);
      if (it == index.end()) {
        it = index.emplace(key, accs.size()).first;
        accs.push_back({row.config, row.threshold, {}, {}, {}, 0});
      }
      Acc& a = accs[it->second];
      if (row.scores.precision) a.p.push_back(*row.scores.precision);
      if (row.scores.recall) a.r.push_back(*row.scores.recall);
      if (row.scores.f1) a.f.push_back(*row.scores.f1);
      if (!row.scores.precision || !row.scores.recall || !row.scores.f1) ++a.undefined;
    }
  }
  AggregateReport report;
  for (const auto& a : accs) {
    report.rows.push_back({a.config, a.threshold, summarize(a.p), summarize(a.r), summarize(a.f), a.undefined});
  }
  return report;
}

bool has_truth(const TruthIndex& truths, const std::string& sample_id, std::span<const double> thresholds) {
  return std::all_of(thresholds.begin(), thresholds.end(),
                     [&](double t) { return truths.find(sample_id, t) != nullptr; });
}

std::string report_csv(const AggregateReport& report) {
  std::string out =
      "config,n,fov_deg,threshold,mean_precision,std_precision,mean_recall,std_recall,mean_f1,std_f1,"
      "undefined_count\n";
  for (const auto& r : report.rows) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.config.id, r.config.n, r.config.fov_deg, r.threshold,
                       fixed(r.precision.mean), fixed(r.precision.stddev), fixed(r.recall.mean),
                       fixed(r.recall.stddev), fixed(r.f1.mean), fixed(r.f1.stddev), r.undefined_count);
  }
  return out;
}

std::string report_json(const AggregateReport& report) {
  using ordered_json = nlohmann::ordered_json;
  const auto num = [](const std::optional<double>& v) { return v ? ordered_json(*v) : ordered_json(nullptr); };
  ordered_json rows = ordered_json::array();
  for (const auto& r : report.rows) {
    ordered_json j;
    j["config"] = r.config.id;
    j["n"] = r.config.n;
    j["fov_deg"] = r.config.fov_deg;
    j["threshold"] = r.threshold;
    j["mean_precision"] = num(r.precision.mean);
    j["std_precision"] = num(r.precision.stddev);
    j["mean_recall"] = num(r.recall.mean);
    j["std_recall"] = num(r.recall.stddev);
    j["mean_f1"] = num(r.f1.mean);
    j["std_f1"] = num(r.f1.stddev);
    j["undefined_count"] = r.undefined_count;
    rows.push_back(std::move(j));
  }
  ordered_json doc;
  doc["rows"] = std::move(rows);
  doc["skipped_samples"] = report.skipped_samples;
  return doc.dump(2) + "\n";
}

std::string per_sample_csv(std::span<const SampleEvaluation> samples) {
  std::string out = "sample,config,n,fov_deg,threshold,tp,fp,fn,precision,recall,f1\n";
  for (const auto& s : samples) {
    for (const auto& r : s.rows) {
      out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", s.sample_id, r.config.id, r.config.n,
                         r.config.fov_deg, r.threshold, r.tp, r.fp, r.fn, fixed(r.scores.precision),
                         fixed(r.scores.recall), fixed(r.scores.f1));
    }
  }
  return out;
}

}  // namespace prismmap
