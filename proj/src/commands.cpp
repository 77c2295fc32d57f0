#include "prismmap/commands.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <tuple>

#include <fmt/format.h>
#include <fmt/ostream.h>
#include <nlohmann/json.hpp>

#include "prismmap/backends.hpp"
#include "prismmap/error.hpp"
#include "prismmap/hash.hpp"
#include "prismmap/metrics.hpp"
#include "prismmap/parallel.hpp"

namespace prismmap::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

constexpr const char* kManifestSuffix = ".manifest.json";

ordered_json number(double v) {
  if (v == std::floor(v) && std::abs(v) < 1e15) return ordered_json(static_cast<long long>(v));
  return ordered_json(v);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

bool is_image_file(const fs::path& p) {
  const auto ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

bool ends_with(const std::string& s, const std::string& tail) {
  return s.size() >= tail.size() && s.compare(s.size() - tail.size(), tail.size(), tail) == 0;
}

void require_exists(const fs::path& p) {
  if (!fs::exists(p)) throw Error(ErrorKind::kIo, fmt::format("'{}' does not exist", p.string()));
}

// Regular files directly under `dir` accepted by `keep`, sorted.
template <typename Pred>
std::vector<fs::path> list_dir(const fs::path& dir, Pred keep) {
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && keep(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <typename Pred>
std::vector<fs::path> expand(const std::vector<fs::path>& inputs, Pred keep) {
  std::vector<fs::path> out;
  for (const auto& p : inputs) {
    require_exists(p);
    if (fs::is_directory(p)) {
      const auto files = list_dir(p, keep);
      out.insert(out.end(), files.begin(), files.end());
    } else {
      out.push_back(p);
    }
  }
  return out;
}

bool is_manifest(const fs::path& p) { return ends_with(p.filename().string(), kManifestSuffix); }
bool is_json(const fs::path& p) { return p.extension() == ".json"; }

struct Photosphere {
  EquirectImage image;
  std::string source_id;
};

Photosphere load_photosphere(const fs::path& path, bool resample) {
  const auto bytes = read_file(path);
  Image img = decode_image(bytes);
  const bool two_to_one = img.width() == 2 * img.height() && img.height() >= 2;
  EquirectImage eq = (resample && !two_to_one) ? resample_to_2to1(img) : EquirectImage::validate(std::move(img));
  std::string id = content_id(eq.image());
  return {std::move(eq), std::move(id)};
}

PrismMapConfig make_config(int n, double fov, const RenderOptions& r) {
  PrismMapConfig cfg;
  cfg.n = n;
  cfg.fov_deg = fov;
  cfg.face_size = r.face_size;
  cfg.sampling = r.sampling;
  cfg.allow_narrow_fov = r.allow_narrow_fov;
  cfg.validate();
  return cfg;
}

std::string face_file_name(const std::string& stem, int n, double fov, int k, ImageFormat format) {
  return fmt::format("{}_f{}.{}", map_stem(stem, n, fov), k, extension_for(format));
}

fs::path manifest_path(const fs::path& out_dir, const std::string& stem, int n, double fov) {
  return out_dir / (map_stem(stem, n, fov) + kManifestSuffix);
}

// Whether an earlier run already wrote this exact map from the same pixels.
bool up_to_date(const fs::path& manifest_file, const Manifest& expected) {
  if (!fs::exists(manifest_file)) return false;
  Manifest m;
  try {
    m = load_manifest(manifest_file);
  } catch (const Error&) {
    return false;
  }
  if (m.source_id != expected.source_id || m.n != expected.n || m.fov_deg != expected.fov_deg ||
      m.face_size != expected.face_size || m.sampling != expected.sampling ||
      m.faces.size() != expected.faces.size()) {
    return false;
  }
  for (std::size_t k = 0; k < m.faces.size(); ++k) {
    if (m.faces[k].file != expected.faces[k].file) return false;
    if (!fs::exists(manifest_file.parent_path() / m.faces[k].file)) return false;
  }
  return true;
}

// Faces first, manifest last, so a manifest only ever names complete files.
void write_map(const fs::path& out_dir, const fs::path& manifest_file, const Manifest& manifest,
               const std::vector<Image>& faces, const RenderOptions& r) {
  parallel_for(static_cast<int>(faces.size()), r.jobs, [&](int k) {
    write_file_atomic(out_dir / manifest.faces[k].file, encode_image(faces[k], r.format, r.jpeg_quality));
  });
  write_file_atomic(manifest_file, manifest_to_json_text(manifest));
}

Manifest describe(const Photosphere& ps, const std::string& stem, int n, double fov, int face_size,
                  const std::string& sampling, ImageFormat format) {
  Manifest m{ps.source_id, n, fov, face_size, sampling, {}};
  for (int k = 0; k < n; ++k) {
    m.faces.push_back({k, n == 1 ? 0.0 : k * 360.0 / n, face_file_name(stem, n, fov, k, format)});
  }
  return m;
}

// Renders (or skips) one configuration of one photosphere. Returns true when
// it rendered.
bool produce_map(const Photosphere& ps, const std::string& stem, const PrismMapConfig& cfg,
                 const fs::path& out_dir, const RenderOptions& r, bool skip_existing, std::ostream& log) {
  const Manifest m = describe(ps, stem, cfg.n, cfg.fov_deg, cfg.face_size, to_string(cfg.sampling), r.format);
  const fs::path mf = manifest_path(out_dir, stem, cfg.n, cfg.fov_deg);
  if (skip_existing && up_to_date(mf, m)) {
    fmt::print(log, "skip {} (up to date)\n", mf.filename().string());
    return false;
  }
  const PrismMap map = render_prism_map(ps.image, cfg, r.jobs);
  write_map(out_dir, mf, m, map.faces, r);
  fmt::print(log, "wrote {} ({} faces)\n", mf.filename().string(), map.faces.size());
  return true;
}

// The whole photosphere as a single-face pseudo map.
bool produce_baseline(const Photosphere& ps, const std::string& stem, const fs::path& out_dir,
                      const RenderOptions& r, bool skip_existing, std::ostream& log) {
  const Manifest m = describe(ps, stem, 1, 360.0, ps.image.width(), "identity", r.format);
  const fs::path mf = manifest_path(out_dir, stem, 1, 360.0);
  if (skip_existing && up_to_date(mf, m)) {
    fmt::print(log, "skip {} (up to date)\n", mf.filename().string());
    return false;
  }
  write_map(out_dir, mf, m, {ps.image.image()}, r);
  fmt::print(log, "wrote {} (baseline)\n", mf.filename().string());
  return true;
}

}  // namespace

std::string map_stem(const std::string& stem, int n, double fov_deg) {
  return fmt::format("{}_n{}_fov{}", stem, n, fov_deg);
}

std::string sample_id_from_manifest(const fs::path& path) {
  std::string name = path.filename().string();
  if (ends_with(name, kManifestSuffix)) name.resize(name.size() - std::string(kManifestSuffix).size());
  const auto n_pos = name.rfind("_n");
  if (n_pos != std::string::npos && name.find("_fov", n_pos) != std::string::npos) name.resize(n_pos);
  return name;
}

std::string manifest_to_json_text(const Manifest& m) {
  ordered_json j;
  j["source_id"] = m.source_id;
  j["n"] = m.n;
  j["fov_deg"] = number(m.fov_deg);
  j["face_size"] = m.face_size;
  j["sampling"] = m.sampling;
  j["faces"] = ordered_json::array();
  for (const auto& f : m.faces) {
    ordered_json e;
    e["index"] = f.index;
    e["heading_deg"] = number(f.heading_deg);
    e["file"] = f.file;
    j["faces"].push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

Manifest load_manifest(const fs::path& path) {
  const auto bytes = read_file(path);
  try {
    const auto j = nlohmann::json::parse(bytes.begin(), bytes.end());
    Manifest m;
    m.source_id = j.at("source_id").get<std::string>();
    m.n = j.at("n").get<int>();
    m.fov_deg = j.at("fov_deg").get<double>();
    m.face_size = j.at("face_size").get<int>();
    m.sampling = j.at("sampling").get<std::string>();
    for (const auto& f : j.at("faces")) {
      m.faces.push_back({f.at("index").get<int>(), f.at("heading_deg").get<double>(), f.at("file").get<std::string>()});
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, fmt::format("malformed manifest '{}': {}", path.string(), e.what()));
  }
}

int cmd_convert(const ConvertOptions& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const PrismMapConfig cfg = make_config(o.n, o.fov_deg, o.render);
    require_exists(o.input);
    const Photosphere ps = load_photosphere(o.input, o.render.resample_to_2to1);
    fs::create_directories(o.out_dir);
    produce_map(ps, o.input.stem().string(), cfg, o.out_dir, o.render, false, log);
    return 0;
  });
}

int cmd_sweep(const SweepOptions& o, std::ostream& log, std::ostream& err, SweepSummary* summary) {
  SweepSummary local;
  SweepSummary& sum = summary ? *summary : local;
  sum = {};
  return guarded(err, [&] {
    std::vector<PrismMapConfig> configs;
    if (o.configs.empty()) {
      for (const auto& d : default_sweep_configs()) configs.push_back(make_config(d.n, d.fov_deg, o.render));
    } else {
      std::set<std::pair<int, double>> seen;
      for (const auto& [n, fov] : o.configs) {
        if (!seen.insert({n, fov}).second) {
          throw Error(ErrorKind::kInvalidArgument, fmt::format("configuration {}:{} listed twice", n, fov));
        }
        configs.push_back(make_config(n, fov, o.render));
      }
    }
    require_exists(o.input);
    const std::vector<fs::path> inputs =
        fs::is_directory(o.input) ? list_dir(o.input, is_image_file) : std::vector<fs::path>{o.input};
    if (inputs.empty()) {
      fmt::print(err, "warning: no photospheres found in '{}'\n", o.input.string());
      return 0;
    }
    fs::create_directories(o.out_dir);
    int status = 0;
    for (const auto& input : inputs) {
      const int rc = guarded(err, [&] {
        const Photosphere ps = load_photosphere(input, o.render.resample_to_2to1);
        const std::string stem = input.stem().string();
        for (const auto& cfg : configs) {
          produce_map(ps, stem, cfg, o.out_dir, o.render, o.skip_existing, log) ? ++sum.maps_rendered
                                                                               : ++sum.maps_skipped;
        }
        if (o.include_baseline) {
          produce_baseline(ps, stem, o.out_dir, o.render, o.skip_existing, log) ? ++sum.maps_rendered
                                                                                : ++sum.maps_skipped;
        }
        return 0;
      });
      if (rc != 0) {
        fmt::print(err, "  while processing '{}'\n", input.string());
        ++sum.files_failed;
        if (status == 0) status = rc;
      }
    }
    fmt::print(log, "sweep: {} file(s), {} map(s) rendered, {} skipped, {} file(s) failed\n", inputs.size(),
               sum.maps_rendered, sum.maps_skipped, sum.files_failed);
    return status;
  });
}

namespace {

BackendDescriptor descriptor_for(const LabelsOptions& o) {
  if (o.backend == "stub") return StubOptions{};
  if (o.backend == "replay") {
    if (o.replay.empty()) throw Error(ErrorKind::kBackendConfig, "replay backend needs --replay <file or dir>");
    return ReplayOptions{o.replay};
  }
  if (o.backend == "remote") {
    RemoteOptions r;
    r.provider = o.provider;
    r.max_retries = o.max_retries;
    r.rate_limit = o.rate_limit;
    return remote_options_from_environment(r);
  }
  throw Error(ErrorKind::kBackendConfig,
              fmt::format("unknown backend '{}' (expected stub, replay or remote)", o.backend));
}

}  // namespace

int cmd_labels(const LabelsOptions& o, std::ostream& log, std::ostream& err, LabelsSummary* summary) {
  LabelsSummary local;
  LabelsSummary& sum = summary ? *summary : local;
  sum = {};
  return guarded(err, [&] {
    // Configuration problems surface before any face is read or sent.
    auto backend = make_backend(descriptor_for(o));
    const auto manifests = expand(o.manifests, is_manifest);
    fs::create_directories(o.out_dir);

    struct Task {
      fs::path face;
      std::string sha;
    };
    std::vector<Task> pending;
    std::set<std::string> seen;
    for (const auto& mf : manifests) {
      const Manifest m = load_manifest(mf);
      for (const auto& f : m.faces) {
        const fs::path face = mf.parent_path() / f.file;
        const std::string sha = sha256_hex(read_file(face));
        if (!seen.insert(sha).second) continue;
        if (fs::exists(o.out_dir / (sha + ".json"))) {
          ++sum.skipped;
          continue;
        }
        pending.push_back({face, sha});
      }
    }

    std::mutex mu;
    std::vector<std::pair<std::string, std::string>> failures;  // face, message
    int first_code = 0;
    parallel_for(static_cast<int>(pending.size()), o.jobs, [&](int i) {
      const Task& t = pending[i];
      try {
        const auto face = FaceImage::from_encoded(read_file(t.face));
        const LabelDump dump = backend->obtain_labels(face);
        write_file_atomic(o.out_dir / (t.sha + ".json"), dump_to_json_text(dump));
        std::lock_guard lock(mu);
        ++sum.labeled;
      } catch (const Error& e) {
        std::lock_guard lock(mu);
        failures.emplace_back(t.face.string(), fmt::format("error[{}]: {}", to_string(e.kind()), e.what()));
        if (first_code == 0) first_code = exit_code_for(e.kind());
      }
    });
    std::sort(failures.begin(), failures.end());
    for (const auto& [face, msg] : failures) fmt::print(err, "{}: {}\n", face, msg);
    sum.failed = static_cast<int>(failures.size());
    fmt::print(log, "labels: {} labeled, {} already present, {} failed\n", sum.labeled, sum.skipped, sum.failed);
    return failures.empty() ? 0 : first_code;
  });
}

int cmd_eval(const EvalOptions& o, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    if (o.thresholds.empty()) throw Error(ErrorKind::kInvalidArgument, "no thresholds given");
    for (double t : o.thresholds) {
      if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::kInvalidArgument, fmt::format("threshold {} outside [0, 1]", t));
    }
    std::map<std::string, LabelDump> dumps;
    for (const auto& f : expand(o.dumps, is_json)) {
      const auto bytes = read_file(f);
      for (auto& d : parse_label_dumps(std::string(bytes.begin(), bytes.end()))) {
        const std::string key = d.image;
        dumps.insert_or_assign(key, std::move(d));
      }
    }
    TruthIndex truths;
    for (const auto& f : expand(o.truths, is_json)) truths.add(load_truth(f));

    struct Entry {
      Manifest manifest;
      fs::path dir;
    };
    std::map<std::string, std::vector<Entry>> by_sample;
    for (const auto& mf : expand(o.manifests, is_manifest)) {
      Manifest m = load_manifest(mf);
      if (m.is_baseline() && !o.include_baseline) continue;
      by_sample[sample_id_from_manifest(mf)].push_back({std::move(m), mf.parent_path()});
    }

    std::vector<SampleEvaluation> evaluations;
    std::vector<std::string> skipped;
    for (auto& [sample_id, entries] : by_sample) {
      if (!has_truth(truths, sample_id, o.thresholds)) {
        skipped.push_back(sample_id);
        continue;
      }
      std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return std::make_tuple(a.manifest.is_baseline(), a.manifest.n, a.manifest.fov_deg) <
               std::make_tuple(b.manifest.is_baseline(), b.manifest.n, b.manifest.fov_deg);
      });
      SampleLabels labels{sample_id, {}};
      for (const auto& e : entries) {
        ConfigLabels cl;
        cl.baseline = e.manifest.is_baseline();
        cl.config = cl.baseline ? baseline_key()
                                : ConfigKey{PrismMapConfig{e.manifest.n, e.manifest.fov_deg}.id(), e.manifest.n,
                                            e.manifest.fov_deg};
        for (const auto& f : e.manifest.faces) {
          const fs::path face = e.dir / f.file;
          const std::string sha = sha256_hex(read_file(face));
          const auto it = dumps.find(sha);
          if (it == dumps.end()) {
            throw Error(ErrorKind::kInconsistency,
                        fmt::format("no label dump for face '{}' ({})", face.string(), sha));
          }
          cl.faces.push_back(it->second.labels);
        }
        labels.configs.push_back(std::move(cl));
      }
      evaluations.push_back(evaluate_sample(labels, o.thresholds, truths, {o.baseline_in_vocabulary}));
    }

    AggregateReport report = aggregate(evaluations);
    report.skipped_samples = skipped;
    if (o.out.has_parent_path()) fs::create_directories(o.out.parent_path());
    const std::string base = o.out.string();
    write_file_atomic(base + ".csv", report_csv(report));
    write_file_atomic(base + ".json", report_json(report));
    if (o.per_sample) write_file_atomic(base + ".per_sample.csv", per_sample_csv(evaluations));
    fmt::print(log, "eval: {} sample(s) evaluated, {} row(s) -> {}.csv\n", evaluations.size(), report.rows.size(),
               base);
    if (!skipped.empty()) {
      for (const auto& s : skipped) fmt::print(err, "skipped sample '{}': missing truth\n", s);
      return exit_code_for(ErrorKind::kInconsistency);
    }
    return 0;
  });
}

int report_error(std::ostream& err, const std::exception& e) {
  if (const auto* pe = dynamic_cast<const Error*>(&e)) {
    fmt::print(err, "error[{}]: {}\n", to_string(pe->kind()), pe->what());
    return exit_code_for(pe->kind());
  }
  if (dynamic_cast<const fs::filesystem_error*>(&e)) {
    fmt::print(err, "error[{}]: {}\n", to_string(ErrorKind::kIo), e.what());
    return exit_code_for(ErrorKind::kIo);
  }
  fmt::print(err, "error[internal]: {}\n", e.what());
  return 1;
}

}  // namespace prismmap::cli
