#include <iostream>

#include <CLI11.hpp>

#include "prismmap/commands.hpp"
#include "prismmap/error.hpp"

using namespace prismmap;
using namespace prismmap::cli;

namespace {

void add_render_options(CLI::App* cmd, RenderOptions& r, std::string& sampling, std::string& format) {
  cmd->add_option("--face-size", r.face_size, "Face width and height in pixels")->capture_default_str();
  cmd->add_option("--sampling", sampling, "bilinear or nearest")
      ->check(CLI::IsMember({"bilinear", "nearest"}))
      ->capture_default_str();
  cmd->add_option("--format", format, "Face image format")
      ->check(CLI::IsMember({"png", "jpg"}))
      ->capture_default_str();
  cmd->add_option("--jpeg-quality", r.jpeg_quality)->check(CLI::Range(1, 100))->capture_default_str();
  cmd->add_option("--jobs", r.jobs, "Worker threads (0 = all cores)")->capture_default_str();
  cmd->add_flag("--allow-narrow-fov", r.allow_narrow_fov, "Accept fov below 360/n (leaves gaps)");
  cmd->add_flag("--resample-to-2to1", r.resample_to_2to1, "Resize inputs that are not 2:1 instead of failing");
}

void finish_render_options(RenderOptions& r, const std::string& sampling, const std::string& format) {
  r.sampling = sampling_from_string(sampling);
  r.format = format_from_extension(format);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equirectangular photospheres to n-gonal prism maps, labeling and evaluation"};
  app.require_subcommand(1);

  ConvertOptions convert;
  std::string convert_sampling = "bilinear", convert_format = "png";
  auto* c = app.add_subcommand("convert", "Render one prism map of one photosphere");
  c->add_option("input", convert.input, "Photosphere (PNG or JPEG, 2:1)")->required();
  c->add_option("--n", convert.n, "Number of lateral faces")->capture_default_str();
  c->add_option("--fov", convert.fov_deg, "Square field of view per face, degrees")->capture_default_str();
  c->add_option("--out", convert.out_dir, "Output directory")->capture_default_str();
  add_render_options(c, convert.render, convert_sampling, convert_format);

  SweepOptions sweep;
  std::string sweep_sampling = "bilinear", sweep_format = "png";
  std::vector<std::string> sweep_configs;
  auto* s = app.add_subcommand("sweep", "Render every configuration for a photosphere or directory");
  s->add_option("input", sweep.input, "Photosphere or directory of photospheres")->required();
  s->add_option("--out", sweep.out_dir, "Output directory")->capture_default_str();
  s->add_option("--config", sweep_configs, "n:fov pair, repeatable (default: the 11 standard rows)");
  s->add_flag("--skip-existing", sweep.skip_existing, "Skip maps whose manifest matches the input hash");
  s->add_flag("--include-baseline", sweep.include_baseline, "Also write the whole photosphere as a one-face map");
  add_render_options(s, sweep.render, sweep_sampling, sweep_format);

  LabelsOptions labels;
  auto* l = app.add_subcommand("labels", "Label every face listed in the manifests");
  l->add_option("manifests", labels.manifests, "Manifest files or directories")->required();
  l->add_option("--out", labels.out_dir, "Directory of <sha256>.json dumps")->capture_default_str();
  l->add_option("--backend", labels.backend)
      ->check(CLI::IsMember({"stub", "replay", "remote"}))
      ->capture_default_str();
  l->add_option("--replay", labels.replay, "Dump file or directory for the replay backend");
  l->add_option("--provider", labels.provider, "Remote wire format")
      ->check(CLI::IsMember({"generic", "google", "azure"}))
      ->capture_default_str();
  l->add_option("--rate-limit", labels.rate_limit, "Remote requests per second (0 = unlimited)")
      ->capture_default_str();
  l->add_option("--max-retries", labels.max_retries)->check(CLI::NonNegativeNumber)->capture_default_str();
  l->add_option("--jobs", labels.jobs, "Concurrent requests (0 = all cores)")->capture_default_str();

  EvalOptions eval;
  auto* e = app.add_subcommand("eval", "Score label dumps against truth files");
  e->add_option("--manifests", eval.manifests, "Manifest files or directories")->required();
  e->add_option("--dumps", eval.dumps, "Label dump files or directories")->required();
  e->add_option("--truth", eval.truths, "Truth files or directories")->required();
  e->add_option("--thresholds", eval.thresholds, "Comma-separated confidence thresholds")
      ->delimiter(',')
      ->capture_default_str();
  e->add_flag("--per-sample", eval.per_sample, "Also write per-sample rows");
  e->add_flag("--include-baseline", eval.include_baseline, "Score the whole-photosphere maps as 'direct'");
  e->add_flag("--baseline-in-vocabulary", eval.baseline_in_vocabulary,
              "Let baseline positives join the vocabulary");
  e->add_option("--out", eval.out, "Report path prefix (.csv/.json appended)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    const int rc = app.exit(ex);
    return rc == 0 ? 0 : exit_code_for(ErrorKind::kInvalidArgument);
  }

  return guarded(std::cerr, [&] {
    if (*c) {
      finish_render_options(convert.render, convert_sampling, convert_format);
      return cmd_convert(convert, std::cout, std::cerr);
    }
    if (*s) {
      finish_render_options(sweep.render, sweep_sampling, sweep_format);
      for (const auto& pair : sweep_configs) {
        const auto colon = pair.find(':');
        if (colon == std::string::npos) {
          throw Error(ErrorKind::kInvalidArgument, "--config expects n:fov, got '" + pair + "'");
        }
        try {
          sweep.configs.emplace_back(std::stoi(pair.substr(0, colon)), std::stod(pair.substr(colon + 1)));
        } catch (const std::logic_error&) {
          throw Error(ErrorKind::kInvalidArgument, "--config expects n:fov, got '" + pair + "'");
        }
      }
      return cmd_sweep(sweep, std::cout, std::cerr);
    }
    if (*l) return cmd_labels(labels, std::cout, std::cerr);
    return cmd_eval(eval, std::cout, std::cerr);
  });
}
