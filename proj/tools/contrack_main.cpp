#include <cstdint>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "contrack/config.hpp"
#include "contrack/contrastive.hpp"
#include "contrack/errors.hpp"
#include "contrack/io.hpp"
#include "contrack/metrics.hpp"
#include "contrack/sampler.hpp"
#include "contrack/simulator.hpp"
#include "contrack/tracker.hpp"

namespace {

namespace fs = std::filesystem;
using namespace contrack;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 1;
constexpr int kExitIo = 2;

// meta.json next to a data file supplies the pixel geometry; absent, the
// exporter default applies.
SceneMeta meta_for(const fs::path& data_file, const std::string& meta_flag) {
  if (!meta_flag.empty()) return parse_meta(meta_flag);
  const fs::path sidecar = data_file.parent_path() / "meta.json";
  if (fs::exists(sidecar)) return parse_meta(sidecar);
  return SceneMeta{};
}

int run_simulate(const std::string& config_path, const std::string& out_dir,
                 std::int64_t seed_override) {
  RunConfig config;
  if (!config_path.empty()) config = load_config_file(config_path);
  if (seed_override >= 0) config.sim.seed = static_cast<std::uint64_t>(seed_override);
  config.sim.validate();
  const SyntheticDataset dataset = generate(config.sim);
  export_dataset(dataset, out_dir);
  std::size_t detections = 0;
  for (const auto& seq : dataset.sequences) {
    for (const auto& frame : seq.det_frames) detections += frame.size();
  }
  std::cout << "simulated " << dataset.sequences.size() << " sequence(s), " << detections
            << " detections -> " << out_dir << "\n";
  return kExitOk;
}

int run_track(const std::string& dets_path, const std::string& out_path,
              const std::string& preset, const std::string& meta_flag, int memory_length,
              double objectness, double new_id_threshold) {
  RunConfig config = preset.empty() ? RunConfig{} : preset_config(preset);
  if (memory_length > 0) config.tracker.memory_length = memory_length;
  if (objectness >= 0.0) config.tracker.objectness_threshold = objectness;
  if (new_id_threshold > -1e9) config.tracker.new_instance_threshold = new_id_threshold;
  config.tracker.validate();

  const auto frames = parse_detections(dets_path);
  const TrackOutput output = run_sequence(frames, config.tracker);
  const SceneMeta meta = meta_for(dets_path, meta_flag);
  write_results(out_path, output, meta.image_width, meta.image_height);

  std::size_t tracked = 0;
  long last_id = 0;
  for (const auto& frame : output.frames) {
    tracked += frame.objects.size();
    for (const auto& obj : frame.objects) last_id = std::max(last_id, obj.instance_id);
  }
  std::cout << "tracked " << tracked << " detections across " << output.frames.size()
            << " frames, " << last_id << " identities -> " << out_path << "\n";
  return kExitOk;
}

int run_eval(const std::string& gt_path, const std::string& results_path,
             const std::string& report_path, const std::string& meta_flag, double iou) {
  const SceneMeta meta = meta_for(gt_path, meta_flag);
  const LabeledScene scene = load_scene(gt_path, results_path, meta.image_width,
                                        meta.image_height);
  const MetricsReport report = evaluate_scene(scene, iou);
  if (!report_path.empty()) write_metrics_report(report_path, report);
  std::cout << metrics_report_table(report);
  return kExitOk;
}

int run_gradcheck(std::uint64_t seed, int dim, int batch, double tolerance) {
  const MatchedEmbeddingBatch b =
      random_batch(seed, static_cast<std::size_t>(dim), static_cast<std::size_t>(batch));
  const GradientArray analytic = contrastive_gradient(b);
  const GradientArray numeric = finite_difference_gradient(b);
  double max_rel = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    for (std::size_t d = 0; d < analytic[i].size(); ++d) {
      const double denom =
          std::max({1.0, std::abs(analytic[i][d]), std::abs(numeric[i][d])});
      max_rel = std::max(max_rel, std::abs(analytic[i][d] - numeric[i][d]) / denom);
    }
  }
  std::cout << "max relative error: " << max_rel << " (tolerance " << tolerance << ")\n";
  return max_rel < tolerance ? kExitOk : kExitValidation;
}

int run_sample(const std::string& index_path, int videos, int frames, int pretrain_images,
               std::uint64_t seed) {
  const DatasetIndex index = parse_dataset_index(index_path);
  BatchSpec batch;
  if (pretrain_images > 0) {
    batch = build_pretraining_batch(index, pretrain_images, seed);
  } else {
    batch = sample_tracking_batch(index, videos, frames, seed);
  }
  write_batch_spec_jsonl(std::cout, batch);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Embedding-based multi-object tracking toolkit"};
  app.require_subcommand(1);

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic sequence");
  std::string sim_config, sim_out;
  std::int64_t sim_seed = -1;
  simulate->add_option("--config", sim_config, "key = value configuration file");
  simulate->add_option("--out", sim_out, "output directory")->required();
  simulate->add_option("--seed", sim_seed, "override the configured seed");

  auto* track = app.add_subcommand("track", "Assign instance ids to detections");
  std::string track_dets, track_out, track_preset, track_meta;
  int track_memory = -1;
  double track_objectness = -1.0, track_new_id = -1e18;
  track->add_option("--dets", track_dets, "detections JSONL file")->required();
  track->add_option("--out", track_out, "results file (MOTChallenge format)")->required();
  track->add_option("--memory-length", track_memory, "memory window in frames");
  track->add_option("--objectness", track_objectness, "objectness threshold");
  track->add_option("--new-id-threshold", track_new_id, "new-instance similarity threshold");
  track->add_option("--preset", track_preset, "mot17 or bdd100k defaults");
  track->add_option("--meta", track_meta, "meta.json with the pixel geometry");

  auto* eval = app.add_subcommand("eval", "Score results against ground truth");
  std::string eval_gt, eval_results, eval_report, eval_meta;
  double eval_iou = 0.5;
  eval->add_option("--gt", eval_gt, "ground-truth file (MOTChallenge format)")->required();
  eval->add_option("--results", eval_results, "results file")->required();
  eval->add_option("--iou", eval_iou, "matching IoU threshold")->capture_default_str();
  eval->add_option("--report", eval_report, "write the report as JSON");
  eval->add_option("--meta", eval_meta, "meta.json with the pixel geometry");

  auto* gradcheck = app.add_subcommand("gradcheck",
                                       "Compare analytic and finite-difference gradients");
  std::uint64_t gc_seed = 7;
  int gc_dim = 16, gc_batch = 12;
  double gc_tolerance = 1e-5;
  gradcheck->add_option("--seed", gc_seed, "batch seed")->capture_default_str();
  gradcheck->add_option("--dim", gc_dim, "embedding dimension")->capture_default_str();
  gradcheck->add_option("--batch", gc_batch, "batch size")->capture_default_str();
  gradcheck->add_option("--tolerance", gc_tolerance, "maximum relative error")->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Emit a batch specification as JSON Lines");
  std::string sample_index;
  int sample_videos = 2, sample_frames = 8, sample_pretrain = 0;
  std::uint64_t sample_seed = 1;
  sample->add_option("--index", sample_index, "dataset index JSON")->required();
  sample->add_option("--videos", sample_videos, "videos per batch")->capture_default_str();
  sample->add_option("--frames", sample_frames, "frames per video")->capture_default_str();
  sample->add_option("--pretrain-images", sample_pretrain,
                     "two-view batch over this many images instead");
  sample->add_option("--seed", sample_seed, "draw seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (simulate->parsed()) return run_simulate(sim_config, sim_out, sim_seed);
    if (track->parsed()) {
      return run_track(track_dets, track_out, track_preset, track_meta, track_memory,
                       track_objectness, track_new_id);
    }
    if (eval->parsed()) return run_eval(eval_gt, eval_results, eval_report, eval_meta, eval_iou);
    if (gradcheck->parsed()) return run_gradcheck(gc_seed, gc_dim, gc_batch, gc_tolerance);
    if (sample->parsed()) {
      return run_sample(sample_index, sample_videos, sample_frames, sample_pretrain,
                        sample_seed);
    }
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitValidation;
}
