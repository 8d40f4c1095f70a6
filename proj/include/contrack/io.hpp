#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "contrack/metrics.hpp"
#include "contrack/sampler.hpp"
#include "contrack/simulator.hpp"
#include "contrack/tracker.hpp"

namespace contrack {

// Sidecar describing the pixel geometry of MOTChallenge-format files.
struct SceneMeta {
  int image_width = 1024;
  int image_height = 1024;
  std::uint64_t seed = 0;
};

// Ground truth, one object per line:
// frame,id,left,top,width,height,flag,category,visibility
// Pixel corner coordinates; frames and ids are 1-based. Lines with flag 0
// are skipped, frames may arrive unordered and are sorted on load.
std::vector<std::vector<GtObject>> parse_mot_gt(const std::filesystem::path& path,
                                                int image_width, int image_height);
void write_mot_gt(const std::filesystem::path& path,
                  const std::vector<std::vector<GtObject>>& gt_frames, int image_width,
                  int image_height);

// Tracking results, one object per line:
// frame,id,left,top,width,height,score,-1,-1,-1
std::vector<std::vector<PredObject>> parse_mot_results(const std::filesystem::path& path,
                                                       int image_width, int image_height);
void write_results(const std::filesystem::path& path, const TrackOutput& output,
                   int image_width, int image_height);

// Embedding detections as JSON Lines; one object per line with fields
// frame (>= 1), category, score, box ([cx,cy,w,h] normalized) and embedding.
// The embedding dimension is inferred from the first line and enforced.
std::vector<std::pair<int, std::vector<Detection>>> parse_detections(
    const std::filesystem::path& path);
void write_detections_jsonl(
    const std::filesystem::path& path,
    const std::vector<std::pair<int, std::vector<Detection>>>& frames);

SceneMeta parse_meta(const std::filesystem::path& path);
void write_meta(const std::filesystem::path& path, const SimulatorConfig& config);

// Both sides of a scene from MOTChallenge files, frame counts aligned.
LabeledScene load_scene(const std::filesystem::path& gt_path,
                        const std::filesystem::path& results_path, int image_width,
                        int image_height);

// {"videos": [{"video_id": 1, "frame_ids": [1, 2, ...]}, ...]}
DatasetIndex parse_dataset_index(const std::filesystem::path& path);

void write_batch_spec_jsonl(std::ostream& out, const BatchSpec& batch);

std::string metrics_report_to_json(const MetricsReport& report);
std::string metrics_report_table(const MetricsReport& report);
void write_metrics_report(const std::filesystem::path& path, const MetricsReport& report);

}  // namespace contrack
