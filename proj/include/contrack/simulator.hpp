#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "contrack/metrics.hpp"
#include "contrack/tracker.hpp"

namespace contrack {

struct SimulatorConfig {
  int videos = 1;
  int frames_per_video = 50;
  int identities_per_video = 5;
  int embedding_dim = 16;
  double noise_sigma = 0.0;          // angular spread of observed embeddings
  double occlusion_probability = 0.0;
  int occlusion_min_frames = 1;
  int occlusion_max_frames = 5;
  double miss_probability = 0.0;
  double false_positive_rate = 0.0;  // expected false positives per frame
  double motion_step = 0.02;
  double score_min = 0.6;
  double score_max = 1.0;
  int image_width = 1024;   // power of two keeps the pixel round-trip exact
  int image_height = 1024;
  std::uint64_t seed = 1;

  void validate() const;
};

struct SyntheticSequence {
  int video_id = 0;
  std::vector<std::vector<GtObject>> gt_frames;
  std::vector<std::vector<Detection>> det_frames;
  std::vector<Embedding> latents;  // one unit vector per identity
};

struct SyntheticDataset {
  SimulatorConfig config;
  std::vector<SyntheticSequence> sequences;
};

// Identities follow random-walk box trajectories clipped to the unit square;
// each frame's observed embedding is normalize(latent + sigma * gaussian).
// Occlusion windows suppress detections while the ground-truth annotation
// persists. Fully deterministic per seed.
SyntheticDataset generate(const SimulatorConfig& config);

// Writes gt.txt, dets.jsonl and meta.json into the directory (one
// subdirectory per sequence when the dataset holds several videos).
void export_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir);

}  // namespace contrack
