#pragma once

#include <cstdint>
#include <vector>

namespace contrack {

struct VideoInfo {
  int video_id = 0;
  std::vector<int> frame_ids;
};

// For detection datasets each image is a one-frame pseudo-video.
struct DatasetIndex {
  std::vector<VideoInfo> videos;

  void validate() const;  // unique video ids, unique frame ids per video
};

struct BatchItem {
  int video_id = 0;
  int frame_id = 0;
  int view_tag = -1;  // 0/1 for two-view pre-training batches, -1 otherwise
};

struct BatchSpec {
  std::vector<BatchItem> items;
};

// Uniformly draws num_videos videos without replacement among videos with at
// least num_frames frames, then num_frames distinct frames within each.
// Deterministic for a fixed seed. Items are grouped per video in draw order,
// frames sorted ascending.
BatchSpec sample_tracking_batch(const DatasetIndex& index, int num_videos, int num_frames,
                                std::uint64_t seed);

// Uniformly draws n images without replacement and emits each twice with view
// tags 0 and 1. Downstream contrastive batches key the two views of an image
// by (video_id = image, frame_id = view tag), which makes objects shared
// between the views positives of each other.
BatchSpec build_pretraining_batch(const DatasetIndex& index, int n, std::uint64_t seed);

}  // namespace contrack
