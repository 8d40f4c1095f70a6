#include "contrack/sampler.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "contrack/errors.hpp"
#include "contrack/random.hpp"

namespace contrack {

void DatasetIndex::validate() const {
  std::set<int> ids;
  for (const VideoInfo& v : videos) {
    if (!ids.insert(v.video_id).second) {
      throw ValidationError("dataset index: duplicate video id " + std::to_string(v.video_id));
    }
    std::set<int> frames(v.frame_ids.begin(), v.frame_ids.end());
    if (frames.size() != v.frame_ids.size()) {
      throw ValidationError("dataset index: duplicate frame id in video " +
                            std::to_string(v.video_id));
    }
  }
}

BatchSpec sample_tracking_batch(const DatasetIndex& index, int num_videos, int num_frames,
                                std::uint64_t seed) {
  index.validate();
  if (num_videos <= 0 || num_frames <= 0) {
    throw ValidationError("num_videos and num_frames must be positive");
  }

  // Videos shorter than num_frames are not eligible; sampling them would
  // break the distinct-frames guarantee.
  std::vector<std::size_t> eligible;
  for (std::size_t v = 0; v < index.videos.size(); ++v) {
    if (static_cast<int>(index.videos[v].frame_ids.size()) >= num_frames) {
      eligible.push_back(v);
    }
  }
  if (static_cast<int>(eligible.size()) < num_videos) {
    throw ValidationError("need " + std::to_string(num_videos) + " videos with >= " +
                          std::to_string(num_frames) + " frames, only " +
                          std::to_string(eligible.size()) + " eligible");
  }

  Rng rng(seed);
  BatchSpec batch;
  const std::vector<int> picked =
      rng.sample_without_replacement(static_cast<int>(eligible.size()), num_videos);
  for (const int e : picked) {
    const VideoInfo& video = index.videos[eligible[static_cast<std::size_t>(e)]];
    std::vector<int> frame_slots = rng.sample_without_replacement(
        static_cast<int>(video.frame_ids.size()), num_frames);
    std::vector<int> frames;
    frames.reserve(frame_slots.size());
    for (const int s : frame_slots) frames.push_back(video.frame_ids[static_cast<std::size_t>(s)]);
    std::sort(frames.begin(), frames.end());
    for (const int f : frames) batch.items.push_back({video.video_id, f, -1});
  }
  return batch;
}

BatchSpec build_pretraining_batch(const DatasetIndex& index, int n, std::uint64_t seed) {
  index.validate();
  if (n <= 0) throw ValidationError("pre-training batch size must be positive");
  if (n > static_cast<int>(index.videos.size())) {
    throw ValidationError("pre-training batch of " + std::to_string(n) + " images from only " +
                          std::to_string(index.videos.size()));
  }
  Rng rng(seed);
  BatchSpec batch;
  const std::vector<int> picked =
      rng.sample_without_replacement(static_cast<int>(index.videos.size()), n);
  for (const int v : picked) {
    const VideoInfo& image = index.videos[static_cast<std::size_t>(v)];
    const int frame = image.frame_ids.empty() ? 0 : image.frame_ids.front();
    batch.items.push_back({image.video_id, frame, 0});
    batch.items.push_back({image.video_id, frame, 1});
  }
  return batch;
}

}  // namespace contrack
