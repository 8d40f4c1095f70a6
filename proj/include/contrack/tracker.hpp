#pragma once

#include <deque>
#include <span>
#include <utility>
#include <vector>

#include "contrack/assignment.hpp"
#include "contrack/geometry.hpp"

namespace contrack {

struct TrackerConfig {
  double objectness_threshold = 0.5;
  double new_instance_threshold = 0.5;  // the tracking threshold of the new-instance entries
  int memory_length = 20;               // frames kept in the FIFO memory
  int embedding_dim = 0;                // 0 = inferred from the first detection

  void validate() const;
};

struct Detection {
  int category_id = 0;
  double score = 0.0;
  Box box;
  Embedding embedding;
};

// FIFO memory of identity-labeled embeddings, one bucket per frame, at most
// memory_length buckets. Embeddings are stored unit-normalized so similarity
// lookups reduce to dot products, and each bucket keeps them in one
// contiguous buffer. Instance ids are issued strictly increasing and never
// reused.
class MemoryQueue {
 public:
  struct Slot {
    long instance_id = 0;
    Embedding embedding;  // unit norm
  };

  // One frame of remembered embeddings, flattened.
  struct FrameBucket {
    std::vector<long> ids;
    std::vector<double> data;  // ids.size() rows of dim doubles

    std::size_t size() const { return ids.size(); }
    std::size_t dim() const { return ids.empty() ? 0 : data.size() / ids.size(); }
    std::span<const double> embedding(std::size_t i) const {
      return {data.data() + i * dim(), dim()};
    }
  };

  explicit MemoryQueue(int capacity);

  void push_frame(std::vector<Slot> slots);
  const std::deque<FrameBucket>& buckets() const { return buckets_; }
  std::size_t bucket_count() const { return buckets_.size(); }
  int capacity() const { return capacity_; }

  std::vector<long> remembered_ids() const;  // ascending, unique
  long issue_id() { return next_id_++; }
  long peek_next_id() const { return next_id_; }

 private:
  int capacity_;
  long next_id_ = 1;
  std::deque<FrameBucket> buckets_;  // front = oldest
};

// K x (J + K) similarity matrix in maximize mode: column j < J holds the
// per-instance maximum cosine similarity over the memory window; column
// J + r is row r's private new-instance entry valued at the tracking
// threshold and forbidden for every other row.
CostMatrix build_similarity_matrix(std::span<const Detection> detections,
                                   const MemoryQueue& memory, const TrackerConfig& config);

// Solves the augmented matrix and returns one instance id per detection;
// detections matched to their new-instance column receive fresh ids.
std::vector<long> associate(std::span<const Detection> detections, MemoryQueue& memory,
                            const TrackerConfig& config);

struct TrackedObject {
  long instance_id = 0;
  int category_id = 0;
  double score = 0.0;
  Box box;
};

struct FrameTracks {
  int frame_index = 0;
  std::vector<TrackedObject> objects;
};

struct TrackOutput {
  std::vector<FrameTracks> frames;
};

// Online tracker: filters detections by objectness, associates them against
// the memory, then pushes the retained (id, embedding) pairs as a new frame
// bucket. Strictly single-threaded per sequence; frames must arrive in
// increasing order. Skipped frame indices advance the memory window.
class Tracker {
 public:
  explicit Tracker(const TrackerConfig& config);

  std::vector<TrackedObject> step(int frame_index, std::span<const Detection> detections);
  const MemoryQueue& memory() const { return memory_; }
  const TrackerConfig& config() const { return config_; }

 private:
  TrackerConfig config_;
  MemoryQueue memory_;
  int last_frame_ = 0;  // frames are 1-based
};

TrackOutput run_sequence(std::span<const std::pair<int, std::vector<Detection>>> frames,
                         const TrackerConfig& config);

}  // namespace contrack
