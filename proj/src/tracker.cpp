#include "contrack/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "contrack/errors.hpp"

namespace contrack {

namespace {

// Similarity-matrix inner kernel: dots of every packed detection row against
// one remembered embedding. Written with GCC vector extensions so the loop
// vectorizes without reassociation flags; the lane structure fixes the
// summation order, so a given build is always run-to-run reproducible. On
// x86 wider clones are selected at startup.
typedef double Vec4 __attribute__((vector_size(32)));

// rows: k x dim row-major; out0/out1 accumulate the elementwise maximum of
// their current content and the k dot products against the two memory rows.
// Register tile of 4 rows x 2 memories: eight accumulator chains per six
// loads.
#define CONTRACK_DOT_BLOCK2_BODY                                               \
  std::size_t r = 0;                                                           \
  for (; r + 4 <= k; r += 4) {                                                 \
    const double* r0 = rows + r * dim;                                         \
    const double* r1 = r0 + dim;                                               \
    const double* r2 = r1 + dim;                                               \
    const double* r3 = r2 + dim;                                               \
    Vec4 a00{}, a10{}, a20{}, a30{};                                           \
    Vec4 a01{}, a11{}, a21{}, a31{};                                           \
    std::size_t d = 0;                                                         \
    for (; d + 4 <= dim; d += 4) {                                             \
      Vec4 m0, m1, b0, b1, b2, b3;                                             \
      std::memcpy(&m0, mem0 + d, sizeof(m0));                                  \
      std::memcpy(&m1, mem1 + d, sizeof(m1));                                  \
      std::memcpy(&b0, r0 + d, sizeof(b0));                                    \
      std::memcpy(&b1, r1 + d, sizeof(b1));                                    \
      std::memcpy(&b2, r2 + d, sizeof(b2));                                    \
      std::memcpy(&b3, r3 + d, sizeof(b3));                                    \
      a00 += b0 * m0;                                                          \
      a10 += b1 * m0;                                                          \
      a20 += b2 * m0;                                                          \
      a30 += b3 * m0;                                                          \
      a01 += b0 * m1;                                                          \
      a11 += b1 * m1;                                                          \
      a21 += b2 * m1;                                                          \
      a31 += b3 * m1;                                                          \
    }                                                                          \
    double s00 = (a00[0] + a00[1]) + (a00[2] + a00[3]);                        \
    double s10 = (a10[0] + a10[1]) + (a10[2] + a10[3]);                        \
    double s20 = (a20[0] + a20[1]) + (a20[2] + a20[3]);                        \
    double s30 = (a30[0] + a30[1]) + (a30[2] + a30[3]);                        \
    double s01 = (a01[0] + a01[1]) + (a01[2] + a01[3]);                        \
    double s11 = (a11[0] + a11[1]) + (a11[2] + a11[3]);                        \
    double s21 = (a21[0] + a21[1]) + (a21[2] + a21[3]);                        \
    double s31 = (a31[0] + a31[1]) + (a31[2] + a31[3]);                        \
    for (; d < dim; ++d) {                                                     \
      s00 += r0[d] * mem0[d];                                                  \
      s10 += r1[d] * mem0[d];                                                  \
      s20 += r2[d] * mem0[d];                                                  \
      s30 += r3[d] * mem0[d];                                                  \
      s01 += r0[d] * mem1[d];                                                  \
      s11 += r1[d] * mem1[d];                                                  \
      s21 += r2[d] * mem1[d];                                                  \
      s31 += r3[d] * mem1[d];                                                  \
    }                                                                          \
    if (s00 > out0[r]) out0[r] = s00;                                         \
    if (s10 > out0[r + 1]) out0[r + 1] = s10;                                  \
    if (s20 > out0[r + 2]) out0[r + 2] = s20;                                  \
    if (s30 > out0[r + 3]) out0[r + 3] = s30;                                  \
    if (s01 > out1[r]) out1[r] = s01;                                          \
    if (s11 > out1[r + 1]) out1[r + 1] = s11;                                  \
    if (s21 > out1[r + 2]) out1[r + 2] = s21;                                  \
    if (s31 > out1[r + 3]) out1[r + 3] = s31;                                  \
  }                                                                            \
  for (; r < k; ++r) {                                                         \
    const double* row = rows + r * dim;                                        \
    Vec4 a0{}, a1{};                                                           \
    std::size_t d = 0;                                                         \
    for (; d + 4 <= dim; d += 4) {                                             \
      Vec4 m0, m1, b;                                                          \
      std::memcpy(&m0, mem0 + d, sizeof(m0));                                  \
      std::memcpy(&m1, mem1 + d, sizeof(m1));                                  \
      std::memcpy(&b, row + d, sizeof(b));                                     \
      a0 += b * m0;                                                            \
      a1 += b * m1;                                                            \
    }                                                                          \
    double s0 = (a0[0] + a0[1]) + (a0[2] + a0[3]);                             \
    double s1 = (a1[0] + a1[1]) + (a1[2] + a1[3]);                             \
    for (; d < dim; ++d) {                                                     \
      s0 += row[d] * mem0[d];                                                  \
      s1 += row[d] * mem1[d];                                                  \
    }                                                                          \
    if (s0 > out0[r]) out0[r] = s0;                                            \
    if (s1 > out1[r]) out1[r] = s1;                                            \
  }

using DotBlock2Fn = void (*)(const double* rows, std::size_t k, const double* mem0,
                             const double* mem1, std::size_t dim, double* out0,
                             double* out1);

void dot_block2_portable(const double* rows, std::size_t k, const double* mem0,
                         const double* mem1, std::size_t dim, double* out0, double* out1) {
  CONTRACK_DOT_BLOCK2_BODY
}

#if defined(__x86_64__) && defined(__GNUC__)
__attribute__((target("avx2,fma")))
void dot_block2_avx2(const double* rows, std::size_t k, const double* mem0,
                     const double* mem1, std::size_t dim, double* out0, double* out1) {
  CONTRACK_DOT_BLOCK2_BODY
}

DotBlock2Fn pick_dot_block2() {
  __builtin_cpu_init();
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    return dot_block2_avx2;
  }
  return dot_block2_portable;
}
#else
DotBlock2Fn pick_dot_block2() { return dot_block2_portable; }
#endif

#undef CONTRACK_DOT_BLOCK2_BODY

const DotBlock2Fn dot_block2 = pick_dot_block2();

}  // namespace

void TrackerConfig::validate() const {
  if (!(objectness_threshold >= 0.0 && objectness_threshold <= 1.0)) {
    throw ValidationError("objectness threshold must lie in [0, 1]");
  }
  if (!std::isfinite(new_instance_threshold)) {
    throw ValidationError("new-instance threshold must be finite");
  }
  if (memory_length < 1) throw ValidationError("memory length must be >= 1");
  if (embedding_dim < 0) throw ValidationError("embedding dimension must be >= 0");
}

MemoryQueue::MemoryQueue(int capacity) : capacity_(capacity) {
  if (capacity < 1) throw ValidationError("memory capacity must be >= 1");
}

void MemoryQueue::push_frame(std::vector<Slot> slots) {
  FrameBucket bucket;
  bucket.ids.reserve(slots.size());
  for (const Slot& slot : slots) {
    if (!slots.empty() && slot.embedding.size() != slots.front().embedding.size()) {
      throw ValidationError("memory bucket embeddings must share one dimension");
    }
    bucket.ids.push_back(slot.instance_id);
    bucket.data.insert(bucket.data.end(), slot.embedding.begin(), slot.embedding.end());
  }
  buckets_.push_back(std::move(bucket));
  while (buckets_.size() > static_cast<std::size_t>(capacity_)) {
    buckets_.pop_front();
  }
}

std::vector<long> MemoryQueue::remembered_ids() const {
  std::vector<long> ids;
  for (const auto& bucket : buckets_) {
    ids.insert(ids.end(), bucket.ids.begin(), bucket.ids.end());
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

CostMatrix build_similarity_matrix(std::span<const Detection> detections,
                                   const MemoryQueue& memory, const TrackerConfig& config) {
  config.validate();
  const std::size_t k = detections.size();
  const std::vector<long> ids = memory.remembered_ids();
  const std::size_t j = ids.size();

  if (k == 0) return CostMatrix(0, j, AssignMode::kMaximize);

  std::size_t dim = config.embedding_dim > 0 ? static_cast<std::size_t>(config.embedding_dim) : 0;
  for (const Detection& det : detections) {
    if (dim == 0) dim = det.embedding.size();
    if (det.embedding.size() != dim) {
      throw ValidationError("detection embedding dimension mismatch");
    }
  }

  std::vector<double> det_units(k * dim);
  for (std::size_t r = 0; r < k; ++r) {
    const Embedding unit = normalized(detections[r].embedding);
    std::copy(unit.begin(), unit.end(), det_units.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }

  CostMatrix m(k, j + k, AssignMode::kMaximize);
  if (j > 0) {
    for (const auto& bucket : memory.buckets()) {
      if (bucket.size() > 0 && bucket.dim() != dim) {
        throw ValidationError("memory embedding dimension mismatch");
      }
    }
    std::vector<double> best(j * k, -1.0);  // column-major: per-column runs stay contiguous
    for (const auto& bucket : memory.buckets()) {
      const auto column = [&](std::size_t s) {
        return best.data() + k * static_cast<std::size_t>(std::lower_bound(
                                     ids.begin(), ids.end(), bucket.ids[s]) -
                                 ids.begin());
      };
      std::size_t s = 0;
      for (; s + 2 <= bucket.size(); s += 2) {
        dot_block2(det_units.data(), k, bucket.data.data() + s * dim,
                   bucket.data.data() + (s + 1) * dim, dim, column(s), column(s + 1));
      }
      if (s < bucket.size()) {
        const double* mem = bucket.data.data() + s * dim;
        // Same column twice: the second max pass is idempotent.
        dot_block2(det_units.data(), k, mem, mem, dim, column(s), column(s));
      }
    }
    for (std::size_t r = 0; r < k; ++r) {
      for (std::size_t c = 0; c < j; ++c) {
        m.set(r, c, std::clamp(best[c * k + r], -1.0, 1.0));
      }
    }
  }
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      if (r == c) {
        m.set(r, j + c, config.new_instance_threshold);
      } else {
        m.set_forbidden(r, j + c);
      }
    }
  }
  return m;
}

std::vector<long> associate(std::span<const Detection> detections, MemoryQueue& memory,
                            const TrackerConfig& config) {
  const std::vector<long> ids = memory.remembered_ids();
  const CostMatrix m = build_similarity_matrix(detections, memory, config);
  const Assignment solution = solve_assignment(m);

  std::vector<long> assigned(detections.size(), -1);
  for (const auto& [row, col] : solution.pairs) {
    if (col < ids.size()) assigned[row] = ids[col];
  }
  // Fresh ids in detection order keeps the numbering deterministic.
  for (std::size_t r = 0; r < assigned.size(); ++r) {
    if (assigned[r] < 0) assigned[r] = memory.issue_id();
  }
  return assigned;
}

Tracker::Tracker(const TrackerConfig& config)
    : config_(config), memory_(config.memory_length) {
  config_.validate();
}

std::vector<TrackedObject> Tracker::step(int frame_index,
                                         std::span<const Detection> detections) {
  if (frame_index <= last_frame_) {
    throw ValidationError("out-of-order frame index " + std::to_string(frame_index) +
                          " after " + std::to_string(last_frame_));
  }
  // Missing frames still age the memory window.
  for (int f = last_frame_ + 1; f < frame_index; ++f) memory_.push_frame({});
  last_frame_ = frame_index;

  std::vector<Detection> retained;
  for (const Detection& det : detections) {
    if (det.score >= config_.objectness_threshold) retained.push_back(det);
  }

  const std::vector<long> ids = associate(retained, memory_, config_);

  std::vector<MemoryQueue::Slot> bucket;
  std::vector<TrackedObject> out;
  bucket.reserve(retained.size());
  out.reserve(retained.size());
  for (std::size_t i = 0; i < retained.size(); ++i) {
    bucket.push_back({ids[i], normalized(retained[i].embedding)});
    out.push_back({ids[i], retained[i].category_id, retained[i].score, retained[i].box});
  }
  memory_.push_frame(std::move(bucket));
  return out;
}

TrackOutput run_sequence(std::span<const std::pair<int, std::vector<Detection>>> frames,
                         const TrackerConfig& config) {
  Tracker tracker(config);
  TrackOutput output;
  for (const auto& [frame_index, detections] : frames) {
    output.frames.push_back({frame_index, tracker.step(frame_index, detections)});
  }
  return output;
}

}  // namespace contrack
