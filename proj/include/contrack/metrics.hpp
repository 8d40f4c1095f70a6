#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <vector>

#include "contrack/geometry.hpp"

namespace contrack {

struct GtObject {
  long track_id = 0;
  int category = 1;
  Box box;
};

struct PredObject {
  long instance_id = 0;
  int category = 1;
  Box box;
  double score = 1.0;
};

// Frame-aligned ground truth and predictions; frame f lives at index f-1.
struct LabeledScene {
  std::vector<std::vector<GtObject>> gt_frames;
  std::vector<std::vector<PredObject>> pred_frames;

  std::size_t frame_count() const { return gt_frames.size(); }
  void validate() const;  // equal frame counts, per-frame unique ids
};

struct ClearNumbers {
  long gt = 0;
  long tp = 0;
  long fp = 0;
  long fn = 0;
  long idsw = 0;
  long frag = 0;
  long mt = 0;
  long pt = 0;
  long ml = 0;
  double motp_sum = 0.0;  // summed match IoU

  double mota() const { return 1.0 - static_cast<double>(fp + fn + idsw) / static_cast<double>(gt); }
  double motp() const { return tp > 0 ? motp_sum / static_cast<double>(tp) : 0.0; }
  double recall() const { return gt > 0 ? static_cast<double>(tp) / static_cast<double>(gt) : 0.0; }
  double precision() const {
    return tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  }
};

struct IdfNumbers {
  long idtp = 0;
  long idfp = 0;
  long idfn = 0;

  double idf1() const {
    const long denom = 2 * idtp + idfp + idfn;
    return denom > 0 ? 2.0 * static_cast<double>(idtp) / static_cast<double>(denom) : 0.0;
  }
  double idp() const {
    return idtp + idfp > 0 ? static_cast<double>(idtp) / static_cast<double>(idtp + idfp) : 0.0;
  }
  double idr() const {
    return idtp + idfn > 0 ? static_cast<double>(idtp) / static_cast<double>(idtp + idfn) : 0.0;
  }
};

inline constexpr std::size_t kHotaAlphaCount = 19;

// alpha = 0.05, 0.10, ..., 0.95
std::array<double, kHotaAlphaCount> hota_alphas();

struct HotaNumbers {
  std::array<long, kHotaAlphaCount> tp{};
  std::array<long, kHotaAlphaCount> fp{};
  std::array<long, kHotaAlphaCount> fn{};
  std::array<double, kHotaAlphaCount> ass_sum{};  // sum over TPs of TPA/(TPA+FNA+FPA)

  double det_a(std::size_t a) const;
  double ass_a(std::size_t a) const;
  double hota_a(std::size_t a) const;
  double det_a() const;  // means over the alpha grid
  double ass_a() const;
  double hota() const;
};

// CLEAR-MOT per category present in the ground truth: previous-frame matches
// are carried over while their IoU stays above the threshold, the remainder
// is matched by minimum total (1 - IoU) among pairs above the threshold.
// Identity switches compare against the id matched in the track's previous
// matched frame. Throws when the scene has no ground truth at all.
std::map<int, ClearNumbers> clear_mot(const LabeledScene& scene, double iou_threshold = 0.5);

// Trajectory-level identity measure: one global bipartite matching between
// ground-truth and predicted trajectories maximizing per-frame overlaps.
std::map<int, IdfNumbers> idf1_metrics(const LabeledScene& scene, double iou_threshold = 0.5);

// Higher-order tracking accuracy over the 19-point alpha grid; per-frame
// matchings prefer pairs with high global alignment, IoU as tie-break.
std::map<int, HotaNumbers> hota_metrics(const LabeledScene& scene);

struct CategoryReport {
  ClearNumbers clear;
  IdfNumbers idf;
  HotaNumbers hota;
};

struct ClassMeans {
  double mmota = 0.0;
  double midf1 = 0.0;
  double mhota = 0.0;
};

// Unweighted arithmetic mean over the categories present in the ground
// truth; throws when the map is empty.
ClassMeans per_class_mean(const std::map<int, CategoryReport>& per_category);

struct MetricsReport {
  std::map<int, CategoryReport> per_category;
  CategoryReport overall;  // counts pooled across categories
  ClassMeans means;
};

MetricsReport evaluate_scene(const LabeledScene& scene, double iou_threshold = 0.5);

}  // namespace contrack
