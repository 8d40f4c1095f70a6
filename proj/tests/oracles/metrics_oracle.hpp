#pragma once

// Straightforward re-implementations of the tracking metrics driven by
// exhaustive per-frame matching enumeration. Deliberately independent of
// src/metrics.cpp: separate grouping, separate bookkeeping, no Hungarian.

#include <map>

#include "contrack/metrics.hpp"

namespace contrack::oracle {

struct ClearOracle {
  long gt = 0, tp = 0, fp = 0, fn = 0, idsw = 0, frag = 0, mt = 0, pt = 0, ml = 0;
  double motp_sum = 0.0;
};

struct IdfOracle {
  long idtp = 0, idfp = 0, idfn = 0;
};

struct HotaOracle {
  std::array<long, kHotaAlphaCount> tp{}, fp{}, fn{};
  std::array<double, kHotaAlphaCount> ass_sum{};
};

std::map<int, ClearOracle> clear_oracle(const LabeledScene& scene, double iou_threshold);
std::map<int, IdfOracle> idf1_oracle(const LabeledScene& scene, double iou_threshold);
std::map<int, HotaOracle> hota_oracle(const LabeledScene& scene);

}  // namespace contrack::oracle
