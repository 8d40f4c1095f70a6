#include "contrack/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <string>

#include "contrack/assignment.hpp"
#include "contrack/errors.hpp"

namespace contrack {

void LabeledScene::validate() const {
  if (gt_frames.size() != pred_frames.size()) {
    throw ValidationError("scene: ground-truth and prediction frame counts differ");
  }
  for (std::size_t f = 0; f < gt_frames.size(); ++f) {
    std::set<long> gt_ids;
    for (const GtObject& g : gt_frames[f]) {
      if (!gt_ids.insert(g.track_id).second) {
        throw ValidationError("scene: duplicate ground-truth id in frame " +
                              std::to_string(f + 1));
      }
    }
    std::set<long> pred_ids;
    for (const PredObject& p : pred_frames[f]) {
      if (!pred_ids.insert(p.instance_id).second) {
        throw ValidationError("scene: duplicate prediction id in frame " +
                              std::to_string(f + 1));
      }
    }
  }
}

std::array<double, kHotaAlphaCount> hota_alphas() {
  std::array<double, kHotaAlphaCount> alphas{};
  for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
    alphas[a] = 0.05 * static_cast<double>(a + 1);
  }
  return alphas;
}

double HotaNumbers::det_a(std::size_t a) const {
  const long denom = tp[a] + fn[a] + fp[a];
  return denom > 0 ? static_cast<double>(tp[a]) / static_cast<double>(denom) : 0.0;
}

double HotaNumbers::ass_a(std::size_t a) const {
  return tp[a] > 0 ? ass_sum[a] / static_cast<double>(tp[a]) : 0.0;
}

double HotaNumbers::hota_a(std::size_t a) const { return std::sqrt(det_a(a) * ass_a(a)); }

double HotaNumbers::det_a() const {
  double sum = 0.0;
  for (std::size_t a = 0; a < kHotaAlphaCount; ++a) sum += det_a(a);
  return sum / static_cast<double>(kHotaAlphaCount);
}

double HotaNumbers::ass_a() const {
  double sum = 0.0;
  for (std::size_t a = 0; a < kHotaAlphaCount; ++a) sum += ass_a(a);
  return sum / static_cast<double>(kHotaAlphaCount);
}

double HotaNumbers::hota() const {
  double sum = 0.0;
  for (std::size_t a = 0; a < kHotaAlphaCount; ++a) sum += hota_a(a);
  return sum / static_cast<double>(kHotaAlphaCount);
}

namespace {

// Scene restricted to one category, ids mapped to dense indices.
struct CategoryView {
  std::vector<long> gt_ids;    // dense -> original
  std::vector<long> pred_ids;  // dense -> original
  // per frame: (dense id, box)
  std::vector<std::vector<std::pair<std::size_t, Box>>> gt;
  std::vector<std::vector<std::pair<std::size_t, Box>>> pred;
};

CategoryView make_view(const LabeledScene& scene, int category) {
  CategoryView view;
  view.gt.resize(scene.frame_count());
  view.pred.resize(scene.frame_count());
  std::map<long, std::size_t> gt_index;
  std::map<long, std::size_t> pred_index;
  for (std::size_t f = 0; f < scene.frame_count(); ++f) {
    for (const GtObject& g : scene.gt_frames[f]) {
      if (g.category != category) continue;
      auto [it, inserted] = gt_index.emplace(g.track_id, view.gt_ids.size());
      if (inserted) view.gt_ids.push_back(g.track_id);
      view.gt[f].emplace_back(it->second, g.box);
    }
    for (const PredObject& p : scene.pred_frames[f]) {
      if (p.category != category) continue;
      auto [it, inserted] = pred_index.emplace(p.instance_id, view.pred_ids.size());
      if (inserted) view.pred_ids.push_back(p.instance_id);
      view.pred[f].emplace_back(it->second, p.box);
    }
  }
  return view;
}

std::set<int> gt_categories(const LabeledScene& scene) {
  std::set<int> categories;
  for (const auto& frame : scene.gt_frames) {
    for (const GtObject& g : frame) categories.insert(g.category);
  }
  return categories;
}

constexpr long kNever = -1;

ClearNumbers clear_for_category(const CategoryView& view, double iou_threshold) {
  ClearNumbers out;
  const std::size_t frames = view.gt.size();
  const std::size_t num_tracks = view.gt_ids.size();

  std::vector<long> prev_frame_match(num_tracks, kNever);  // pred matched in frame f-1
  std::vector<long> last_match(num_tracks, kNever);        // pred matched most recently
  std::vector<long> gt_frames_count(num_tracks, 0);
  std::vector<long> matched_frames(num_tracks, 0);
  std::vector<char> in_covered_run(num_tracks, 0);
  std::vector<long> covered_runs(num_tracks, 0);

  for (std::size_t f = 0; f < frames; ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    out.gt += static_cast<long>(gts.size());

    std::vector<char> gt_done(gts.size(), 0);
    std::vector<char> pred_done(preds.size(), 0);
    std::vector<std::pair<std::size_t, std::size_t>> matches;  // (gt slot, pred slot)

    // Carry over yesterday's correspondences that still overlap.
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      const long carried = prev_frame_match[gts[gi].first];
      if (carried == kNever) continue;
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        if (pred_done[pi] || static_cast<long>(preds[pi].first) != carried) continue;
        if (iou(gts[gi].second, preds[pi].second) >= iou_threshold) {
          matches.emplace_back(gi, pi);
          gt_done[gi] = 1;
          pred_done[pi] = 1;
        }
        break;
      }
    }

    // Remaining objects: minimum total distance among pairs above threshold.
    std::vector<std::size_t> free_gt, free_pred;
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      if (!gt_done[gi]) free_gt.push_back(gi);
    }
    for (std::size_t pi = 0; pi < preds.size(); ++pi) {
      if (!pred_done[pi]) free_pred.push_back(pi);
    }
    if (!free_gt.empty() && !free_pred.empty()) {
      CostMatrix cost(free_gt.size(), free_pred.size(), AssignMode::kMinimize);
      for (std::size_t r = 0; r < free_gt.size(); ++r) {
        for (std::size_t c = 0; c < free_pred.size(); ++c) {
          const double overlap = iou(gts[free_gt[r]].second, preds[free_pred[c]].second);
          if (overlap >= iou_threshold) {
            cost.set(r, c, 1.0 - overlap);
          } else {
            cost.set_forbidden(r, c);
          }
        }
      }
      for (const auto& [r, c] : solve_assignment(cost).pairs) {
        matches.emplace_back(free_gt[r], free_pred[c]);
        gt_done[free_gt[r]] = 1;
        pred_done[free_pred[c]] = 1;
      }
    }

    std::vector<long> current_match(num_tracks, kNever);
    for (const auto& [gi, pi] : matches) {
      const std::size_t track = gts[gi].first;
      const long pred_id = static_cast<long>(preds[pi].first);
      ++out.tp;
      out.motp_sum += iou(gts[gi].second, preds[pi].second);
      if (last_match[track] != kNever && last_match[track] != pred_id) ++out.idsw;
      last_match[track] = pred_id;
      current_match[track] = pred_id;
      ++matched_frames[track];
      if (!in_covered_run[track]) {
        ++covered_runs[track];
        in_covered_run[track] = 1;
      }
    }
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      const std::size_t track = gts[gi].first;
      ++gt_frames_count[track];
      if (!gt_done[gi]) {
        ++out.fn;
        in_covered_run[track] = 0;
      }
    }
    out.fp += static_cast<long>(std::count(pred_done.begin(), pred_done.end(), 0));

    for (std::size_t t = 0; t < num_tracks; ++t) prev_frame_match[t] = current_match[t];
  }

  for (std::size_t t = 0; t < num_tracks; ++t) {
    if (gt_frames_count[t] == 0) continue;
    if (covered_runs[t] > 0) out.frag += covered_runs[t] - 1;
    const double coverage =
        static_cast<double>(matched_frames[t]) / static_cast<double>(gt_frames_count[t]);
    if (coverage >= 0.8) {
      ++out.mt;
    } else if (coverage <= 0.2) {
      ++out.ml;
    } else {
      ++out.pt;
    }
  }
  return out;
}

IdfNumbers idf1_for_category(const CategoryView& view, double iou_threshold) {
  const std::size_t num_gt = view.gt_ids.size();
  const std::size_t num_pred = view.pred_ids.size();
  std::vector<long> gt_len(num_gt, 0), pred_len(num_pred, 0);
  std::vector<long> potential(num_gt * num_pred, 0);  // frames with IoU >= threshold

  for (std::size_t f = 0; f < view.gt.size(); ++f) {
    for (const auto& [g, gbox] : view.gt[f]) ++gt_len[g];
    for (const auto& [p, pbox] : view.pred[f]) ++pred_len[p];
    for (const auto& [g, gbox] : view.gt[f]) {
      for (const auto& [p, pbox] : view.pred[f]) {
        if (iou(gbox, pbox) >= iou_threshold) ++potential[g * num_pred + p];
      }
    }
  }

  long total_gt = 0, total_pred = 0;
  for (const long v : gt_len) total_gt += v;
  for (const long v : pred_len) total_pred += v;

  IdfNumbers out;
  long idtp = 0;
  if (num_gt > 0 && num_pred > 0) {
    // Padded square problem: unmatched trajectories pay their full length.
    const std::size_t n = num_gt + num_pred;
    CostMatrix cost(n, n, AssignMode::kMinimize);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        double value = 0.0;
        if (r < num_gt && c < num_pred) {
          value = static_cast<double>(gt_len[r] + pred_len[c] -
                                      2 * potential[r * num_pred + c]);
        } else if (r < num_gt) {
          value = static_cast<double>(gt_len[r]);
        } else if (c < num_pred) {
          value = static_cast<double>(pred_len[c]);
        }
        cost.set(r, c, value);
      }
    }
    for (const auto& [r, c] : solve_assignment(cost).pairs) {
      if (r < num_gt && c < num_pred) idtp += potential[r * num_pred + c];
    }
  }
  out.idtp = idtp;
  out.idfn = total_gt - idtp;
  out.idfp = total_pred - idtp;
  return out;
}

HotaNumbers hota_for_category(const CategoryView& view) {
  const std::array<double, kHotaAlphaCount> alphas = hota_alphas();
  const std::size_t num_gt = view.gt_ids.size();
  const std::size_t num_pred = view.pred_ids.size();
  const std::size_t frames = view.gt.size();

  // Pass 1: soft co-occurrence counts for the global alignment scores.
  std::vector<double> potential(num_gt * num_pred, 0.0);
  std::vector<long> gt_count(num_gt, 0), pred_count(num_pred, 0);
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    std::vector<double> sim(gts.size() * preds.size(), 0.0);
    std::vector<double> row_sum(gts.size(), 0.0), col_sum(preds.size(), 0.0);
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        const double s = iou(gts[gi].second, preds[pi].second);
        sim[gi * preds.size() + pi] = s;
        row_sum[gi] += s;
        col_sum[pi] += s;
      }
    }
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        const double s = sim[gi * preds.size() + pi];
        const double denom = row_sum[gi] + col_sum[pi] - s;
        if (denom > 1e-12 && s > 0.0) {
          potential[gts[gi].first * num_pred + preds[pi].first] += s / denom;
        }
      }
    }
    for (const auto& [g, box] : gts) ++gt_count[g];
    for (const auto& [p, box] : preds) ++pred_count[p];
  }
  std::vector<double> alignment(num_gt * num_pred, 0.0);
  for (std::size_t g = 0; g < num_gt; ++g) {
    for (std::size_t p = 0; p < num_pred; ++p) {
      const double pot = potential[g * num_pred + p];
      alignment[g * num_pred + p] =
          pot / (static_cast<double>(gt_count[g] + pred_count[p]) - pot);
    }
  }

  // Pass 2: per alpha, per frame, match by alignment with IoU tie-break.
  HotaNumbers out;
  std::vector<std::vector<long>> match_count(
      kHotaAlphaCount, std::vector<long>(num_gt * num_pred, 0));
  for (std::size_t f = 0; f < frames; ++f) {
    const auto& gts = view.gt[f];
    const auto& preds = view.pred[f];
    std::vector<double> sim(gts.size() * preds.size(), 0.0);
    for (std::size_t gi = 0; gi < gts.size(); ++gi) {
      for (std::size_t pi = 0; pi < preds.size(); ++pi) {
        sim[gi * preds.size() + pi] = iou(gts[gi].second, preds[pi].second);
      }
    }
    for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
      long tp_here = 0;
      if (!gts.empty() && !preds.empty()) {
        CostMatrix score(gts.size(), preds.size(), AssignMode::kMaximize);
        bool any_allowed = false;
        for (std::size_t gi = 0; gi < gts.size(); ++gi) {
          for (std::size_t pi = 0; pi < preds.size(); ++pi) {
            const double s = sim[gi * preds.size() + pi];
            if (s >= alphas[a]) {
              score.set(gi, pi,
                        alignment[gts[gi].first * num_pred + preds[pi].first] + 1e-9 * s);
              any_allowed = true;
            } else {
              score.set_forbidden(gi, pi);
            }
          }
        }
        if (any_allowed) {
          for (const auto& [gi, pi] : solve_assignment(score).pairs) {
            ++match_count[a][gts[gi].first * num_pred + preds[pi].first];
            ++tp_here;
          }
        }
      }
      out.tp[a] += tp_here;
      out.fn[a] += static_cast<long>(gts.size()) - tp_here;
      out.fp[a] += static_cast<long>(preds.size()) - tp_here;
    }
  }

  for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
    double sum = 0.0;
    for (std::size_t g = 0; g < num_gt; ++g) {
      for (std::size_t p = 0; p < num_pred; ++p) {
        const long m = match_count[a][g * num_pred + p];
        if (m == 0) continue;
        const double denom = static_cast<double>(gt_count[g] + pred_count[p] - m);
        sum += static_cast<double>(m) * (static_cast<double>(m) / denom);
      }
    }
    out.ass_sum[a] = sum;
  }
  return out;
}

void require_ground_truth(const std::set<int>& categories) {
  if (categories.empty()) {
    throw ValidationError("scene has no ground-truth objects");
  }
}

void validate_threshold(double iou_threshold) {
  if (!(iou_threshold > 0.0 && iou_threshold < 1.0)) {
    throw ValidationError("IoU threshold must lie in (0, 1)");
  }
}

}  // namespace

std::map<int, ClearNumbers> clear_mot(const LabeledScene& scene, double iou_threshold) {
  scene.validate();
  validate_threshold(iou_threshold);
  const std::set<int> categories = gt_categories(scene);
  require_ground_truth(categories);
  std::map<int, ClearNumbers> out;
  for (const int c : categories) {
    out[c] = clear_for_category(make_view(scene, c), iou_threshold);
  }
  return out;
}

std::map<int, IdfNumbers> idf1_metrics(const LabeledScene& scene, double iou_threshold) {
  scene.validate();
  validate_threshold(iou_threshold);
  const std::set<int> categories = gt_categories(scene);
  require_ground_truth(categories);
  std::map<int, IdfNumbers> out;
  for (const int c : categories) {
    out[c] = idf1_for_category(make_view(scene, c), iou_threshold);
  }
  return out;
}

std::map<int, HotaNumbers> hota_metrics(const LabeledScene& scene) {
  scene.validate();
  const std::set<int> categories = gt_categories(scene);
  require_ground_truth(categories);
  std::map<int, HotaNumbers> out;
  for (const int c : categories) {
    out[c] = hota_for_category(make_view(scene, c));
  }
  return out;
}

ClassMeans per_class_mean(const std::map<int, CategoryReport>& per_category) {
  if (per_category.empty()) {
    throw ValidationError("per-class mean needs at least one category");
  }
  ClassMeans means;
  for (const auto& [category, report] : per_category) {
    means.mmota += report.clear.mota();
    means.midf1 += report.idf.idf1();
    means.mhota += report.hota.hota();
  }
  const double n = static_cast<double>(per_category.size());
  means.mmota /= n;
  means.midf1 /= n;
  means.mhota /= n;
  return means;
}

MetricsReport evaluate_scene(const LabeledScene& scene, double iou_threshold) {
  MetricsReport report;
  const auto clear = clear_mot(scene, iou_threshold);
  const auto idf = idf1_metrics(scene, iou_threshold);
  const auto hota = hota_metrics(scene);
  for (const auto& [category, numbers] : clear) {
    CategoryReport& cr = report.per_category[category];
    cr.clear = numbers;
    cr.idf = idf.at(category);
    cr.hota = hota.at(category);

    report.overall.clear.gt += numbers.gt;
    report.overall.clear.tp += numbers.tp;
    report.overall.clear.fp += numbers.fp;
    report.overall.clear.fn += numbers.fn;
    report.overall.clear.idsw += numbers.idsw;
    report.overall.clear.frag += numbers.frag;
    report.overall.clear.mt += numbers.mt;
    report.overall.clear.pt += numbers.pt;
    report.overall.clear.ml += numbers.ml;
    report.overall.clear.motp_sum += numbers.motp_sum;
    report.overall.idf.idtp += cr.idf.idtp;
    report.overall.idf.idfp += cr.idf.idfp;
    report.overall.idf.idfn += cr.idf.idfn;
    for (std::size_t a = 0; a < kHotaAlphaCount; ++a) {
      report.overall.hota.tp[a] += cr.hota.tp[a];
      report.overall.hota.fp[a] += cr.hota.fp[a];
      report.overall.hota.fn[a] += cr.hota.fn[a];
      report.overall.hota.ass_sum[a] += cr.hota.ass_sum[a];
    }
  }
  report.means = per_class_mean(report.per_category);
  return report;
}

}  // namespace contrack
