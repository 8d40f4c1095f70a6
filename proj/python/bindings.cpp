#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "contrack/assignment.hpp"
#include "contrack/config.hpp"
#include "contrack/contrastive.hpp"
#include "contrack/errors.hpp"
#include "contrack/geometry.hpp"
#include "contrack/io.hpp"
#include "contrack/metrics.hpp"
#include "contrack/sampler.hpp"
#include "contrack/simulator.hpp"
#include "contrack/tracker.hpp"

namespace py = pybind11;
using namespace pybind11::literals;
using namespace contrack;

namespace {

CostMatrix make_cost_matrix(const std::vector<std::vector<double>>& entries,
                            const std::string& mode,
                            const std::vector<std::pair<std::size_t, std::size_t>>& forbidden) {
  if (mode != "min" && mode != "max") {
    throw ValidationError("mode must be 'min' or 'max'");
  }
  CostMatrix m(entries, mode == "min" ? AssignMode::kMinimize : AssignMode::kMaximize);
  for (const auto& [r, c] : forbidden) m.set_forbidden(r, c);
  return m;
}

py::dict assignment_to_dict(const Assignment& a) {
  py::dict d;
  d["pairs"] = a.pairs;
  d["total"] = a.total;
  d["unassigned_rows"] = a.unassigned_rows;
  d["unassigned_cols"] = a.unassigned_cols;
  return d;
}

py::dict category_report_to_dict(const CategoryReport& r) {
  py::dict d;
  d["MOTA"] = r.clear.mota();
  d["MOTP"] = r.clear.motp();
  d["IDF1"] = r.idf.idf1();
  d["IDP"] = r.idf.idp();
  d["IDR"] = r.idf.idr();
  d["HOTA"] = r.hota.hota();
  d["DetA"] = r.hota.det_a();
  d["AssA"] = r.hota.ass_a();
  d["GT"] = r.clear.gt;
  d["TP"] = r.clear.tp;
  d["FP"] = r.clear.fp;
  d["FN"] = r.clear.fn;
  d["IDSW"] = r.clear.idsw;
  d["Frag"] = r.clear.frag;
  d["MT"] = r.clear.mt;
  d["PT"] = r.clear.pt;
  d["ML"] = r.clear.ml;
  d["Rcll"] = r.clear.recall();
  d["Prcn"] = r.clear.precision();
  return d;
}

py::dict report_to_dict(const MetricsReport& report) {
  py::dict per_category;
  for (const auto& [category, r] : report.per_category) {
    per_category[py::int_(category)] = category_report_to_dict(r);
  }
  py::dict d;
  d["per_category"] = per_category;
  d["overall"] = category_report_to_dict(report.overall);
  d["mMOTA"] = report.means.mmota;
  d["mIDF1"] = report.means.midf1;
  d["mHOTA"] = report.means.mhota;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Embedding-based multi-object tracking toolkit";

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<IoError>(m, "IoError", PyExc_IOError);

  py::class_<Box>(m, "Box")
      .def(py::init<double, double, double, double>(), "cx"_a, "cy"_a, "w"_a, "h"_a)
      .def_readwrite("cx", &Box::cx)
      .def_readwrite("cy", &Box::cy)
      .def_readwrite("w", &Box::w)
      .def_readwrite("h", &Box::h)
      .def("left", &Box::left)
      .def("top", &Box::top)
      .def("right", &Box::right)
      .def("bottom", &Box::bottom)
      .def_static("from_corners", &Box::from_corners, "l"_a, "t"_a, "r"_a, "b"_a)
      .def("__repr__", [](const Box& b) {
        return "Box(cx=" + std::to_string(b.cx) + ", cy=" + std::to_string(b.cy) +
               ", w=" + std::to_string(b.w) + ", h=" + std::to_string(b.h) + ")";
      });

  m.def("iou", &iou, "a"_a, "b"_a);
  m.def("giou", &giou, "a"_a, "b"_a);
  m.def(
      "cosine_similarity",
      [](const std::vector<double>& a, const std::vector<double>& b) {
        return cosine_similarity(a, b);
      },
      "a"_a, "b"_a);

  m.def(
      "solve_assignment",
      [](const std::vector<std::vector<double>>& entries, const std::string& mode,
         const std::vector<std::pair<std::size_t, std::size_t>>& forbidden) {
        return assignment_to_dict(solve_assignment(make_cost_matrix(entries, mode, forbidden)));
      },
      "entries"_a, "mode"_a = "min",
      "forbidden"_a = std::vector<std::pair<std::size_t, std::size_t>>{},
      "Optimal rectangular assignment; forbidden pairs stay unmatched.");

  py::class_<ScoredBox>(m, "ScoredBox")
      .def(py::init([](std::vector<double> scores, Box box) {
             return ScoredBox{std::move(scores), box};
           }),
           "scores"_a, "box"_a)
      .def_readwrite("scores", &ScoredBox::scores)
      .def_readwrite("box", &ScoredBox::box);

  py::class_<TruthBox>(m, "TruthBox")
      .def(py::init([](int category, Box box) { return TruthBox{category, box}; }),
           "category"_a, "box"_a)
      .def_readwrite("category", &TruthBox::category)
      .def_readwrite("box", &TruthBox::box);

  m.def(
      "detr_matching",
      [](const std::vector<ScoredBox>& predictions, const std::vector<TruthBox>& truths,
         double lambda_class, double lambda_box, double lambda_giou) {
        return assignment_to_dict(
            detr_matching(predictions, truths, {lambda_class, lambda_box, lambda_giou}));
      },
      "predictions"_a, "truths"_a, "lambda_class"_a = 2.0, "lambda_box"_a = 5.0,
      "lambda_giou"_a = 2.0);

  py::class_<BatchEntry>(m, "BatchEntry")
      .def(py::init([](Embedding embedding, int video_id, int instance_id, int frame_id) {
             return BatchEntry{std::move(embedding), video_id, instance_id, frame_id};
           }),
           "embedding"_a, "video_id"_a, "instance_id"_a, "frame_id"_a)
      .def_readwrite("embedding", &BatchEntry::embedding)
      .def_readwrite("video_id", &BatchEntry::video_id)
      .def_readwrite("instance_id", &BatchEntry::instance_id)
      .def_readwrite("frame_id", &BatchEntry::frame_id);

  py::class_<MatchedEmbeddingBatch>(m, "MatchedEmbeddingBatch")
      .def(py::init([](std::vector<BatchEntry> entries, double temperature) {
             MatchedEmbeddingBatch b{std::move(entries), temperature};
             b.validate();
             return b;
           }),
           "entries"_a, "temperature"_a = 0.1)
      .def_readwrite("entries", &MatchedEmbeddingBatch::entries)
      .def_readwrite("temperature", &MatchedEmbeddingBatch::temperature)
      .def("__len__", &MatchedEmbeddingBatch::size);

  m.def(
      "pair_loss",
      [](const Embedding& anchor, const Embedding& positive,
         const std::vector<Embedding>& negatives, double temperature) {
        return pair_loss(anchor, positive, negatives, temperature);
      },
      "anchor"_a, "positive"_a, "negatives"_a, "temperature"_a = 0.1);
  m.def("anchor_loss", &anchor_loss, "batch"_a, "anchor"_a);
  m.def("batch_contrastive_loss", &batch_contrastive_loss, "batch"_a);
  m.def("contrastive_gradient", &contrastive_gradient, "batch"_a);
  m.def("finite_difference_gradient", &finite_difference_gradient, "batch"_a,
        "step"_a = 1e-5);
  m.def(
      "focal_loss",
      [](const std::vector<double>& scores, int target_category, double alpha, double gamma) {
        return focal_loss(scores, target_category, alpha, gamma);
      },
      "scores"_a, "target_category"_a, "alpha"_a = 0.25, "gamma"_a = 2.0);
  m.def("random_batch", &random_batch, "seed"_a, "dim"_a, "entries"_a,
        "temperature"_a = 0.1);

  py::class_<VideoInfo>(m, "VideoInfo")
      .def(py::init([](int video_id, std::vector<int> frame_ids) {
             return VideoInfo{video_id, std::move(frame_ids)};
           }),
           "video_id"_a, "frame_ids"_a)
      .def_readwrite("video_id", &VideoInfo::video_id)
      .def_readwrite("frame_ids", &VideoInfo::frame_ids);

  py::class_<DatasetIndex>(m, "DatasetIndex")
      .def(py::init([](std::vector<VideoInfo> videos) {
             DatasetIndex index{std::move(videos)};
             index.validate();
             return index;
           }),
           "videos"_a)
      .def_readwrite("videos", &DatasetIndex::videos);

  m.def(
      "sample_tracking_batch",
      [](const DatasetIndex& index, int num_videos, int num_frames, std::uint64_t seed) {
        std::vector<std::tuple<int, int, int>> items;
        for (const BatchItem& item : sample_tracking_batch(index, num_videos, num_frames, seed).items) {
          items.emplace_back(item.video_id, item.frame_id, item.view_tag);
        }
        return items;
      },
      "index"_a, "num_videos"_a, "num_frames"_a, "seed"_a);
  m.def(
      "build_pretraining_batch",
      [](const DatasetIndex& index, int n, std::uint64_t seed) {
        std::vector<std::tuple<int, int, int>> items;
        for (const BatchItem& item : build_pretraining_batch(index, n, seed).items) {
          items.emplace_back(item.video_id, item.frame_id, item.view_tag);
        }
        return items;
      },
      "index"_a, "n"_a, "seed"_a);

  py::class_<TrackerConfig>(m, "TrackerConfig")
      .def(py::init([](double objectness, double new_instance, int memory_length, int dim) {
             TrackerConfig c{objectness, new_instance, memory_length, dim};
             c.validate();
             return c;
           }),
           "objectness_threshold"_a = 0.5, "new_instance_threshold"_a = 0.5,
           "memory_length"_a = 20, "embedding_dim"_a = 0)
      .def_readwrite("objectness_threshold", &TrackerConfig::objectness_threshold)
      .def_readwrite("new_instance_threshold", &TrackerConfig::new_instance_threshold)
      .def_readwrite("memory_length", &TrackerConfig::memory_length)
      .def_readwrite("embedding_dim", &TrackerConfig::embedding_dim);

  py::class_<Detection>(m, "Detection")
      .def(py::init([](int category_id, double score, Box box, Embedding embedding) {
             return Detection{category_id, score, box, std::move(embedding)};
           }),
           "category_id"_a, "score"_a, "box"_a, "embedding"_a)
      .def_readwrite("category_id", &Detection::category_id)
      .def_readwrite("score", &Detection::score)
      .def_readwrite("box", &Detection::box)
      .def_readwrite("embedding", &Detection::embedding);

  py::class_<Tracker>(m, "Tracker")
      .def(py::init<const TrackerConfig&>(), "config"_a)
      .def(
          "step",
          [](Tracker& tracker, int frame_index, const std::vector<Detection>& detections) {
            std::vector<std::tuple<long, int, double, Box>> out;
            for (const TrackedObject& obj : tracker.step(frame_index, detections)) {
              out.emplace_back(obj.instance_id, obj.category_id, obj.score, obj.box);
            }
            return out;
          },
          "frame_index"_a, "detections"_a,
          "Returns (instance_id, category_id, score, box) per retained detection.");

  py::class_<SimulatorConfig>(m, "SimulatorConfig")
      .def(py::init<>())
      .def_readwrite("videos", &SimulatorConfig::videos)
      .def_readwrite("frames_per_video", &SimulatorConfig::frames_per_video)
      .def_readwrite("identities_per_video", &SimulatorConfig::identities_per_video)
      .def_readwrite("embedding_dim", &SimulatorConfig::embedding_dim)
      .def_readwrite("noise_sigma", &SimulatorConfig::noise_sigma)
      .def_readwrite("occlusion_probability", &SimulatorConfig::occlusion_probability)
      .def_readwrite("occlusion_min_frames", &SimulatorConfig::occlusion_min_frames)
      .def_readwrite("occlusion_max_frames", &SimulatorConfig::occlusion_max_frames)
      .def_readwrite("miss_probability", &SimulatorConfig::miss_probability)
      .def_readwrite("false_positive_rate", &SimulatorConfig::false_positive_rate)
      .def_readwrite("motion_step", &SimulatorConfig::motion_step)
      .def_readwrite("score_min", &SimulatorConfig::score_min)
      .def_readwrite("score_max", &SimulatorConfig::score_max)
      .def_readwrite("image_width", &SimulatorConfig::image_width)
      .def_readwrite("image_height", &SimulatorConfig::image_height)
      .def_readwrite("seed", &SimulatorConfig::seed);

  py::class_<SyntheticSequence>(m, "SyntheticSequence")
      .def_readonly("video_id", &SyntheticSequence::video_id)
      .def_readonly("gt_frames", &SyntheticSequence::gt_frames)
      .def_readonly("det_frames", &SyntheticSequence::det_frames)
      .def_readonly("latents", &SyntheticSequence::latents);

  py::class_<GtObject>(m, "GtObject")
      .def(py::init([](long track_id, int category, Box box) {
             return GtObject{track_id, category, box};
           }),
           "track_id"_a, "category"_a, "box"_a)
      .def_readwrite("track_id", &GtObject::track_id)
      .def_readwrite("category", &GtObject::category)
      .def_readwrite("box", &GtObject::box);

  py::class_<PredObject>(m, "PredObject")
      .def(py::init([](long instance_id, int category, Box box, double score) {
             return PredObject{instance_id, category, box, score};
           }),
           "instance_id"_a, "category"_a, "box"_a, "score"_a = 1.0)
      .def_readwrite("instance_id", &PredObject::instance_id)
      .def_readwrite("category", &PredObject::category)
      .def_readwrite("box", &PredObject::box)
      .def_readwrite("score", &PredObject::score);

  py::class_<SyntheticDataset>(m, "SyntheticDataset")
      .def_readonly("sequences", &SyntheticDataset::sequences);

  m.def("generate", &generate, "config"_a);
  m.def("export_dataset", &export_dataset, "dataset"_a, "dir"_a);

  m.def(
      "evaluate",
      [](const std::vector<std::vector<GtObject>>& gt_frames,
         const std::vector<std::vector<PredObject>>& pred_frames, double iou_threshold) {
        LabeledScene scene{gt_frames, pred_frames};
        return report_to_dict(evaluate_scene(scene, iou_threshold));
      },
      "gt_frames"_a, "pred_frames"_a, "iou_threshold"_a = 0.5,
      "Scores per-frame predictions against ground truth.");
  m.def(
      "evaluate_files",
      [](const std::filesystem::path& gt, const std::filesystem::path& results,
         double iou_threshold, int image_width, int image_height) {
        return report_to_dict(
            evaluate_scene(load_scene(gt, results, image_width, image_height), iou_threshold));
      },
      "gt"_a, "results"_a, "iou_threshold"_a = 0.5, "image_width"_a = 1024,
      "image_height"_a = 1024);
}
