#include "contrack/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

#include "contrack/errors.hpp"

namespace contrack {

namespace {

using nlohmann::json;

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);  // binary keeps line endings stable
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  return out;
}

// Shortest representation that parses back to the identical double.
std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

double parse_double(const std::string& token, const std::string& context) {
  double value = 0.0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ValidationError(context + ": bad number '" + token + "'");
  }
  return value;
}

long parse_long(const std::string& token, const std::string& context) {
  long value = 0;
  const char* begin = token.data();
  const char* end = begin + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ValidationError(context + ": bad integer '" + token + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  return fields;
}

std::string line_context(const std::filesystem::path& path, std::size_t line_number) {
  return path.filename().string() + " line " + std::to_string(line_number);
}

Box box_from_pixels(double left, double top, double width, double height, int image_width,
                    int image_height) {
  Box box;
  box.w = width / image_width;
  box.h = height / image_height;
  box.cx = left / image_width + box.w / 2.0;
  box.cy = top / image_height + box.h / 2.0;
  return box;
}

void validate_image_size(int image_width, int image_height) {
  if (image_width < 1 || image_height < 1) {
    throw ValidationError("image size must be positive");
  }
}

}  // namespace

std::vector<std::vector<GtObject>> parse_mot_gt(const std::filesystem::path& path,
                                                int image_width, int image_height) {
  validate_image_size(image_width, image_height);
  std::ifstream in = open_input(path);
  std::map<long, std::vector<GtObject>> by_frame;
  std::string line;
  std::size_t line_number = 0;
  long max_frame = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = line_context(path, line_number);
    const std::vector<std::string> f = split_csv(line);
    if (f.size() < 9) throw ValidationError(context + ": expected 9 comma-separated fields");
    const long frame = parse_long(f[0], context);
    const long id = parse_long(f[1], context);
    if (frame < 1 || id < 1) throw ValidationError(context + ": frame and id must be >= 1");
    if (parse_long(f[6], context) == 0) continue;
    GtObject obj;
    obj.track_id = id;
    obj.category = static_cast<int>(parse_long(f[7], context));
    obj.box = box_from_pixels(parse_double(f[2], context), parse_double(f[3], context),
                              parse_double(f[4], context), parse_double(f[5], context),
                              image_width, image_height);
    by_frame[frame].push_back(obj);
    max_frame = std::max(max_frame, frame);
  }
  std::vector<std::vector<GtObject>> frames(static_cast<std::size_t>(max_frame));
  for (auto& [frame, objects] : by_frame) {
    frames[static_cast<std::size_t>(frame - 1)] = std::move(objects);
  }
  return frames;
}

void write_mot_gt(const std::filesystem::path& path,
                  const std::vector<std::vector<GtObject>>& gt_frames, int image_width,
                  int image_height) {
  validate_image_size(image_width, image_height);
  std::ofstream out = open_output(path);
  for (std::size_t f = 0; f < gt_frames.size(); ++f) {
    std::vector<GtObject> objects = gt_frames[f];
    std::sort(objects.begin(), objects.end(),
              [](const GtObject& a, const GtObject& b) { return a.track_id < b.track_id; });
    for (const GtObject& obj : objects) {
      out << (f + 1) << ',' << obj.track_id << ','
          << format_double(obj.box.left() * image_width) << ','
          << format_double(obj.box.top() * image_height) << ','
          << format_double(obj.box.w * image_width) << ','
          << format_double(obj.box.h * image_height) << ",1," << obj.category << ",1\n";
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::vector<PredObject>> parse_mot_results(const std::filesystem::path& path,
                                                       int image_width, int image_height) {
  validate_image_size(image_width, image_height);
  std::ifstream in = open_input(path);
  std::map<long, std::vector<PredObject>> by_frame;
  std::string line;
  std::size_t line_number = 0;
  long max_frame = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = line_context(path, line_number);
    const std::vector<std::string> f = split_csv(line);
    if (f.size() < 7) throw ValidationError(context + ": expected at least 7 fields");
    const long frame = parse_long(f[0], context);
    const long id = parse_long(f[1], context);
    if (frame < 1 || id < 1) throw ValidationError(context + ": frame and id must be >= 1");
    PredObject obj;
    obj.instance_id = id;
    obj.category = 1;  // the results format carries no category column
    obj.box = box_from_pixels(parse_double(f[2], context), parse_double(f[3], context),
                              parse_double(f[4], context), parse_double(f[5], context),
                              image_width, image_height);
    obj.score = parse_double(f[6], context);
    by_frame[frame].push_back(obj);
    max_frame = std::max(max_frame, frame);
  }
  std::vector<std::vector<PredObject>> frames(static_cast<std::size_t>(max_frame));
  for (auto& [frame, objects] : by_frame) {
    frames[static_cast<std::size_t>(frame - 1)] = std::move(objects);
  }
  return frames;
}

void write_results(const std::filesystem::path& path, const TrackOutput& output,
                   int image_width, int image_height) {
  validate_image_size(image_width, image_height);
  std::ofstream out = open_output(path);
  std::vector<FrameTracks> frames = output.frames;
  std::sort(frames.begin(), frames.end(),
            [](const FrameTracks& a, const FrameTracks& b) {
              return a.frame_index < b.frame_index;
            });
  for (const FrameTracks& frame : frames) {
    std::vector<TrackedObject> objects = frame.objects;
    std::sort(objects.begin(), objects.end(),
              [](const TrackedObject& a, const TrackedObject& b) {
                return a.instance_id < b.instance_id;
              });
    for (const TrackedObject& obj : objects) {
      out << frame.frame_index << ',' << obj.instance_id << ','
          << format_double(obj.box.left() * image_width) << ','
          << format_double(obj.box.top() * image_height) << ','
          << format_double(obj.box.w * image_width) << ','
          << format_double(obj.box.h * image_height) << ','
          << format_double(obj.score) << ",-1,-1,-1\n";
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

std::vector<std::pair<int, std::vector<Detection>>> parse_detections(
    const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  std::map<int, std::vector<Detection>> by_frame;
  std::string line;
  std::size_t line_number = 0;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    ++line_number;
    if (line.empty()) continue;
    const std::string context = line_context(path, line_number);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(context + ": " + e.what());
    }
    for (const char* key : {"frame", "category", "score", "box", "embedding"}) {
      if (!j.contains(key)) {
        throw ValidationError(context + ": missing field '" + key + "'");
      }
    }
    const int frame = j["frame"].get<int>();
    if (frame < 1) throw ValidationError(context + ": frame must be >= 1");
    Detection det;
    det.category_id = j["category"].get<int>();
    det.score = j["score"].get<double>();
    const auto& box = j["box"];
    if (!box.is_array() || box.size() != 4) {
      throw ValidationError(context + ": box must be [cx, cy, w, h]");
    }
    det.box = Box{box[0].get<double>(), box[1].get<double>(), box[2].get<double>(),
                  box[3].get<double>()};
    det.embedding = j["embedding"].get<std::vector<double>>();
    if (dim == 0) dim = det.embedding.size();
    if (det.embedding.empty() || det.embedding.size() != dim) {
      throw ValidationError(context + ": embedding dimension " +
                            std::to_string(det.embedding.size()) + " differs from " +
                            std::to_string(dim));
    }
    for (const double v : det.embedding) {
      if (!std::isfinite(v)) throw ValidationError(context + ": non-finite embedding value");
    }
    if (!std::isfinite(det.score) || !std::isfinite(det.box.cx) || !std::isfinite(det.box.cy) ||
        !std::isfinite(det.box.w) || !std::isfinite(det.box.h)) {
      throw ValidationError(context + ": non-finite number");
    }
    by_frame[frame].push_back(std::move(det));
  }
  std::vector<std::pair<int, std::vector<Detection>>> frames;
  frames.reserve(by_frame.size());
  for (auto& [frame, dets] : by_frame) frames.emplace_back(frame, std::move(dets));
  return frames;
}

void write_detections_jsonl(
    const std::filesystem::path& path,
    const std::vector<std::pair<int, std::vector<Detection>>>& frames) {
  std::ofstream out = open_output(path);
  for (const auto& [frame, dets] : frames) {
    for (const Detection& det : dets) {
      json j;
      j["frame"] = frame;
      j["category"] = det.category_id;
      j["score"] = det.score;
      j["box"] = {det.box.cx, det.box.cy, det.box.w, det.box.h};
      j["embedding"] = det.embedding;
      out << j.dump() << '\n';
    }
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SceneMeta parse_meta(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  SceneMeta meta;
  if (j.contains("image_width")) meta.image_width = j["image_width"].get<int>();
  if (j.contains("image_height")) meta.image_height = j["image_height"].get<int>();
  if (j.contains("seed")) meta.seed = j["seed"].get<std::uint64_t>();
  validate_image_size(meta.image_width, meta.image_height);
  return meta;
}

void write_meta(const std::filesystem::path& path, const SimulatorConfig& config) {
  json j;
  j["image_width"] = config.image_width;
  j["image_height"] = config.image_height;
  j["seed"] = config.seed;
  j["config"] = {
      {"videos", config.videos},
      {"frames_per_video", config.frames_per_video},
      {"identities_per_video", config.identities_per_video},
      {"embedding_dim", config.embedding_dim},
      {"noise_sigma", config.noise_sigma},
      {"occlusion_probability", config.occlusion_probability},
      {"occlusion_min_frames", config.occlusion_min_frames},
      {"occlusion_max_frames", config.occlusion_max_frames},
      {"miss_probability", config.miss_probability},
      {"false_positive_rate", config.false_positive_rate},
      {"motion_step", config.motion_step},
      {"score_min", config.score_min},
      {"score_max", config.score_max},
  };
  std::ofstream out = open_output(path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

LabeledScene load_scene(const std::filesystem::path& gt_path,
                        const std::filesystem::path& results_path, int image_width,
                        int image_height) {
  LabeledScene scene;
  scene.gt_frames = parse_mot_gt(gt_path, image_width, image_height);
  scene.pred_frames = parse_mot_results(results_path, image_width, image_height);
  const std::size_t frames = std::max(scene.gt_frames.size(), scene.pred_frames.size());
  scene.gt_frames.resize(frames);
  scene.pred_frames.resize(frames);
  scene.validate();
  return scene;
}

DatasetIndex parse_dataset_index(const std::filesystem::path& path) {
  std::ifstream in = open_input(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
  if (!j.contains("videos") || !j["videos"].is_array()) {
    throw ValidationError(path.string() + ": expected a top-level 'videos' array");
  }
  DatasetIndex index;
  for (const auto& v : j["videos"]) {
    VideoInfo info;
    if (!v.contains("video_id") || !v.contains("frame_ids")) {
      throw ValidationError(path.string() + ": each video needs video_id and frame_ids");
    }
    info.video_id = v["video_id"].get<int>();
    info.frame_ids = v["frame_ids"].get<std::vector<int>>();
    index.videos.push_back(std::move(info));
  }
  index.validate();
  return index;
}

void write_batch_spec_jsonl(std::ostream& out, const BatchSpec& batch) {
  for (const BatchItem& item : batch.items) {
    json j;
    j["video"] = item.video_id;
    j["frame"] = item.frame_id;
    if (item.view_tag >= 0) j["view"] = item.view_tag;
    out << j.dump() << '\n';
  }
}

namespace {

json category_to_json(const CategoryReport& r) {
  return json{
      {"MOTA", r.clear.mota()},    {"MOTP", r.clear.motp()},
      {"IDF1", r.idf.idf1()},      {"IDP", r.idf.idp()},
      {"IDR", r.idf.idr()},        {"HOTA", r.hota.hota()},
      {"DetA", r.hota.det_a()},    {"AssA", r.hota.ass_a()},
      {"GT", r.clear.gt},          {"TP", r.clear.tp},
      {"FP", r.clear.fp},          {"FN", r.clear.fn},
      {"IDSW", r.clear.idsw},      {"Frag", r.clear.frag},
      {"MT", r.clear.mt},          {"PT", r.clear.pt},
      {"ML", r.clear.ml},          {"Rcll", r.clear.recall()},
      {"Prcn", r.clear.precision()},
  };
}

}  // namespace

std::string metrics_report_to_json(const MetricsReport& report) {
  json j;
  json categories = json::object();
  for (const auto& [category, r] : report.per_category) {
    categories[std::to_string(category)] = category_to_json(r);
  }
  j["per_category"] = categories;
  j["overall"] = category_to_json(report.overall);
  j["means"] = {{"mMOTA", report.means.mmota},
                {"mIDF1", report.means.midf1},
                {"mHOTA", report.means.mhota}};
  return j.dump(2);
}

std::string metrics_report_table(const MetricsReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof(line), "%-9s %6s %6s %6s %6s %6s %6s %6s %6s %6s %6s %6s\n",
                "category", "MOTA", "MOTP", "IDF1", "HOTA", "DetA", "AssA", "FP", "FN",
                "IDSW", "MT", "ML");
  out << line;
  const auto emit = [&](const std::string& name, const CategoryReport& r) {
    std::snprintf(line, sizeof(line),
                  "%-9s %6.3f %6.3f %6.3f %6.3f %6.3f %6.3f %6ld %6ld %6ld %6ld %6ld\n",
                  name.c_str(), r.clear.mota(), r.clear.motp(), r.idf.idf1(), r.hota.hota(),
                  r.hota.det_a(), r.hota.ass_a(), r.clear.fp, r.clear.fn, r.clear.idsw,
                  r.clear.mt, r.clear.ml);
    out << line;
  };
  for (const auto& [category, r] : report.per_category) {
    emit(std::to_string(category), r);
  }
  emit("overall", report.overall);
  std::snprintf(line, sizeof(line), "means: mMOTA %.3f  mIDF1 %.3f  mHOTA %.3f\n",
                report.means.mmota, report.means.midf1, report.means.mhota);
  out << line;
  return out.str();
}

void write_metrics_report(const std::filesystem::path& path, const MetricsReport& report) {
  std::ofstream out = open_output(path);
  out << metrics_report_to_json(report) << '\n';
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace contrack
