#include "contrack/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>

#include "contrack/errors.hpp"

namespace contrack {

void RunConfig::validate() const {
  tracker.validate();
  loss.validate();
  if (!(temperature >= 1e-6)) throw ValidationError("temperature must be >= 1e-6");
  if (!(metric_iou > 0.0 && metric_iou < 1.0)) {
    throw ValidationError("metric IoU threshold must lie in (0, 1)");
  }
  if (sampler_videos < 1 || sampler_frames < 1) {
    throw ValidationError("sampler sizes must be >= 1");
  }
  sim.validate();
}

RunConfig preset_config(std::string_view name) {
  RunConfig config;
  config.loss.lambda_class = 2.0;
  config.loss.lambda_l1 = 5.0;
  config.loss.lambda_giou = 2.0;
  config.loss.focal_alpha = 0.25;
  config.temperature = 0.1;
  config.tracker.new_instance_threshold = 0.5;
  if (name == "mot17") {
    config.loss.lambda_contr = 2.0;
    config.sampler_videos = 2;
    config.sampler_frames = 8;
    config.tracker.objectness_threshold = 0.5;
    config.tracker.memory_length = 20;
  } else if (name == "bdd100k") {
    config.loss.lambda_contr = 1.0;
    config.sampler_videos = 4;
    config.sampler_frames = 10;
    config.tracker.objectness_threshold = 0.4;
    config.tracker.memory_length = 9;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) +
                          "' (expected mot17 or bdd100k)");
  }
  return config;
}

namespace {

double to_double(const std::string& value, const std::string& key) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(v)) {
    throw ValidationError("config key '" + key + "': bad number '" + value + "'");
  }
  return v;
}

long to_long(const std::string& value, const std::string& key) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ValidationError("config key '" + key + "': bad integer '" + value + "'");
  }
  return v;
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

}  // namespace

void apply_config_key(RunConfig& config, const std::string& key, const std::string& value) {
  using Setter = std::function<void(RunConfig&, const std::string&)>;
  static const std::map<std::string, Setter> setters = {
      {"objectness_threshold",
       [](RunConfig& c, const std::string& v) {
         c.tracker.objectness_threshold = to_double(v, "objectness_threshold");
       }},
      {"new_instance_threshold",
       [](RunConfig& c, const std::string& v) {
         c.tracker.new_instance_threshold = to_double(v, "new_instance_threshold");
       }},
      {"memory_length",
       [](RunConfig& c, const std::string& v) {
         c.tracker.memory_length = static_cast<int>(to_long(v, "memory_length"));
       }},
      {"temperature",
       [](RunConfig& c, const std::string& v) { c.temperature = to_double(v, "temperature"); }},
      {"metric_iou",
       [](RunConfig& c, const std::string& v) { c.metric_iou = to_double(v, "metric_iou"); }},
      {"lambda_class",
       [](RunConfig& c, const std::string& v) { c.loss.lambda_class = to_double(v, "lambda_class"); }},
      {"lambda_l1",
       [](RunConfig& c, const std::string& v) { c.loss.lambda_l1 = to_double(v, "lambda_l1"); }},
      {"lambda_giou",
       [](RunConfig& c, const std::string& v) { c.loss.lambda_giou = to_double(v, "lambda_giou"); }},
      {"lambda_contr",
       [](RunConfig& c, const std::string& v) { c.loss.lambda_contr = to_double(v, "lambda_contr"); }},
      {"focal_alpha",
       [](RunConfig& c, const std::string& v) { c.loss.focal_alpha = to_double(v, "focal_alpha"); }},
      {"focal_gamma",
       [](RunConfig& c, const std::string& v) { c.loss.focal_gamma = to_double(v, "focal_gamma"); }},
      {"sampler_videos",
       [](RunConfig& c, const std::string& v) {
         c.sampler_videos = static_cast<int>(to_long(v, "sampler_videos"));
       }},
      {"sampler_frames",
       [](RunConfig& c, const std::string& v) {
         c.sampler_frames = static_cast<int>(to_long(v, "sampler_frames"));
       }},
      {"sim_videos",
       [](RunConfig& c, const std::string& v) {
         c.sim.videos = static_cast<int>(to_long(v, "sim_videos"));
       }},
      {"sim_frames",
       [](RunConfig& c, const std::string& v) {
         c.sim.frames_per_video = static_cast<int>(to_long(v, "sim_frames"));
       }},
      {"sim_identities",
       [](RunConfig& c, const std::string& v) {
         c.sim.identities_per_video = static_cast<int>(to_long(v, "sim_identities"));
       }},
      {"sim_dim",
       [](RunConfig& c, const std::string& v) {
         c.sim.embedding_dim = static_cast<int>(to_long(v, "sim_dim"));
       }},
      {"sim_noise_sigma",
       [](RunConfig& c, const std::string& v) { c.sim.noise_sigma = to_double(v, "sim_noise_sigma"); }},
      {"sim_occlusion_prob",
       [](RunConfig& c, const std::string& v) {
         c.sim.occlusion_probability = to_double(v, "sim_occlusion_prob");
       }},
      {"sim_occlusion_min",
       [](RunConfig& c, const std::string& v) {
         c.sim.occlusion_min_frames = static_cast<int>(to_long(v, "sim_occlusion_min"));
       }},
      {"sim_occlusion_max",
       [](RunConfig& c, const std::string& v) {
         c.sim.occlusion_max_frames = static_cast<int>(to_long(v, "sim_occlusion_max"));
       }},
      {"sim_miss_prob",
       [](RunConfig& c, const std::string& v) {
         c.sim.miss_probability = to_double(v, "sim_miss_prob");
       }},
      {"sim_fp_rate",
       [](RunConfig& c, const std::string& v) {
         c.sim.false_positive_rate = to_double(v, "sim_fp_rate");
       }},
      {"sim_motion_step",
       [](RunConfig& c, const std::string& v) { c.sim.motion_step = to_double(v, "sim_motion_step"); }},
      {"sim_score_min",
       [](RunConfig& c, const std::string& v) { c.sim.score_min = to_double(v, "sim_score_min"); }},
      {"sim_score_max",
       [](RunConfig& c, const std::string& v) { c.sim.score_max = to_double(v, "sim_score_max"); }},
      {"sim_image_width",
       [](RunConfig& c, const std::string& v) {
         c.sim.image_width = static_cast<int>(to_long(v, "sim_image_width"));
       }},
      {"sim_image_height",
       [](RunConfig& c, const std::string& v) {
         c.sim.image_height = static_cast<int>(to_long(v, "sim_image_height"));
       }},
      {"sim_seed",
       [](RunConfig& c, const std::string& v) {
         c.sim.seed = static_cast<std::uint64_t>(to_long(v, "sim_seed"));
       }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) {
    throw ValidationError("unknown config key '" + key + "'");
  }
  it->second(config, value);
}

RunConfig load_config_file(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string() + " for reading");
  std::string line;
  std::size_t line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string trimmed = trim(line);
    if (trimmed.empty()) continue;
    const auto eq = trimmed.find('=');
    if (eq == std::string::npos) {
      throw ValidationError(path.filename().string() + " line " + std::to_string(line_number) +
                            ": expected 'key = value'");
    }
    apply_config_key(base, trim(trimmed.substr(0, eq)), trim(trimmed.substr(eq + 1)));
  }
  base.validate();
  return base;
}

}  // namespace contrack
