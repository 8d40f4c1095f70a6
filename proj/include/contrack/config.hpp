#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "contrack/contrastive.hpp"
#include "contrack/simulator.hpp"
#include "contrack/tracker.hpp"

namespace contrack {

// Every tunable of the toolkit in one validated bundle. The two presets
// mirror the published hyper-parameter columns for the MOT17-style and
// BDD100K-style setups.
struct RunConfig {
  TrackerConfig tracker;
  LossWeights loss;
  double temperature = 0.1;
  double metric_iou = 0.5;
  int sampler_videos = 2;
  int sampler_frames = 8;
  SimulatorConfig sim;

  void validate() const;
};

// name: "mot17" or "bdd100k"; throws on anything else.
RunConfig preset_config(std::string_view name);

// Flat `key = value` lines; '#' starts a comment. Unknown keys are rejected,
// every value is validated against the owning module's invariants.
RunConfig load_config_file(const std::filesystem::path& path, RunConfig base = RunConfig{});

// Applies one key/value pair; shared between the file loader and flag
// overrides.
void apply_config_key(RunConfig& config, const std::string& key, const std::string& value);

}  // namespace contrack
