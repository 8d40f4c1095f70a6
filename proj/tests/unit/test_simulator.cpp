#include <doctest.h>

#include <cmath>

#include "contrack/errors.hpp"
#include "contrack/simulator.hpp"
#include "test_support.hpp"

using namespace contrack;

TEST_CASE("noiseless detections mirror the ground truth exactly") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 20;
  cfg.identities_per_video = 4;
  cfg.seed = 5;
  const SyntheticDataset dataset = generate(cfg);
  REQUIRE(dataset.sequences.size() == 1);
  const SyntheticSequence& seq = dataset.sequences.front();
  REQUIRE(seq.gt_frames.size() == 20);
  for (std::size_t f = 0; f < seq.gt_frames.size(); ++f) {
    REQUIRE(seq.det_frames[f].size() == seq.gt_frames[f].size());
    for (std::size_t i = 0; i < seq.gt_frames[f].size(); ++i) {
      const GtObject& gt = seq.gt_frames[f][i];
      const Detection& det = seq.det_frames[f][i];
      CHECK(det.box.cx == gt.box.cx);
      CHECK(det.box.cy == gt.box.cy);
      CHECK(det.box.w == gt.box.w);
      CHECK(det.box.h == gt.box.h);
      const std::size_t identity = static_cast<std::size_t>(gt.track_id - 1);
      CHECK(det.embedding == seq.latents[identity]);
    }
  }
}

TEST_CASE("latent identity vectors are unit norm and separated") {
  SimulatorConfig cfg;
  cfg.identities_per_video = 8;
  cfg.embedding_dim = 12;
  cfg.seed = 11;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  REQUIRE(seq.latents.size() == 8);
  for (const Embedding& latent : seq.latents) {
    CHECK(std::abs(norm(latent) - 1.0) < 1e-9);
  }
  for (std::size_t a = 0; a < seq.latents.size(); ++a) {
    for (std::size_t b = a + 1; b < seq.latents.size(); ++b) {
      CHECK(cosine_similarity(seq.latents[a], seq.latents[b]) < 1.0 - 1e-6);
    }
  }
}

TEST_CASE("noise perturbs embeddings but keeps them unit length") {
  SimulatorConfig cfg;
  cfg.noise_sigma = 0.3;
  cfg.frames_per_video = 5;
  cfg.identities_per_video = 2;
  cfg.seed = 2;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  bool any_different = false;
  for (std::size_t f = 0; f < seq.det_frames.size(); ++f) {
    for (std::size_t i = 0; i < seq.det_frames[f].size(); ++i) {
      const Detection& det = seq.det_frames[f][i];
      CHECK(std::abs(norm(det.embedding) - 1.0) < 1e-9);
      const std::size_t identity =
          static_cast<std::size_t>(seq.gt_frames[f][i].track_id - 1);
      if (det.embedding != seq.latents[identity]) any_different = true;
    }
  }
  CHECK(any_different);
}

TEST_CASE("occlusions suppress detections while ground truth persists") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 60;
  cfg.identities_per_video = 3;
  cfg.occlusion_probability = 0.15;
  cfg.occlusion_min_frames = 2;
  cfg.occlusion_max_frames = 4;
  cfg.seed = 9;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  std::size_t gt_total = 0, det_total = 0;
  for (std::size_t f = 0; f < seq.gt_frames.size(); ++f) {
    gt_total += seq.gt_frames[f].size();
    det_total += seq.det_frames[f].size();
    CHECK(seq.gt_frames[f].size() == 3);  // annotations never disappear
  }
  CHECK(det_total < gt_total);
}

TEST_CASE("false positives stay off the identity subspace") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 30;
  cfg.identities_per_video = 3;
  cfg.embedding_dim = 16;
  cfg.false_positive_rate = 1.0;
  cfg.seed = 4;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  std::size_t extras = 0;
  for (std::size_t f = 0; f < seq.det_frames.size(); ++f) {
    for (std::size_t i = seq.gt_frames[f].size(); i < seq.det_frames[f].size(); ++i) {
      ++extras;
      for (const Embedding& latent : seq.latents) {
        CHECK(std::abs(cosine_similarity(seq.det_frames[f][i].embedding, latent)) < 1e-9);
      }
    }
  }
  CHECK(extras > 10);
}

TEST_CASE("boxes stay inside the unit square") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 80;
  cfg.identities_per_video = 6;
  cfg.motion_step = 0.1;
  cfg.seed = 13;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  for (const auto& frame : seq.gt_frames) {
    for (const GtObject& gt : frame) {
      CHECK(gt.box.left() >= -1e-9);
      CHECK(gt.box.top() >= -1e-9);
      CHECK(gt.box.right() <= 1.0 + 1e-9);
      CHECK(gt.box.bottom() <= 1.0 + 1e-9);
      CHECK(gt.box.w > 0.0);
      CHECK(gt.box.h > 0.0);
    }
  }
}

TEST_CASE("invalid configurations are rejected") {
  SimulatorConfig cfg;
  cfg.noise_sigma = -0.1;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = SimulatorConfig{};
  cfg.occlusion_min_frames = 3;
  cfg.occlusion_max_frames = 2;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  cfg = SimulatorConfig{};
  cfg.score_min = 0.9;
  cfg.score_max = 0.4;
  CHECK_THROWS_AS(cfg.validate(), ValidationError);
  // Too many identities for the separation bound in dimension 1.
  cfg = SimulatorConfig{};
  cfg.embedding_dim = 1;
  cfg.identities_per_video = 3;
  CHECK_THROWS_AS(generate(cfg), ValidationError);

  // Identities = 0 yields empty scenes, which is allowed.
  cfg = SimulatorConfig{};
  cfg.identities_per_video = 0;
  cfg.frames_per_video = 4;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  for (const auto& frame : seq.gt_frames) CHECK(frame.empty());
}

TEST_CASE("same config generates identical datasets") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 15;
  cfg.identities_per_video = 3;
  cfg.noise_sigma = 0.2;
  cfg.miss_probability = 0.1;
  cfg.false_positive_rate = 0.5;
  cfg.seed = 77;
  const SyntheticSequence a = generate(cfg).sequences.front();
  const SyntheticSequence b = generate(cfg).sequences.front();
  REQUIRE(a.det_frames.size() == b.det_frames.size());
  for (std::size_t f = 0; f < a.det_frames.size(); ++f) {
    REQUIRE(a.det_frames[f].size() == b.det_frames[f].size());
    for (std::size_t i = 0; i < a.det_frames[f].size(); ++i) {
      CHECK(a.det_frames[f][i].embedding == b.det_frames[f][i].embedding);
      CHECK(a.det_frames[f][i].score == b.det_frames[f][i].score);
      CHECK(a.det_frames[f][i].box.cx == b.det_frames[f][i].box.cx);
    }
  }
}

TEST_CASE("noiseless full pipeline tracks perfectly") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 50;
  cfg.identities_per_video = 5;
  cfg.seed = 31;
  const SyntheticSequence seq = generate(cfg).sequences.front();
  TrackerConfig tracker;
  tracker.memory_length = 20;
  const MetricsReport report = test::track_and_score(seq, tracker);
  CHECK(report.overall.clear.mota() == 1.0);
  CHECK(report.overall.idf.idf1() == 1.0);
  CHECK(report.overall.clear.idsw == 0);
}

TEST_CASE("tracked IDF1 does not improve as embedding noise grows") {
  SimulatorConfig cfg;
  cfg.frames_per_video = 30;
  cfg.identities_per_video = 4;
  cfg.embedding_dim = 8;
  TrackerConfig tracker;
  tracker.memory_length = 10;

  const std::vector<double> sigmas{0.0, 0.2, 0.5, 1.0};
  std::vector<double> mean_idf1;
  for (const double sigma : sigmas) {
    double sum = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      cfg.noise_sigma = sigma;
      cfg.seed = seed;
      const SyntheticSequence seq = generate(cfg).sequences.front();
      sum += test::track_and_score(seq, tracker).overall.idf.idf1();
    }
    mean_idf1.push_back(sum / 20.0);
  }
  for (std::size_t i = 1; i < mean_idf1.size(); ++i) {
    CHECK(mean_idf1[i] <= mean_idf1[i - 1] + 1e-9);
  }
}
