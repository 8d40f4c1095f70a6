#include "contrack/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "contrack/errors.hpp"
#include "contrack/io.hpp"
#include "contrack/random.hpp"

namespace contrack {

void SimulatorConfig::validate() const {
  if (videos < 1) throw ValidationError("simulator: videos must be >= 1");
  if (frames_per_video < 0) throw ValidationError("simulator: negative frame count");
  if (identities_per_video < 0) throw ValidationError("simulator: negative identity count");
  if (embedding_dim < 1) throw ValidationError("simulator: embedding dimension must be >= 1");
  if (noise_sigma < 0.0) throw ValidationError("simulator: noise sigma must be >= 0");
  for (const double p : {occlusion_probability, miss_probability}) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("simulator: probabilities must lie in [0, 1]");
    }
  }
  if (occlusion_min_frames < 1 || occlusion_max_frames < occlusion_min_frames) {
    throw ValidationError("simulator: empty occlusion duration range");
  }
  if (false_positive_rate < 0.0) throw ValidationError("simulator: negative false-positive rate");
  if (motion_step < 0.0) throw ValidationError("simulator: negative motion step");
  if (!(score_min <= score_max && score_min >= 0.0 && score_max <= 1.0)) {
    throw ValidationError("simulator: score bounds must satisfy 0 <= min <= max <= 1");
  }
  if (image_width < 1 || image_height < 1) {
    throw ValidationError("simulator: image size must be positive");
  }
}

namespace {

// Snapping coordinates to a dyadic grid makes the pixel conversion in the
// exporters lossless for power-of-two image sizes.
double quantize(double x) { return std::round(x * 0x1p20) * 0x1p-20; }

Embedding random_unit(Rng& rng, int dim) {
  Embedding e(static_cast<std::size_t>(dim));
  for (double& x : e) x = rng.gaussian();
  return normalized(e);
}

std::vector<Embedding> draw_latents(Rng& rng, int identities, int dim) {
  std::vector<Embedding> latents;
  for (int k = 0; k < identities; ++k) {
    bool placed = false;
    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
      Embedding candidate = random_unit(rng, dim);
      placed = true;
      for (const Embedding& other : latents) {
        if (cosine_similarity(candidate, other) > 1.0 - 1e-6) {
          placed = false;
          break;
        }
      }
      if (placed) latents.push_back(std::move(candidate));
    }
    if (!placed) {
      throw ValidationError("simulator: cannot place " + std::to_string(identities) +
                            " separated identities in dimension " + std::to_string(dim));
    }
  }
  return latents;
}

// Orthonormal basis of the latent span (modified Gram-Schmidt with one
// re-orthogonalization pass).
std::vector<Embedding> orthonormal_basis(const std::vector<Embedding>& latents) {
  std::vector<Embedding> basis;
  for (const Embedding& latent : latents) {
    Embedding v = latent;
    for (int pass = 0; pass < 2; ++pass) {
      for (const Embedding& q : basis) {
        const double proj = dot(v, q);
        for (std::size_t d = 0; d < v.size(); ++d) v[d] -= proj * q[d];
      }
    }
    if (norm(v) > 1e-9) basis.push_back(normalized(v));
  }
  return basis;
}

// Random embedding pushed off the identity subspace, so false positives stay
// separable in the noiseless setting. Falls back to a plain random unit
// vector when the latents already span the space.
Embedding false_positive_embedding(Rng& rng, const std::vector<Embedding>& basis, int dim) {
  for (int attempt = 0; attempt < 100; ++attempt) {
    Embedding e(static_cast<std::size_t>(dim));
    for (double& x : e) x = rng.gaussian();
    if (static_cast<int>(basis.size()) < dim) {
      for (int pass = 0; pass < 2; ++pass) {
        for (const Embedding& q : basis) {
          const double proj = dot(e, q);
          for (std::size_t d = 0; d < e.size(); ++d) e[d] -= proj * q[d];
        }
      }
    }
    if (norm(e) > 1e-9) return normalized(e);
  }
  throw ValidationError("simulator: failed to draw a false-positive embedding");
}

struct IdentityState {
  Box box;
  int occluded_frames_left = 0;
};

Box random_box(Rng& rng) {
  Box box;
  box.w = rng.uniform(0.05, 0.15);
  box.h = rng.uniform(0.08, 0.2);
  box.cx = rng.uniform(box.w / 2.0, 1.0 - box.w / 2.0);
  box.cy = rng.uniform(box.h / 2.0, 1.0 - box.h / 2.0);
  return box;
}

// Extents first, then the center re-clamped against the dyadic half-extents,
// so the snapped box still lies inside the unit square.
Box quantized(const Box& box) {
  Box out;
  out.w = quantize(box.w);
  out.h = quantize(box.h);
  out.cx = std::clamp(quantize(box.cx), out.w / 2.0, 1.0 - out.w / 2.0);
  out.cy = std::clamp(quantize(box.cy), out.h / 2.0, 1.0 - out.h / 2.0);
  return out;
}

SyntheticSequence generate_sequence(const SimulatorConfig& cfg, int video_index) {
  Rng rng(cfg.seed, static_cast<std::uint64_t>(video_index));
  SyntheticSequence seq;
  seq.video_id = video_index + 1;
  seq.latents = draw_latents(rng, cfg.identities_per_video, cfg.embedding_dim);
  const std::vector<Embedding> latent_basis = orthonormal_basis(seq.latents);

  std::vector<IdentityState> state(static_cast<std::size_t>(cfg.identities_per_video));
  for (IdentityState& s : state) s.box = random_box(rng);

  seq.gt_frames.resize(static_cast<std::size_t>(cfg.frames_per_video));
  seq.det_frames.resize(static_cast<std::size_t>(cfg.frames_per_video));

  for (int f = 0; f < cfg.frames_per_video; ++f) {
    auto& gt = seq.gt_frames[static_cast<std::size_t>(f)];
    auto& dets = seq.det_frames[static_cast<std::size_t>(f)];
    for (int k = 0; k < cfg.identities_per_video; ++k) {
      IdentityState& s = state[static_cast<std::size_t>(k)];
      s.box.cx += cfg.motion_step * rng.uniform(-1.0, 1.0);
      s.box.cy += cfg.motion_step * rng.uniform(-1.0, 1.0);
      s.box.cx = std::clamp(s.box.cx, s.box.w / 2.0, 1.0 - s.box.w / 2.0);
      s.box.cy = std::clamp(s.box.cy, s.box.h / 2.0, 1.0 - s.box.h / 2.0);
      const Box snapped = quantized(s.box);
      gt.push_back({k + 1, 1, snapped});

      if (s.occluded_frames_left > 0) {
        --s.occluded_frames_left;
        continue;
      }
      if (cfg.occlusion_probability > 0.0 && rng.uniform() < cfg.occlusion_probability) {
        s.occluded_frames_left =
            rng.uniform_int(cfg.occlusion_min_frames, cfg.occlusion_max_frames) - 1;
        continue;
      }
      if (cfg.miss_probability > 0.0 && rng.uniform() < cfg.miss_probability) continue;

      Detection det;
      det.category_id = 1;
      det.score = rng.uniform(cfg.score_min, cfg.score_max);
      det.box = snapped;
      if (cfg.noise_sigma == 0.0) {
        det.embedding = seq.latents[static_cast<std::size_t>(k)];
      } else {
        Embedding observed = seq.latents[static_cast<std::size_t>(k)];
        for (double& x : observed) x += cfg.noise_sigma * rng.gaussian();
        det.embedding = normalized(observed);
      }
      dets.push_back(std::move(det));
    }

    if (cfg.false_positive_rate > 0.0) {
      const int extras = rng.poisson(cfg.false_positive_rate);
      for (int e = 0; e < extras; ++e) {
        Detection det;
        det.category_id = 1;
        det.score = rng.uniform(cfg.score_min, cfg.score_max);
        det.box = quantized(random_box(rng));
        det.embedding = false_positive_embedding(rng, latent_basis, cfg.embedding_dim);
        dets.push_back(std::move(det));
      }
    }
  }
  return seq;
}

}  // namespace

SyntheticDataset generate(const SimulatorConfig& config) {
  config.validate();
  SyntheticDataset dataset;
  dataset.config = config;
  for (int v = 0; v < config.videos; ++v) {
    dataset.sequences.push_back(generate_sequence(config, v));
  }
  return dataset;
}

namespace {

void export_sequence(const SyntheticSequence& seq, const SimulatorConfig& cfg,
                     const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir.string());
  write_mot_gt(dir / "gt.txt", seq.gt_frames, cfg.image_width, cfg.image_height);
  std::vector<std::pair<int, std::vector<Detection>>> frames;
  for (std::size_t f = 0; f < seq.det_frames.size(); ++f) {
    frames.emplace_back(static_cast<int>(f) + 1, seq.det_frames[f]);
  }
  write_detections_jsonl(dir / "dets.jsonl", frames);
  write_meta(dir / "meta.json", cfg);
}

}  // namespace

void export_dataset(const SyntheticDataset& dataset, const std::filesystem::path& dir) {
  if (dataset.sequences.size() == 1) {
    export_sequence(dataset.sequences.front(), dataset.config, dir);
    return;
  }
  for (const SyntheticSequence& seq : dataset.sequences) {
    char name[16];
    std::snprintf(name, sizeof(name), "seq_%04d", seq.video_id);
    export_sequence(seq, dataset.config, dir / name);
  }
}

}  // namespace contrack
