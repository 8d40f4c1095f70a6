#include "contrack/contrastive.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <tuple>

#include "contrack/errors.hpp"
#include "contrack/random.hpp"

namespace contrack {

namespace {

constexpr double kMinTemperature = 1e-6;

void validate_temperature(double tau) {
  if (!(tau >= kMinTemperature)) {
    throw ValidationError("temperature must be >= 1e-6");
  }
}

}  // namespace

void MatchedEmbeddingBatch::validate() const {
  validate_temperature(temperature);
  const std::size_t d = dim();
  if (!entries.empty() && d == 0) {
    throw ValidationError("batch embeddings must be non-empty vectors");
  }
  std::set<std::tuple<int, int, int>> keys;
  for (const BatchEntry& e : entries) {
    if (e.embedding.size() != d) {
      throw ValidationError("batch embeddings must share one dimension");
    }
    if (!keys.emplace(e.video_id, e.instance_id, e.frame_id).second) {
      throw ValidationError("duplicate (video, instance, frame) in batch");
    }
  }
}

PositiveNegativePartition partition(const MatchedEmbeddingBatch& batch, std::size_t anchor) {
  if (anchor >= batch.size()) throw ValidationError("partition: anchor out of range");
  PositiveNegativePartition p;
  p.anchor = anchor;
  const BatchEntry& a = batch.entries[anchor];
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (j == anchor) continue;
    const BatchEntry& e = batch.entries[j];
    if (e.video_id == a.video_id && e.instance_id == a.instance_id) {
      p.positives.push_back(j);
    } else {
      p.negatives.push_back(j);
    }
  }
  return p;
}

double pair_loss_from_similarities(double positive_sim, std::span<const double> negative_sims,
                                   double temperature) {
  validate_temperature(temperature);
  if (negative_sims.empty()) return 0.0;
  const double a_pos = positive_sim / temperature;
  double shift = a_pos;
  for (const double s : negative_sims) shift = std::max(shift, s / temperature);
  double denom = std::exp(a_pos - shift);
  for (const double s : negative_sims) denom += std::exp(s / temperature - shift);
  // -a_pos + logsumexp(a_pos, negatives)
  return -a_pos + shift + std::log(denom);
}

double pair_loss(const Embedding& anchor, const Embedding& positive,
                 std::span<const Embedding> negatives, double temperature) {
  const double sim_pos = cosine_similarity(anchor, positive);
  std::vector<double> sims;
  sims.reserve(negatives.size());
  for (const Embedding& n : negatives) sims.push_back(cosine_similarity(anchor, n));
  return pair_loss_from_similarities(sim_pos, sims, temperature);
}

namespace {

std::vector<double> anchor_similarities(const MatchedEmbeddingBatch& batch,
                                        std::size_t anchor) {
  std::vector<double> sims(batch.size(), 0.0);
  for (std::size_t j = 0; j < batch.size(); ++j) {
    if (j == anchor) continue;
    sims[j] = cosine_similarity(batch.entries[anchor].embedding, batch.entries[j].embedding);
  }
  return sims;
}

double anchor_loss_impl(const MatchedEmbeddingBatch& batch,
                        const PositiveNegativePartition& p) {
  const std::vector<double> sims = anchor_similarities(batch, p.anchor);
  std::vector<double> negative_sims;
  negative_sims.reserve(p.negatives.size());
  for (const std::size_t k : p.negatives) negative_sims.push_back(sims[k]);
  double sum = 0.0;
  for (const std::size_t j : p.positives) {
    sum += pair_loss_from_similarities(sims[j], negative_sims, batch.temperature);
  }
  return sum / static_cast<double>(p.positives.size());
}

}  // namespace

double anchor_loss(const MatchedEmbeddingBatch& batch, std::size_t anchor) {
  batch.validate();
  const PositiveNegativePartition p = partition(batch, anchor);
  if (p.positives.empty()) {
    throw ValidationError("anchor_loss: anchor has no positives");
  }
  return anchor_loss_impl(batch, p);
}

double batch_contrastive_loss(const MatchedEmbeddingBatch& batch) {
  batch.validate();
  double sum = 0.0;
  std::size_t anchors_with_positives = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const PositiveNegativePartition p = partition(batch, i);
    if (p.positives.empty()) continue;
    sum += anchor_loss_impl(batch, p);
    ++anchors_with_positives;
  }
  if (anchors_with_positives == 0) return 0.0;
  return sum / static_cast<double>(anchors_with_positives);
}

namespace {

// d cos(x, y) / dx = y / (|x||y|) - cos(x, y) * x / |x|^2
void accumulate_cosine_grad(std::span<const double> x, std::span<const double> y,
                            double coeff, Embedding& grad_x, Embedding& grad_y) {
  const double nx = norm(x);
  const double ny = norm(y);
  const double cos_xy = dot(x, y) / (nx * ny);
  const double inv_xy = 1.0 / (nx * ny);
  for (std::size_t d = 0; d < x.size(); ++d) {
    grad_x[d] += coeff * (y[d] * inv_xy - cos_xy * x[d] / (nx * nx));
    grad_y[d] += coeff * (x[d] * inv_xy - cos_xy * y[d] / (ny * ny));
  }
}

}  // namespace

GradientArray contrastive_gradient(const MatchedEmbeddingBatch& batch) {
  batch.validate();
  GradientArray grad(batch.size(), Embedding(batch.dim(), 0.0));

  std::vector<PositiveNegativePartition> parts;
  parts.reserve(batch.size());
  std::size_t anchors_with_positives = 0;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    parts.push_back(partition(batch, i));
    if (!parts.back().positives.empty()) ++anchors_with_positives;
  }
  if (anchors_with_positives == 0) return grad;
  const double anchor_weight = 1.0 / static_cast<double>(anchors_with_positives);

  for (std::size_t i = 0; i < batch.size(); ++i) {
    const PositiveNegativePartition& p = parts[i];
    if (p.positives.empty()) continue;
    const std::vector<double> sims = anchor_similarities(batch, i);
    const double pair_weight = anchor_weight / static_cast<double>(p.positives.size());
    const Embedding& zi = batch.entries[i].embedding;

    for (const std::size_t j : p.positives) {
      // Softmax over {positive j} + negatives, max-shifted.
      double shift = sims[j] / batch.temperature;
      for (const std::size_t k : p.negatives) {
        shift = std::max(shift, sims[k] / batch.temperature);
      }
      const double w_pos = std::exp(sims[j] / batch.temperature - shift);
      double w_sum = w_pos;
      for (const std::size_t k : p.negatives) {
        w_sum += std::exp(sims[k] / batch.temperature - shift);
      }

      // d loss / d sim(i,j) = (p_j - 1) / tau; d loss / d sim(i,k) = p_k / tau.
      const double coeff_pos = pair_weight * (w_pos / w_sum - 1.0) / batch.temperature;
      accumulate_cosine_grad(zi, batch.entries[j].embedding, coeff_pos, grad[i], grad[j]);
      for (const std::size_t k : p.negatives) {
        const double w_k = std::exp(sims[k] / batch.temperature - shift);
        const double coeff_neg = pair_weight * (w_k / w_sum) / batch.temperature;
        accumulate_cosine_grad(zi, batch.entries[k].embedding, coeff_neg, grad[i], grad[k]);
      }
    }
  }
  return grad;
}

GradientArray finite_difference_gradient(const MatchedEmbeddingBatch& batch, double step) {
  batch.validate();
  if (!(step > 0.0)) throw ValidationError("finite difference step must be positive");
  GradientArray grad(batch.size(), Embedding(batch.dim(), 0.0));
  MatchedEmbeddingBatch work = batch;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    for (std::size_t d = 0; d < batch.dim(); ++d) {
      const double saved = work.entries[i].embedding[d];
      work.entries[i].embedding[d] = saved + step;
      const double up = batch_contrastive_loss(work);
      work.entries[i].embedding[d] = saved - step;
      const double down = batch_contrastive_loss(work);
      work.entries[i].embedding[d] = saved;
      grad[i][d] = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

void LossWeights::validate() const {
  for (const double v : {lambda_class, lambda_l1, lambda_giou, lambda_contr, focal_alpha,
                         focal_gamma}) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ValidationError("loss weights must be finite and non-negative");
    }
  }
}

double focal_loss(std::span<const double> scores, int target_category, double alpha,
                  double gamma) {
  if (target_category >= static_cast<int>(scores.size())) {
    throw ValidationError("focal_loss: target category outside score vector");
  }
  constexpr double eps = 1e-12;  // keeps log finite at exactly 0 or 1
  double loss = 0.0;
  for (std::size_t c = 0; c < scores.size(); ++c) {
    const double p = scores[c];
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ValidationError("focal_loss: scores must lie in [0, 1]");
    }
    const bool positive = target_category >= 0 && static_cast<std::size_t>(target_category) == c;
    const double p_t = positive ? p : 1.0 - p;
    const double alpha_t = positive ? alpha : 1.0 - alpha;
    loss += -alpha_t * std::pow(1.0 - p_t, gamma) * std::log(std::max(p_t, eps));
  }
  return loss;
}

double l1_box_loss(const Box& predicted, const Box& truth) {
  return std::abs(predicted.cx - truth.cx) + std::abs(predicted.cy - truth.cy) +
         std::abs(predicted.w - truth.w) + std::abs(predicted.h - truth.h);
}

double giou_loss(const Box& predicted, const Box& truth) {
  return 1.0 - giou(predicted, truth);
}

LossBreakdown total_loss(std::span<const ScoredBox> predictions,
                         std::span<const TruthBox> truths, const Assignment& matching,
                         const MatchedEmbeddingBatch& batch, const LossWeights& weights) {
  weights.validate();
  std::vector<int> target(predictions.size(), -1);  // -1 = background
  std::vector<char> truth_covered(truths.size(), 0);
  for (const auto& [pred, truth] : matching.pairs) {
    if (pred >= predictions.size() || truth >= truths.size()) {
      throw ValidationError("total_loss: matching index out of range");
    }
    if (target[pred] != -1 || truth_covered[truth]) {
      throw ValidationError("total_loss: matching reuses a prediction or truth");
    }
    target[pred] = truths[truth].category;
    truth_covered[truth] = 1;
  }
  for (std::size_t j = 0; j < truths.size(); ++j) {
    if (!truth_covered[j]) {
      throw ValidationError("total_loss: matching does not cover every truth");
    }
  }

  LossBreakdown out;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    out.classification +=
        focal_loss(predictions[i].scores, target[i], weights.focal_alpha, weights.focal_gamma);
  }
  if (!predictions.empty()) {
    out.classification /= static_cast<double>(predictions.size());
  }
  if (!matching.pairs.empty()) {
    for (const auto& [pred, truth] : matching.pairs) {
      out.l1 += l1_box_loss(predictions[pred].box, truths[truth].box);
      out.giou += giou_loss(predictions[pred].box, truths[truth].box);
    }
    out.l1 /= static_cast<double>(matching.pairs.size());
    out.giou /= static_cast<double>(matching.pairs.size());
  }
  out.contrastive = batch_contrastive_loss(batch);
  out.total = weights.lambda_class * out.classification + weights.lambda_l1 * out.l1 +
              weights.lambda_giou * out.giou + weights.lambda_contr * out.contrastive;
  return out;
}

MatchedEmbeddingBatch random_batch(std::uint64_t seed, std::size_t dim, std::size_t entries,
                                   double temperature) {
  if (dim == 0) throw ValidationError("random_batch: dimension must be positive");
  Rng rng(seed);
  MatchedEmbeddingBatch batch;
  batch.temperature = temperature;
  // Two videos with a handful of instances each; repeated (video, instance)
  // pairs across frames guarantee positive pairs exist.
  const int instances_per_video = std::max(1, static_cast<int>(entries) / 4);
  for (std::size_t n = 0; n < entries; ++n) {
    Embedding e(dim);
    for (double& x : e) x = rng.gaussian();
    BatchEntry entry;
    entry.embedding = normalized(e);
    entry.video_id = static_cast<int>(rng.uniform_below(2));
    entry.instance_id = static_cast<int>(rng.uniform_below(instances_per_video));
    entry.frame_id = static_cast<int>(n);  // unique per entry
    batch.entries.push_back(std::move(entry));
  }
  batch.validate();
  return batch;
}

}  // namespace contrack
