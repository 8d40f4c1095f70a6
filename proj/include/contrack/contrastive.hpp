#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "contrack/assignment.hpp"
#include "contrack/geometry.hpp"

namespace contrack {

// One embedding matched to a ground-truth object: the instance identity is
// the (video_id, instance_id) pair, frame_id distinguishes views of it.
struct BatchEntry {
  Embedding embedding;
  int video_id = 0;
  int instance_id = 0;
  int frame_id = 0;
};

struct MatchedEmbeddingBatch {
  std::vector<BatchEntry> entries;
  double temperature = 0.1;

  std::size_t size() const { return entries.size(); }
  std::size_t dim() const { return entries.empty() ? 0 : entries.front().embedding.size(); }

  // tau >= 1e-6, uniform dimension, unique (video, instance, frame) keys.
  void validate() const;
};

struct PositiveNegativePartition {
  std::size_t anchor = 0;
  std::vector<std::size_t> positives;  // same video and instance, anchor excluded
  std::vector<std::size_t> negatives;  // everything else
};

PositiveNegativePartition partition(const MatchedEmbeddingBatch& batch, std::size_t anchor);

// -log( e^{sim(i,j)/tau} / (e^{sim(i,j)/tau} + sum_k e^{sim(i,k)/tau}) ),
// evaluated with a max-shifted log-sum-exp. Only the anchor's negatives
// enter the denominator, so the value is invariant to other positives.
double pair_loss(const Embedding& anchor, const Embedding& positive,
                 std::span<const Embedding> negatives, double temperature);
double pair_loss_from_similarities(double positive_sim, std::span<const double> negative_sims,
                                   double temperature);

// Mean pair loss over the anchor's positives; throws when it has none.
double anchor_loss(const MatchedEmbeddingBatch& batch, std::size_t anchor);

// Mean anchor loss over anchors that have at least one positive; 0 when no
// anchor does.
double batch_contrastive_loss(const MatchedEmbeddingBatch& batch);

using GradientArray = std::vector<Embedding>;

// Exact analytic gradient of batch_contrastive_loss with respect to every
// embedding coordinate, differentiating through the cosine similarity.
GradientArray contrastive_gradient(const MatchedEmbeddingBatch& batch);

// Central-difference reference; kept independent of the analytic path.
GradientArray finite_difference_gradient(const MatchedEmbeddingBatch& batch,
                                         double step = 1e-5);

struct LossWeights {
  double lambda_class = 2.0;
  double lambda_l1 = 5.0;
  double lambda_giou = 2.0;
  double lambda_contr = 2.0;
  double focal_alpha = 0.25;
  double focal_gamma = 2.0;

  void validate() const;
};

// Sigmoid focal loss summed over categories; scores are per-category
// probabilities. A negative target selects the background (all-zeros) target.
double focal_loss(std::span<const double> scores, int target_category, double alpha,
                  double gamma);

double l1_box_loss(const Box& predicted, const Box& truth);
double giou_loss(const Box& predicted, const Box& truth);

struct LossBreakdown {
  double classification = 0.0;
  double l1 = 0.0;
  double giou = 0.0;
  double contrastive = 0.0;
  double total = 0.0;
};

// Weighted sum of the per-term means: classification over all predictions
// (unmatched predictions score against the background target), box terms
// over matched pairs, plus the batch contrastive loss.
LossBreakdown total_loss(std::span<const ScoredBox> predictions,
                         std::span<const TruthBox> truths, const Assignment& matching,
                         const MatchedEmbeddingBatch& batch, const LossWeights& weights);

// Seeded batch with unit-norm embeddings and repeated identities; used by the
// gradcheck command and the gradient tests.
MatchedEmbeddingBatch random_batch(std::uint64_t seed, std::size_t dim, std::size_t entries,
                                   double temperature = 0.1);

}  // namespace contrack
