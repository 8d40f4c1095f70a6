#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "contrack/geometry.hpp"

namespace contrack {

enum class AssignMode { kMinimize, kMaximize };

// Rectangular cost matrix with an optional forbidden mask. Forbidden pairs
// are stored as a mask rather than infinities so the solver never sees
// non-finite arithmetic.
class CostMatrix {
 public:
  CostMatrix(std::size_t rows, std::size_t cols, AssignMode mode);

  // Convenience for literal matrices in tests and small call sites.
  CostMatrix(const std::vector<std::vector<double>>& entries, AssignMode mode);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  AssignMode mode() const { return mode_; }

  void set(std::size_t r, std::size_t c, double value);  // throws on non-finite
  double at(std::size_t r, std::size_t c) const { return values_[r * cols_ + c]; }

  void set_forbidden(std::size_t r, std::size_t c);
  bool is_forbidden(std::size_t r, std::size_t c) const {
    return forbidden_[r * cols_ + c] != 0;
  }
  bool has_forbidden() const { return any_forbidden_; }

 private:
  std::size_t index(std::size_t r, std::size_t c) const;

  std::size_t rows_;
  std::size_t cols_;
  AssignMode mode_;
  std::vector<double> values_;
  std::vector<std::uint8_t> forbidden_;
  bool any_forbidden_ = false;
};

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // sorted by row
  double total = 0.0;  // sum of the selected matrix entries
  std::vector<std::size_t> unassigned_rows;
  std::vector<std::size_t> unassigned_cols;
};

// Optimal one-to-one assignment (Kuhn-Munkres, shortest augmenting path).
// Matches min(rows, cols) pairs when every pair is permitted; with forbidden
// pairs it first maximizes the number of permitted pairs, then optimizes the
// total among assignments of that size. Ties between equally good
// assignments are resolved arbitrarily.
Assignment solve_assignment(const CostMatrix& m);

struct MatchWeights {
  double lambda_class = 2.0;
  double lambda_box = 5.0;
  double lambda_giou = 2.0;
};

// How the classification part of the matching cost treats the predicted
// probability of the true category. Both choices differ by a constant per
// truth column, so they select the same optimal assignment; kOneMinusProb
// makes an exact match cost zero.
enum class ClassCost { kOneMinusProb, kNegProb };

struct ScoredBox {
  std::vector<double> scores;  // per-category probabilities in [0, 1]
  Box box;
};

struct TruthBox {
  int category = 0;
  Box box;
};

// Matches every ground-truth box to a distinct prediction by minimizing
// lambda_class * class_cost + lambda_box * |b_hat - b|_1 +
// lambda_giou * (1 - giou). Requires predictions >= truths; surplus
// predictions stay unassigned.
Assignment detr_matching(std::span<const ScoredBox> predictions,
                         std::span<const TruthBox> truths, const MatchWeights& weights,
                         ClassCost class_cost = ClassCost::kOneMinusProb);

}  // namespace contrack
