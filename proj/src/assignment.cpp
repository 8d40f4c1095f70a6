#include "contrack/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "contrack/errors.hpp"

namespace contrack {

CostMatrix::CostMatrix(std::size_t rows, std::size_t cols, AssignMode mode)
    : rows_(rows), cols_(cols), mode_(mode), values_(rows * cols, 0.0),
      forbidden_(rows * cols, 0) {}

CostMatrix::CostMatrix(const std::vector<std::vector<double>>& entries, AssignMode mode)
    : CostMatrix(entries.size(), entries.empty() ? 0 : entries.front().size(), mode) {
  for (std::size_t r = 0; r < rows_; ++r) {
    if (entries[r].size() != cols_) {
      throw ValidationError("CostMatrix: ragged row lengths");
    }
    for (std::size_t c = 0; c < cols_; ++c) set(r, c, entries[r][c]);
  }
}

std::size_t CostMatrix::index(std::size_t r, std::size_t c) const {
  if (r >= rows_ || c >= cols_) throw ValidationError("CostMatrix: index out of range");
  return r * cols_ + c;
}

void CostMatrix::set(std::size_t r, std::size_t c, double value) {
  if (!std::isfinite(value)) {
    throw ValidationError("CostMatrix: entries must be finite (use set_forbidden)");
  }
  values_[index(r, c)] = value;
}

void CostMatrix::set_forbidden(std::size_t r, std::size_t c) {
  forbidden_[index(r, c)] = 1;
  any_forbidden_ = true;
}

namespace {

// Shortest augmenting path solver for a dense minimization problem with
// rows <= cols. Every row ends up matched. 1-indexed internally with a
// virtual column 0, after the classic Kuhn-Munkres potentials formulation.
std::vector<int> solve_min_rect(const std::vector<double>& cost, int rows, int cols) {
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(rows + 1, 0.0), v(cols + 1, 0.0);
  std::vector<int> match(cols + 1, 0);  // match[j] = row occupying column j
  std::vector<int> way(cols + 1, 0);

  for (int i = 1; i <= rows; ++i) {
    match[0] = i;
    int j0 = 0;
    std::vector<double> min_v(cols + 1, inf);
    std::vector<char> used(cols + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = match[j0];
      double delta = inf;
      int j1 = -1;
      for (int j = 1; j <= cols; ++j) {
        if (used[j]) continue;
        const double cur = cost[(i0 - 1) * cols + (j - 1)] - u[i0] - v[j];
        if (cur < min_v[j]) {
          min_v[j] = cur;
          way[j] = j0;
        }
        if (min_v[j] < delta) {
          delta = min_v[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= cols; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          min_v[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const int j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> row_to_col(rows, -1);
  for (int j = 1; j <= cols; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

}  // namespace

Assignment solve_assignment(const CostMatrix& m) {
  Assignment result;
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows == 0 || cols == 0) {
    for (std::size_t r = 0; r < rows; ++r) result.unassigned_rows.push_back(r);
    for (std::size_t c = 0; c < cols; ++c) result.unassigned_cols.push_back(c);
    return result;
  }

  // Solve with rows on the short side; transpose back afterwards.
  const bool transposed = rows > cols;
  const std::size_t n_rows = transposed ? cols : rows;
  const std::size_t n_cols = transposed ? rows : cols;

  double max_abs = 0.0;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (!m.is_forbidden(r, c)) max_abs = std::max(max_abs, std::abs(m.at(r, c)));
    }
  }
  // One sentinel outweighs any achievable difference of real totals, so the
  // solver first minimizes the number of forbidden picks (maximizing the
  // cardinality of the permitted assignment), then the real cost.
  const double big = (2.0 * max_abs + 1.0) * (static_cast<double>(n_rows) + 1.0);
  const double sign = m.mode() == AssignMode::kMaximize ? -1.0 : 1.0;

  std::vector<double> cost(n_rows * n_cols, 0.0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    for (std::size_t c = 0; c < n_cols; ++c) {
      const std::size_t mr = transposed ? c : r;
      const std::size_t mc = transposed ? r : c;
      cost[r * n_cols + c] = m.is_forbidden(mr, mc) ? big : sign * m.at(mr, mc);
    }
  }

  const std::vector<int> row_to_col =
      solve_min_rect(cost, static_cast<int>(n_rows), static_cast<int>(n_cols));

  std::vector<char> row_used(rows, 0), col_used(cols, 0);
  for (std::size_t r = 0; r < n_rows; ++r) {
    const int c = row_to_col[r];
    if (c < 0) continue;
    const std::size_t mr = transposed ? static_cast<std::size_t>(c) : r;
    const std::size_t mc = transposed ? r : static_cast<std::size_t>(c);
    if (m.is_forbidden(mr, mc)) continue;  // matched through a sentinel: unassigned
    result.pairs.emplace_back(mr, mc);
    row_used[mr] = 1;
    col_used[mc] = 1;
  }
  std::sort(result.pairs.begin(), result.pairs.end());
  for (const auto& [r, c] : result.pairs) result.total += m.at(r, c);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!row_used[r]) result.unassigned_rows.push_back(r);
  }
  for (std::size_t c = 0; c < cols; ++c) {
    if (!col_used[c]) result.unassigned_cols.push_back(c);
  }
  return result;
}

namespace {

void validate_weights(const MatchWeights& w) {
  if (w.lambda_class < 0.0 || w.lambda_box < 0.0 || w.lambda_giou < 0.0) {
    throw ValidationError("match weights must be non-negative");
  }
  if (w.lambda_class == 0.0 && w.lambda_box == 0.0 && w.lambda_giou == 0.0) {
    throw ValidationError("at least one match weight must be positive");
  }
}

}  // namespace

Assignment detr_matching(std::span<const ScoredBox> predictions,
                         std::span<const TruthBox> truths, const MatchWeights& weights,
                         ClassCost class_cost) {
  validate_weights(weights);
  if (truths.empty()) {
    Assignment empty;
    for (std::size_t r = 0; r < predictions.size(); ++r) {
      empty.unassigned_rows.push_back(r);
    }
    return empty;
  }
  if (predictions.size() < truths.size()) {
    throw ValidationError("detr_matching: fewer predictions than ground-truth objects");
  }
  const std::size_t num_categories = predictions.front().scores.size();
  for (const ScoredBox& p : predictions) {
    if (p.scores.size() != num_categories) {
      throw ValidationError("detr_matching: inconsistent score vector lengths");
    }
  }

  CostMatrix cost(predictions.size(), truths.size(), AssignMode::kMinimize);
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    const ScoredBox& pred = predictions[i];
    for (std::size_t j = 0; j < truths.size(); ++j) {
      const TruthBox& truth = truths[j];
      if (truth.category < 0 || static_cast<std::size_t>(truth.category) >= num_categories) {
        throw ValidationError("detr_matching: truth category outside score vector");
      }
      const double prob = pred.scores[static_cast<std::size_t>(truth.category)];
      const double cls =
          class_cost == ClassCost::kOneMinusProb ? 1.0 - prob : -prob;
      double l1 = std::abs(pred.box.cx - truth.box.cx) + std::abs(pred.box.cy - truth.box.cy) +
                  std::abs(pred.box.w - truth.box.w) + std::abs(pred.box.h - truth.box.h);
      const double g = giou(pred.box, truth.box);
      cost.set(i, j,
               weights.lambda_class * cls + weights.lambda_box * l1 +
                   weights.lambda_giou * (1.0 - g));
    }
  }
  return solve_assignment(cost);
}

}  // namespace contrack
