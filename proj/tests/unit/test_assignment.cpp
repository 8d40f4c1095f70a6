#include <doctest.h>

#include <cmath>

#include "contrack/assignment.hpp"
#include "contrack/errors.hpp"
#include "contrack/random.hpp"
#include "oracles/brute_force.hpp"

using namespace contrack;

namespace {

// Dyadic entries keep every partial sum exact, so solver and oracle totals
// can be compared with == instead of a tolerance.
double dyadic(Rng& rng) {
  return static_cast<double>(rng.uniform_int(-2048, 2048)) / 256.0;
}

CostMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols, AssignMode mode,
                         double forbidden_fraction) {
  CostMatrix m(rows, cols, mode);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      m.set(r, c, dyadic(rng));
      if (forbidden_fraction > 0.0 && rng.uniform() < forbidden_fraction) {
        m.set_forbidden(r, c);
      }
    }
  }
  return m;
}

}  // namespace

TEST_CASE("symmetric 2x2 minimization") {
  const CostMatrix m({{1, 2}, {2, 1}}, AssignMode::kMinimize);
  const Assignment a = solve_assignment(m);
  REQUIRE(a.pairs.size() == 2);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.pairs[1] == std::pair<std::size_t, std::size_t>{1, 1});
  CHECK(a.total == 2.0);
  CHECK(a.unassigned_rows.empty());
  CHECK(a.unassigned_cols.empty());
}

TEST_CASE("tall matrix leaves surplus rows unassigned") {
  const CostMatrix m({{0.9}, {0.8}}, AssignMode::kMaximize);
  const Assignment a = solve_assignment(m);
  const auto oracle = oracle::brute_force_assignment(m);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.total == 0.9);
  CHECK(a.total == oracle.total);
  REQUIRE(a.unassigned_rows.size() == 1);
  CHECK(a.unassigned_rows[0] == 1);
}

TEST_CASE("empty matrices are legal") {
  const Assignment a = solve_assignment(CostMatrix(0, 0, AssignMode::kMinimize));
  CHECK(a.pairs.empty());
  CHECK(a.total == 0.0);

  const Assignment b = solve_assignment(CostMatrix(3, 0, AssignMode::kMinimize));
  CHECK(b.pairs.empty());
  CHECK(b.unassigned_rows.size() == 3);
}

TEST_CASE("row with every column forbidden is reported unassigned") {
  CostMatrix m({{1, 2}, {3, 4}, {5, 6}}, AssignMode::kMinimize);
  m.set_forbidden(1, 0);
  m.set_forbidden(1, 1);
  const Assignment a = solve_assignment(m);
  REQUIRE(a.pairs.size() == 2);
  REQUIRE(a.unassigned_rows.size() == 1);
  CHECK(a.unassigned_rows[0] == 1);
  CHECK(a.total == 1.0 + 6.0);
}

TEST_CASE("non-finite entries are rejected") {
  CostMatrix m(1, 1, AssignMode::kMinimize);
  CHECK_THROWS_AS(m.set(0, 0, std::numeric_limits<double>::infinity()), ValidationError);
  CHECK_THROWS_AS(m.set(0, 0, std::nan("")), ValidationError);
}

TEST_CASE("random 6x6 minimization equals the 720-permutation optimum") {
  Rng rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    const CostMatrix m = random_matrix(rng, 6, 6, AssignMode::kMinimize, 0.0);
    const Assignment got = solve_assignment(m);
    const auto want = oracle::brute_force_assignment(m);
    CHECK(got.pairs.size() == want.cardinality);
    CHECK(got.total == want.total);
  }
}

TEST_CASE("agreement with brute force over shapes, modes and forbidden masks") {
  Rng rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t rows = 1 + rng.uniform_below(7);
    const std::size_t cols = 1 + rng.uniform_below(7);
    const AssignMode mode =
        rng.uniform() < 0.5 ? AssignMode::kMinimize : AssignMode::kMaximize;
    const double forbidden = trial % 2 == 0 ? 0.0 : rng.uniform(0.0, 0.5);
    const CostMatrix m = random_matrix(rng, rows, cols, mode, forbidden);
    const Assignment got = solve_assignment(m);
    const auto want = oracle::brute_force_assignment(m);
    CHECK(got.pairs.size() == want.cardinality);
    CHECK(got.total == want.total);
  }
}

TEST_CASE("negated minimization equals maximization") {
  Rng rng(31);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t rows = 1 + rng.uniform_below(6);
    const std::size_t cols = 1 + rng.uniform_below(6);
    CostMatrix max_m(rows, cols, AssignMode::kMaximize);
    CostMatrix neg_min(rows, cols, AssignMode::kMinimize);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        const double v = dyadic(rng);
        max_m.set(r, c, v);
        neg_min.set(r, c, -v);
      }
    }
    CHECK(solve_assignment(max_m).total == -solve_assignment(neg_min).total);
  }
}

TEST_CASE("adding a constant to a square matrix preserves the optimum set") {
  Rng rng(57);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + rng.uniform_below(5);
    CostMatrix base(n, n, AssignMode::kMinimize);
    CostMatrix shifted(n, n, AssignMode::kMinimize);
    const double shift = dyadic(rng);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t c = 0; c < n; ++c) {
        const double v = dyadic(rng);
        base.set(r, c, v);
        shifted.set(r, c, v + shift);
      }
    }
    const Assignment a = solve_assignment(base);
    const Assignment b = solve_assignment(shifted);
    CHECK(b.total == a.total + shift * static_cast<double>(n));
  }
}

namespace {

ScoredBox make_pred(Rng& rng, std::size_t categories) {
  ScoredBox pred;
  pred.scores.resize(categories);
  for (double& s : pred.scores) s = rng.uniform();
  pred.box = Box{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8), rng.uniform(0.05, 0.3),
                 rng.uniform(0.05, 0.3)};
  return pred;
}

double matching_cost(const ScoredBox& pred, const TruthBox& truth, const MatchWeights& w) {
  const double cls = 1.0 - pred.scores[static_cast<std::size_t>(truth.category)];
  const double l1 = std::abs(pred.box.cx - truth.box.cx) + std::abs(pred.box.cy - truth.box.cy) +
                    std::abs(pred.box.w - truth.box.w) + std::abs(pred.box.h - truth.box.h);
  return w.lambda_class * cls + w.lambda_box * l1 + w.lambda_giou * (1.0 - giou(pred.box, truth.box));
}

}  // namespace

TEST_CASE("exact prediction matches its truth at zero cost") {
  const Box box{0.5, 0.5, 0.2, 0.2};
  ScoredBox perfect{{0.0, 1.0, 0.0}, box};
  ScoredBox other{{0.3, 0.3, 0.3}, Box{0.8, 0.8, 0.1, 0.1}};
  const TruthBox truth{1, box};
  const MatchWeights weights{2.0, 5.0, 2.0};
  const Assignment a = detr_matching(std::vector{perfect, other}, std::vector{truth}, weights);
  REQUIRE(a.pairs.size() == 1);
  CHECK(a.pairs[0] == std::pair<std::size_t, std::size_t>{0, 0});
  CHECK(a.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("detr matching equals the exhaustive injection optimum") {
  Rng rng(23);
  const MatchWeights weights{2.0, 5.0, 2.0};
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<ScoredBox> preds;
    for (int i = 0; i < 5; ++i) preds.push_back(make_pred(rng, 4));
    std::vector<TruthBox> truths;
    for (int j = 0; j < 3; ++j) {
      truths.push_back({static_cast<int>(rng.uniform_below(4)),
                        Box{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                            rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)}});
    }
    const Assignment got = detr_matching(preds, truths, weights);
    REQUIRE(got.pairs.size() == truths.size());

    double best = std::numeric_limits<double>::infinity();
    oracle::for_each_matching(
        truths.size(), preds.size(), [](std::size_t, std::size_t) { return true; },
        [&](const std::vector<int>& match) {
          double total = 0.0;
          for (std::size_t t = 0; t < truths.size(); ++t) {
            if (match[t] < 0) return;  // every truth must be covered
            total += matching_cost(preds[static_cast<std::size_t>(match[t])], truths[t], weights);
          }
          best = std::min(best, total);
        });
    CHECK(got.total == doctest::Approx(best).epsilon(1e-9));
  }
}

TEST_CASE("both classification cost styles pick the same pairs") {
  Rng rng(77);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<ScoredBox> preds;
    for (int i = 0; i < 4; ++i) preds.push_back(make_pred(rng, 3));
    std::vector<TruthBox> truths;
    for (int j = 0; j < 4; ++j) {
      truths.push_back({static_cast<int>(rng.uniform_below(3)),
                        Box{rng.uniform(0.2, 0.8), rng.uniform(0.2, 0.8),
                            rng.uniform(0.05, 0.3), rng.uniform(0.05, 0.3)}});
    }
    const MatchWeights weights{2.0, 5.0, 2.0};
    const Assignment a = detr_matching(preds, truths, weights, ClassCost::kOneMinusProb);
    const Assignment b = detr_matching(preds, truths, weights, ClassCost::kNegProb);
    CHECK(a.pairs == b.pairs);
  }
}

TEST_CASE("detr matching error paths") {
  const TruthBox truth{0, Box{0.5, 0.5, 0.1, 0.1}};
  CHECK_THROWS_AS(detr_matching(std::vector<ScoredBox>{}, std::vector{truth}, MatchWeights{}),
                  ValidationError);

  std::vector<ScoredBox> ragged{{{0.5, 0.5}, Box{0.5, 0.5, 0.1, 0.1}},
                                {{0.5}, Box{0.5, 0.5, 0.1, 0.1}}};
  CHECK_THROWS_AS(detr_matching(ragged, std::vector{truth, truth}, MatchWeights{}),
                  ValidationError);

  CHECK_THROWS_AS(detr_matching(ragged, std::vector{truth}, MatchWeights{0.0, 0.0, 0.0}),
                  ValidationError);

  // No truths: legal, every prediction unassigned.
  const Assignment a =
      detr_matching(std::vector<ScoredBox>{{{0.5}, Box{0.5, 0.5, 0.1, 0.1}}},
                    std::vector<TruthBox>{}, MatchWeights{});
  CHECK(a.pairs.empty());
  CHECK(a.unassigned_rows.size() == 1);
}
