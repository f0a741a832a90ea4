#include <cmath>
#include <vector>

#include <doctest.h>

#include "mixmin/baselines.hpp"
#include "mixmin/error.hpp"
#include "mixmin/rng.hpp"
#include "mixmin/solver.hpp"
#include "mixmin/synthworld.hpp"
#include "test_util.hpp"

using namespace mixmin;
using testutil::contains;
using testutil::make_ce_matrix;
using testutil::make_weights;
using testutil::thrown_message;

namespace {

CategoricalWorld analytic_world() {
  CategoricalWorld w;
  w.alphabet_size = 2;
  w.sources = {{0.8, 0.2}, {0.2, 0.8}};
  w.target = {0.6, 0.4};
  w.source_ids = default_source_ids(2);
  w.validate();
  return w;
}

PredictionMatrix analytic_matrix() {
  const auto w = analytic_world();
  return exact_expectation_matrix(w, w.sources);
}

// Mirror-image columns make the objective symmetric about (0.5, 0.5).
PredictionMatrix symmetric_matrix() {
  return make_ce_matrix({{std::log(0.9), std::log(0.1)},
                         {std::log(0.1), std::log(0.9)}});
}

}  // namespace

TEST_CASE("random_search") {
  const auto m = analytic_matrix();

  SUBCASE("single source is trivial") {
    CategoricalWorld w;
    w.alphabet_size = 2;
    w.sources = {{0.6, 0.4}};
    w.target = {0.6, 0.4};
    w.source_ids = {"s"};
    w.validate();
    const auto r = random_search(exact_expectation_matrix(w, w.sources), 3, 0);
    CHECK(r.best[0] == 1.0);
    CHECK(r.evaluations.size() == 3);
  }
  SUBCASE("records every candidate and returns their minimum") {
    const auto r = random_search(m, 25, 7);
    REQUIRE(r.evaluations.size() == 25);
    double best = r.evaluations.front().objective;
    for (const auto& e : r.evaluations) best = std::min(best, e.objective);
    CHECK(r.best_objective == best);
    CHECK(r.best_objective == ce_objective(m, r.best));
  }
  SUBCASE("bitwise deterministic in the seed") {
    const auto a = random_search(m, 10, 3);
    const auto b = random_search(m, 10, 3);
    CHECK(a.best.values == b.best.values);
    CHECK(a.best_objective == b.best_objective);
    const auto c = random_search(m, 10, 4);
    CHECK(a.best.values != c.best.values);
  }
  SUBCASE("more candidates never hurt") {
    // Same seed: the first k draws of a longer run are a superset.
    const auto small = random_search(m, 3, 11);
    const auto large = random_search(m, 30, 11);
    CHECK(large.best_objective <= small.best_objective);
  }
  CHECK_THROWS_AS(random_search(m, 0, 1), Error);
}

TEST_CASE("grid_search") {
  SUBCASE("single source has a one-point grid") {
    CategoricalWorld w;
    w.alphabet_size = 2;
    w.sources = {{0.6, 0.4}};
    w.target = {0.6, 0.4};
    w.source_ids = {"s"};
    w.validate();
    const auto r = grid_search(exact_expectation_matrix(w, w.sources), 10);
    CHECK(r.best[0] == 1.0);
    CHECK(r.evaluated == 1);
  }
  SUBCASE("symmetric objective lands on the midpoint") {
    const auto r = grid_search(symmetric_matrix(), 10);
    CHECK(r.best[0] == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(r.evaluated == 11);
  }
  SUBCASE("fine grid brackets the analytic optimum") {
    const auto m = analytic_matrix();
    const auto r = grid_search(m, 1000);
    CHECK(r.best[0] == doctest::Approx(0.667).epsilon(1e-12));
    CHECK(r.evaluated == 1001);
    // Within a hair of the unconstrained optimum, the target entropy.
    CHECK(r.best_objective - 0.6730116670092565 <= 1e-6);
    CHECK(r.best_objective >= 0.6730116670092565);
  }
  SUBCASE("beats every grid point by construction") {
    const auto m = analytic_matrix();
    const auto r = grid_search(m, 25);
    for (std::size_t c = 0; c <= 25; ++c) {
      const auto w = make_weights(
          {static_cast<double>(c) / 25.0, static_cast<double>(25 - c) / 25.0});
      CHECK(r.best_objective <= ce_objective(m, w) + 1e-15);
    }
  }
  SUBCASE("composition count grows combinatorially and hits the cap") {
    const auto m = analytic_matrix();
    CHECK(grid_search(m, 100).evaluated == 101);
    const auto msg = thrown_message(
        [&] { grid_search(m, 100, /*max_compositions=*/50); });
    CHECK(contains(msg, "grid"));
  }
  SUBCASE("constant objective keeps the first lexicographic point") {
    const auto r = grid_minimize(
        3, 4, default_source_ids(3),
        [](const MixtureWeights&) { return 1.0; });
    // Enumeration starts at c = (0, 0, 4): all mass on the last source.
    CHECK(r.best.values == std::vector<double>{0.0, 0.0, 1.0});
    CHECK(r.evaluated == 15);  // C(4 + 2, 2)
  }
}

TEST_CASE("grid_minimize against the downstream oracle") {
  const auto w = analytic_world();
  const auto r = grid_minimize(
      2, 100, w.source_ids,
      [&](const MixtureWeights& lambda) { return dm_oracle(w, lambda); });
  CHECK(r.best[0] == doctest::Approx(0.67).epsilon(1e-12));
  CHECK(r.best[1] == doctest::Approx(0.33).epsilon(1e-12));
}

TEST_CASE("grid_minimize argument validation") {
  const auto noop = [](const MixtureWeights&) { return 0.0; };
  CHECK_THROWS_AS(grid_minimize(0, 10, {}, noop), Error);
  CHECK_THROWS_AS(grid_minimize(2, 0, default_source_ids(2), noop), Error);
  CHECK_THROWS_AS(
      grid_minimize(2, 10, default_source_ids(3), noop), Error);
}

TEST_CASE("regmix_lite_fit") {
  SUBCASE("recovers an exactly linear loss surface") {
    // loss = 0.2*a + 0.7*b + 0.5*c - 0.1 on the simplex.
    const std::vector<double> beta{0.2, 0.7, 0.5};
    Rng rng = make_rng(131);
    std::vector<CandidateEvaluation> obs;
    for (int i = 0; i < 12; ++i) {
      CandidateEvaluation e;
      e.weights.values = sample_simplex_uniform(3, rng);
      e.weights.source_ids = default_source_ids(3);
      e.objective = -0.1;
      for (std::size_t p = 0; p < 3; ++p) {
        e.objective += beta[p] * e.weights[p];
      }
      obs.push_back(std::move(e));
    }
    const auto s = regmix_lite_fit(obs);

    // The intercept is a gauge direction on the simplex, so check predictions
    // rather than raw coefficients.
    Rng probe = make_rng(137);
    for (int i = 0; i < 20; ++i) {
      MixtureWeights lambda;
      lambda.values = sample_simplex_uniform(3, probe);
      lambda.source_ids = s.source_ids;
      double truth = -0.1;
      for (std::size_t p = 0; p < 3; ++p) truth += beta[p] * lambda[p];
      CHECK(std::abs(s.predict(lambda) - truth) <= 1e-8);
    }
  }
  SUBCASE("a constant surface predicts the constant") {
    Rng rng = make_rng(139);
    std::vector<CandidateEvaluation> obs;
    for (int i = 0; i < 8; ++i) {
      CandidateEvaluation e;
      e.weights.values = sample_simplex_uniform(2, rng);
      e.weights.source_ids = default_source_ids(2);
      e.objective = 3.25;
      obs.push_back(std::move(e));
    }
    const auto s = regmix_lite_fit(obs);
    CHECK(s.predict(make_weights({0.9, 0.1})) ==
          doctest::Approx(3.25).epsilon(1e-10));
  }
  SUBCASE("too few observations") {
    std::vector<CandidateEvaluation> obs(2);
    for (auto& e : obs) e.weights = make_weights({0.5, 0.5});
    CHECK_THROWS_AS(regmix_lite_fit(obs), Error);
  }
  SUBCASE("repeated points cannot span the simplex") {
    std::vector<CandidateEvaluation> obs;
    for (int i = 0; i < 6; ++i) {
      CandidateEvaluation e;
      e.weights = make_weights({0.5, 0.5});
      e.objective = 1.0;
      obs.push_back(std::move(e));
    }
    CHECK(contains(thrown_message([&] { regmix_lite_fit(obs); }),
                   "rank-deficient"));
  }
  SUBCASE("mismatched source ids across observations") {
    std::vector<CandidateEvaluation> obs;
    for (int i = 0; i < 4; ++i) {
      CandidateEvaluation e;
      e.weights = (i == 0) ? make_weights({0.5, 0.5}, {"a", "b"})
                           : make_weights({0.3, 0.7});
      obs.push_back(std::move(e));
    }
    CHECK_THROWS_AS(regmix_lite_fit(obs), Error);
  }
}

TEST_CASE("regmix_lite_select") {
  RegressionSurrogate s;
  s.source_ids = default_source_ids(3);
  s.coefficients = {0.2, 0.7, 0.5};
  s.intercept = 0.0;

  SUBCASE("a linear surrogate drives mass to the cheapest source") {
    const auto w = regmix_lite_select(s, 10000, 17);
    CHECK(w[0] >= 0.9);
    CHECK(s.predict(w) <= 0.2 + 0.05);
  }
  SUBCASE("deterministic and tie-broken to the earliest draw") {
    const auto a = regmix_lite_select(s, 500, 3);
    const auto b = regmix_lite_select(s, 500, 3);
    CHECK(a.values == b.values);

    // Zero coefficients: every candidate predicts exactly the intercept.
    // (Nonzero equal coefficients would not tie exactly, because normalized
    // simplex draws can sum to 1 +/- one ulp.)
    RegressionSurrogate flat;
    flat.source_ids = default_source_ids(2);
    flat.coefficients = {0.0, 0.0};
    const auto first = regmix_lite_select(flat, 100, 3);
    // Every candidate predicts the same loss; the first draw must win.
    Rng rng = make_rng(3);
    const auto expected = sample_simplex_uniform(2, rng);
    CHECK(first.values == expected);
  }
  CHECK_THROWS_AS(regmix_lite_select(s, 0, 1), Error);
}

TEST_CASE("static_mixtures") {
  SUBCASE("proportional and uniform") {
    const auto s = static_mixtures({3.0, 1.0});
    CHECK(s.natural.values == std::vector<double>{0.75, 0.25});
    CHECK(s.balanced.values == std::vector<double>{0.5, 0.5});
  }
  SUBCASE("equal sizes coincide") {
    const auto s = static_mixtures({1.0, 1.0, 1.0});
    CHECK(s.natural.values == s.balanced.values);
  }
  SUBCASE("custom ids flow through") {
    const auto s = static_mixtures({2.0, 2.0}, {"web", "code"});
    CHECK(s.natural.source_ids == std::vector<std::string>{"web", "code"});
  }
  SUBCASE("sizes must be positive and finite") {
    CHECK_THROWS_AS(static_mixtures({8.2, 0.0}), Error);
    CHECK_THROWS_AS(static_mixtures({8.2, -1.0}), Error);
    CHECK_THROWS_AS(static_mixtures({}), Error);
  }
}
