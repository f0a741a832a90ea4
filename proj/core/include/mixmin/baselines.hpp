#pragma once

// Reference mixture-selection methods evaluated against the same objective as
// the solver: uniform random search over the simplex, exhaustive grid
// enumeration (which doubles as a brute-force oracle), a linear regression
// surrogate, and the static natural/balanced mixtures.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "mixmin/objectives.hpp"
#include "mixmin/prediction_matrix.hpp"
#include "mixmin/simplex.hpp"

namespace mixmin {

struct CandidateEvaluation {
  MixtureWeights weights;
  double objective = 0.0;
};

struct RandomSearchResult {
  MixtureWeights best;
  double best_objective = 0.0;
  std::vector<CandidateEvaluation> evaluations;
};

// k uniform simplex draws, argmin of the matrix objective. Ties go to the
// earliest candidate.
RandomSearchResult random_search(const PredictionMatrix& m, std::size_t k,
                                 std::uint64_t seed);

struct GridSearchResult {
  MixtureWeights best;
  double best_objective = 0.0;
  std::size_t evaluated = 0;
};

inline constexpr std::size_t kDefaultGridCap = 10'000'000;

// Exact minimum of `objective_fn` over all weight vectors whose entries are
// multiples of 1/denominator (compositions of `denominator` into num_parts
// parts, enumerated in lexicographic order; ties keep the first point).
// Refuses when the composition count exceeds max_compositions.
GridSearchResult grid_minimize(
    std::size_t num_parts, std::size_t denominator,
    std::vector<std::string> source_ids,
    const std::function<double(const MixtureWeights&)>& objective_fn,
    std::size_t max_compositions = kDefaultGridCap);

GridSearchResult grid_search(const PredictionMatrix& m,
                             std::size_t denominator,
                             std::size_t max_compositions = kDefaultGridCap);

struct RegressionSurrogate {
  std::vector<std::string> source_ids;
  std::vector<double> coefficients;  // one per source
  double intercept = 0.0;

  double predict(const MixtureWeights& lambda) const;
};

// Least-squares fit of loss ~ dot(beta, lambda) + beta0 from observed
// (weights, loss) pairs. Needs at least P+1 observations spanning the
// simplex's affine hull. On the simplex the intercept is a gauge direction
// (adding c to every coefficient and subtracting c from the intercept leaves
// all predictions unchanged), so compare surrogates by prediction.
RegressionSurrogate regmix_lite_fit(
    const std::vector<CandidateEvaluation>& observations);

// Samples `candidates` uniform simplex points and returns the one with the
// lowest predicted loss; ties keep the earliest.
MixtureWeights regmix_lite_select(const RegressionSurrogate& surrogate,
                                  std::size_t candidates, std::uint64_t seed);

struct StaticMixtures {
  MixtureWeights natural;   // proportional to source sizes
  MixtureWeights balanced;  // uniform
};

StaticMixtures static_mixtures(const std::vector<double>& source_sizes,
                               std::vector<std::string> source_ids = {});

}  // namespace mixmin
