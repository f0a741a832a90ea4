#include "mixmin/baselines.hpp"

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "mixmin/error.hpp"
#include "mixmin/rng.hpp"

namespace mixmin {

namespace {

// Compositions of n into k parts: C(n + k - 1, k - 1). Saturates at cap + 1.
std::size_t composition_count(std::size_t n, std::size_t k, std::size_t cap) {
  unsigned long long r = 1;
  for (std::size_t i = 1; i < k; ++i) {
    // C(n+i, i) = C(n+i-1, i-1) * (n+i) / i, exactly divisible at each step.
    const auto t = static_cast<unsigned __int128>(r) * (n + i) / i;
    if (t > cap) return cap + 1;
    r = static_cast<unsigned long long>(t);
  }
  return static_cast<std::size_t>(r);
}

MixtureWeights weights_from_counts(const std::vector<std::size_t>& counts,
                                   std::size_t denominator,
                                   const std::vector<std::string>& ids) {
  MixtureWeights w;
  w.source_ids = ids;
  w.values.resize(counts.size());
  for (std::size_t p = 0; p < counts.size(); ++p) {
    w.values[p] =
        static_cast<double>(counts[p]) / static_cast<double>(denominator);
  }
  return w;
}

}  // namespace

RandomSearchResult random_search(const PredictionMatrix& m, std::size_t k,
                                 std::uint64_t seed) {
  if (k < 1) throw Error("candidate count must be >= 1");
  Rng rng = make_rng(seed);

  RandomSearchResult result;
  result.evaluations.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    MixtureWeights lambda;
    lambda.values = sample_simplex_uniform(m.num_sources, rng);
    lambda.source_ids = m.source_ids;
    const double obj = objective(m, lambda);
    if (result.evaluations.empty() || obj < result.best_objective) {
      result.best = lambda;
      result.best_objective = obj;
    }
    result.evaluations.push_back(CandidateEvaluation{std::move(lambda), obj});
  }
  return result;
}

GridSearchResult grid_minimize(
    std::size_t num_parts, std::size_t denominator,
    std::vector<std::string> source_ids,
    const std::function<double(const MixtureWeights&)>& objective_fn,
    std::size_t max_compositions) {
  if (num_parts < 1) throw Error("no sources");
  if (denominator < 1) throw Error("grid denominator must be >= 1");
  if (source_ids.size() != num_parts) {
    throw Error("source_ids length does not match part count");
  }
  const std::size_t total =
      composition_count(denominator, num_parts, max_compositions);
  if (total > max_compositions) {
    throw Error("grid of " + std::to_string(num_parts) + " sources at 1/" +
                std::to_string(denominator) +
                " exceeds the enumeration cap; reduce the resolution");
  }

  GridSearchResult result;
  std::vector<std::size_t> counts(num_parts, 0);
  // Lexicographic enumeration; the first strict minimum wins, so ties resolve
  // to the lexicographically smallest point.
  auto visit = [&](const std::vector<std::size_t>& c) {
    MixtureWeights lambda = weights_from_counts(c, denominator, source_ids);
    const double obj = objective_fn(lambda);
    if (result.evaluated == 0 || obj < result.best_objective) {
      result.best = std::move(lambda);
      result.best_objective = obj;
    }
    ++result.evaluated;
  };
  std::function<void(std::size_t, std::size_t)> rec =
      [&](std::size_t pos, std::size_t remaining) {
        if (pos + 1 == num_parts) {
          counts[pos] = remaining;
          visit(counts);
          return;
        }
        for (std::size_t c = 0; c <= remaining; ++c) {
          counts[pos] = c;
          rec(pos + 1, remaining - c);
        }
      };
  rec(0, denominator);
  return result;
}

GridSearchResult grid_search(const PredictionMatrix& m,
                             std::size_t denominator,
                             std::size_t max_compositions) {
  return grid_minimize(
      m.num_sources, denominator, m.source_ids,
      [&m](const MixtureWeights& lambda) { return objective(m, lambda); },
      max_compositions);
}

double RegressionSurrogate::predict(const MixtureWeights& lambda) const {
  check_weights(lambda);
  if (lambda.source_ids != source_ids) {
    throw Error("weight source ids do not match surrogate source ids");
  }
  double y = intercept;
  for (std::size_t p = 0; p < coefficients.size(); ++p) {
    y += coefficients[p] * lambda[p];
  }
  return y;
}

RegressionSurrogate regmix_lite_fit(
    const std::vector<CandidateEvaluation>& observations) {
  if (observations.empty()) throw Error("no observations");
  const std::size_t num_sources = observations.front().weights.size();
  if (observations.size() < num_sources + 1) {
    throw Error("need at least " + std::to_string(num_sources + 1) +
                " observations to fit " + std::to_string(num_sources) +
                " sources");
  }

  const auto& ids = observations.front().weights.source_ids;
  Eigen::MatrixXd design(observations.size(), num_sources + 1);
  Eigen::VectorXd losses(observations.size());
  for (std::size_t i = 0; i < observations.size(); ++i) {
    const auto& obs = observations[i];
    check_weights(obs.weights);
    if (obs.weights.source_ids != ids) {
      throw Error("observations disagree on source ids");
    }
    if (!std::isfinite(obs.objective)) {
      throw Error("non-finite loss in observation " + std::to_string(i));
    }
    for (std::size_t p = 0; p < num_sources; ++p) {
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)) =
          obs.weights[p];
    }
    design(static_cast<Eigen::Index>(i),
           static_cast<Eigen::Index>(num_sources)) = 1.0;
    losses(static_cast<Eigen::Index>(i)) = obs.objective;
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(
      design, Eigen::ComputeThinU | Eigen::ComputeThinV);
  svd.setThreshold(1e-8);
  // The intercept column is a linear combination of the weight columns (rows
  // sum to 1), so rank P is the most this design can have.
  if (svd.rank() < static_cast<Eigen::Index>(num_sources)) {
    throw Error("rank-deficient design: observations do not span the simplex");
  }
  const Eigen::VectorXd beta = svd.solve(losses);

  RegressionSurrogate surrogate;
  surrogate.source_ids = ids;
  surrogate.coefficients.assign(beta.data(), beta.data() + num_sources);
  surrogate.intercept = beta(static_cast<Eigen::Index>(num_sources));
  return surrogate;
}

MixtureWeights regmix_lite_select(const RegressionSurrogate& surrogate,
                                  std::size_t candidates, std::uint64_t seed) {
  if (surrogate.coefficients.empty() ||
      surrogate.coefficients.size() != surrogate.source_ids.size()) {
    throw Error("surrogate is not fitted");
  }
  if (candidates < 1) throw Error("candidate count must be >= 1");

  Rng rng = make_rng(seed);
  MixtureWeights best;
  double best_pred = 0.0;
  for (std::size_t i = 0; i < candidates; ++i) {
    MixtureWeights lambda;
    lambda.values = sample_simplex_uniform(surrogate.source_ids.size(), rng);
    lambda.source_ids = surrogate.source_ids;
    const double pred = surrogate.predict(lambda);
    if (i == 0 || pred < best_pred) {
      best = std::move(lambda);
      best_pred = pred;
    }
  }
  return best;
}

StaticMixtures static_mixtures(const std::vector<double>& source_sizes,
                               std::vector<std::string> source_ids) {
  if (source_sizes.empty()) throw Error("no sources");
  if (source_ids.empty()) {
    source_ids = default_source_ids(source_sizes.size());
  } else if (source_ids.size() != source_sizes.size()) {
    throw Error("sizes/source_ids length mismatch");
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < source_sizes.size(); ++p) {
    if (!(source_sizes[p] > 0.0) || !std::isfinite(source_sizes[p])) {
      throw Error("source size must be positive, got " +
                  std::to_string(source_sizes[p]) + " for '" + source_ids[p] +
                  "'");
    }
    sum += source_sizes[p];
  }

  StaticMixtures out;
  out.natural.source_ids = source_ids;
  out.natural.values.resize(source_sizes.size());
  for (std::size_t p = 0; p < source_sizes.size(); ++p) {
    out.natural.values[p] = source_sizes[p] / sum;
  }
  check_weights(out.natural);
  out.balanced = uniform_weights(std::move(source_ids));
  return out;
}

}  // namespace mixmin
