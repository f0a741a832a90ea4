#pragma once

// Entropic mirror descent on the mixture objective: start uniform, repeat
// lambda_p <- lambda_p * exp(-eta * g_p) / Z. Full batch; the scores are
// precomputed once in the PredictionMatrix, so each step costs O(P * N).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mixmin/objectives.hpp"
#include "mixmin/prediction_matrix.hpp"
#include "mixmin/simplex.hpp"
#include "mixmin/synthworld.hpp"

namespace mixmin {

struct SolverConfig {
  double eta = 1.0;
  std::size_t steps = 100;
  // Reserved for a future stochastic-minibatch mode; the full-batch path is
  // deterministic and never reads it.
  std::uint64_t seed = 0;
  bool record_trace = true;

  void validate() const;
};

struct TraceEntry {
  MixtureWeights weights;
  double objective = 0.0;
  double gradient_max_norm = 0.0;
};

// steps + 1 entries when recorded: the initial point and one per update.
struct SolverTrace {
  std::vector<TraceEntry> entries;
};

struct FitResult {
  MixtureWeights weights;
  SolverTrace trace;
};

FitResult mixmin_fit(const PredictionMatrix& m, const SolverConfig& config);

// Replaces a sampled target set with the exact expectation under the target
// pmf: one row per target-supported symbol, weighted by its target mass, with
// log proxy scores. The CE objective on this matrix equals H(target, f_lambda)
// exactly. Every proxy must be positive wherever the target has mass.
PredictionMatrix exact_expectation_matrix(const CategoricalWorld& world,
                                          const std::vector<Pmf>& proxies);

// Sampled counterpart: rows are the drawn symbols in order, uniform weights.
PredictionMatrix sampled_matrix(const CategoricalWorld& world,
                                const std::vector<Pmf>& proxies,
                                const std::vector<std::size_t>& samples);

}  // namespace mixmin
