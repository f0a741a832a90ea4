#pragma once

// The mixture empirical objective and its exact gradient, for unconditional
// CE, conditional CE, and MSE over a PredictionMatrix. Both are convex in
// the weights. Accumulation is fixed-order sequential in 64-bit floats, so
// results are bit-reproducible for identical inputs.

#include <span>

#include "mixmin/prediction_matrix.hpp"
#include "mixmin/simplex.hpp"

namespace mixmin {

using ObjectiveValue = double;

// log sum_p lambda_p exp(log_row[p]) via a max-shifted log-sum-exp over the
// support of lambda. Sources with lambda_p = 0 contribute nothing even when
// their score is -inf. Throws when every supported score is -inf.
double mix_log_scores(std::span<const double> log_row,
                      const MixtureWeights& lambda);

// -(1/N) sum_i mix_log_scores(row_i, lambda), in nats (row weights replace
// 1/N when present).
ObjectiveValue ce_objective(const PredictionMatrix& m,
                            const MixtureWeights& lambda);

// g_p = -(1/N) sum_i exp(score_{i,p} - mix_log_scores(row_i, lambda)).
// Satisfies dot(lambda, g) = -1.
GradientVector ce_gradient(const PredictionMatrix& m,
                           const MixtureWeights& lambda);

// (1/N) sum_i (sum_p lambda_p score_{i,p} - y_i)^2.
ObjectiveValue mse_objective(const PredictionMatrix& m,
                             const MixtureWeights& lambda);

// g_p = (2/N) sum_i (prediction_i - y_i) * score_{i,p}.
GradientVector mse_gradient(const PredictionMatrix& m,
                            const MixtureWeights& lambda);

// Dispatch on m.loss_kind.
ObjectiveValue objective(const PredictionMatrix& m,
                         const MixtureWeights& lambda);
GradientVector gradient(const PredictionMatrix& m,
                        const MixtureWeights& lambda);

}  // namespace mixmin
