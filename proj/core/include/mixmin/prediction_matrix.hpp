#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace mixmin {

enum class LossKind {
  kCeUnconditional,  // scores are log f_p(x), the log-mass of the sample
  kCeConditional,    // scores are log f_p(y_true | x), valid only without
                     // covariate shift among the sources
  kMse,              // scores are raw predictions f_p(x); targets present
};

bool is_ce(LossKind kind);
std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view name);

// N target samples by P sources of proxy-model scores, plus targets for MSE.
// CE scores live in natural-log space; log(0) = -inf encodes a proxy that
// assigns zero probability and is legal storage (NaN and +inf are not). The
// objective reports the error only if the mixture itself has zero mass.
//
// row_weights is empty for the ordinary unweighted empirical mean (1/N per
// row). The exact-expectation construction weights one row per alphabet
// symbol by its target probability; validate() normalizes the weights to
// sum to 1.
struct PredictionMatrix {
  LossKind loss_kind = LossKind::kCeUnconditional;
  std::size_t num_samples = 0;
  std::size_t num_sources = 0;
  std::vector<double> scores;  // row-major [num_samples x num_sources]
  std::vector<double> targets;
  std::vector<double> row_weights;
  std::vector<std::string> sample_ids;
  std::vector<std::string> source_ids;

  double score(std::size_t i, std::size_t p) const {
    return scores[i * num_sources + p];
  }
  std::span<const double> row(std::size_t i) const {
    return {scores.data() + i * num_sources, num_sources};
  }
  double row_weight(std::size_t i) const {
    return row_weights.empty() ? 1.0 / static_cast<double>(num_samples)
                               : row_weights[i];
  }

  // Checks every invariant, fills in default sample ids when missing, and
  // normalizes row_weights. Throws mixmin::Error with the offending
  // row/column on violation.
  void validate();
};

}  // namespace mixmin
