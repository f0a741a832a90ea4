#include "mixmin/objectives.hpp"

#include <cmath>
#include <limits>

#include "mixmin/error.hpp"

namespace mixmin {

namespace {

void check_alignment(const PredictionMatrix& m, const MixtureWeights& lambda) {
  check_weights(lambda);
  if (lambda.size() != m.num_sources) {
    throw Error("weight vector has " + std::to_string(lambda.size()) +
                " entries but matrix has " + std::to_string(m.num_sources) +
                " sources");
  }
  if (lambda.source_ids != m.source_ids) {
    throw Error("weight source ids do not match matrix source ids");
  }
}

void check_kind(const PredictionMatrix& m, bool want_ce, const char* op) {
  if (is_ce(m.loss_kind) != want_ce) {
    throw Error(std::string(op) + " called on a " +
                std::string(to_string(m.loss_kind)) + " matrix");
  }
}

}  // namespace

double mix_log_scores(std::span<const double> log_row,
                      const MixtureWeights& lambda) {
  if (log_row.size() != lambda.size()) {
    throw Error("score row length does not match weight length");
  }
  double max_arg = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < lambda.size(); ++p) {
    if (lambda[p] > 0.0 && log_row[p] > max_arg) max_arg = log_row[p];
  }
  if (!std::isfinite(max_arg)) {
    throw Error("mixture assigns zero probability");
  }
  double sum = 0.0;
  for (std::size_t p = 0; p < lambda.size(); ++p) {
    if (lambda[p] > 0.0) sum += lambda[p] * std::exp(log_row[p] - max_arg);
  }
  return max_arg + std::log(sum);
}

ObjectiveValue ce_objective(const PredictionMatrix& m,
                            const MixtureWeights& lambda) {
  check_alignment(m, lambda);
  check_kind(m, /*want_ce=*/true, "ce_objective");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    double mix;
    try {
      mix = mix_log_scores(m.row(i), lambda);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at sample '" + m.sample_ids[i] +
                  "'");
    }
    acc -= m.row_weight(i) * mix;
  }
  return acc;
}

GradientVector ce_gradient(const PredictionMatrix& m,
                           const MixtureWeights& lambda) {
  check_alignment(m, lambda);
  check_kind(m, /*want_ce=*/true, "ce_gradient");
  GradientVector grad(m.num_sources, 0.0);
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    double mix;
    try {
      mix = mix_log_scores(m.row(i), lambda);
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at sample '" + m.sample_ids[i] +
                  "'");
    }
    const double w = m.row_weight(i);
    const auto row = m.row(i);
    for (std::size_t p = 0; p < m.num_sources; ++p) {
      // exp(-inf - mix) = 0: a zero-probability proxy has zero pull.
      grad[p] -= w * std::exp(row[p] - mix);
    }
  }
  return grad;
}

ObjectiveValue mse_objective(const PredictionMatrix& m,
                             const MixtureWeights& lambda) {
  check_alignment(m, lambda);
  check_kind(m, /*want_ce=*/false, "mse_objective");
  double acc = 0.0;
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    const auto row = m.row(i);
    double pred = 0.0;
    for (std::size_t p = 0; p < m.num_sources; ++p) pred += lambda[p] * row[p];
    const double r = pred - m.targets[i];
    acc += m.row_weight(i) * r * r;
  }
  return acc;
}

GradientVector mse_gradient(const PredictionMatrix& m,
                            const MixtureWeights& lambda) {
  check_alignment(m, lambda);
  check_kind(m, /*want_ce=*/false, "mse_gradient");
  GradientVector grad(m.num_sources, 0.0);
  for (std::size_t i = 0; i < m.num_samples; ++i) {
    const auto row = m.row(i);
    double pred = 0.0;
    for (std::size_t p = 0; p < m.num_sources; ++p) pred += lambda[p] * row[p];
    const double scale = 2.0 * m.row_weight(i) * (pred - m.targets[i]);
    for (std::size_t p = 0; p < m.num_sources; ++p) grad[p] += scale * row[p];
  }
  return grad;
}

ObjectiveValue objective(const PredictionMatrix& m,
                         const MixtureWeights& lambda) {
  return is_ce(m.loss_kind) ? ce_objective(m, lambda)
                            : mse_objective(m, lambda);
}

GradientVector gradient(const PredictionMatrix& m,
                        const MixtureWeights& lambda) {
  return is_ce(m.loss_kind) ? ce_gradient(m, lambda) : mse_gradient(m, lambda);
}

}  // namespace mixmin
