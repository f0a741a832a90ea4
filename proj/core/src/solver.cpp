#include "mixmin/solver.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "mixmin/error.hpp"

namespace mixmin {

namespace {

double max_norm(const GradientVector& g) {
  double m = 0.0;
  for (double v : g) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

void SolverConfig::validate() const {
  if (!(eta > 0.0)) throw Error("step size must be > 0");
  if (steps < 1) throw Error("step count must be >= 1");
}

FitResult mixmin_fit(const PredictionMatrix& m, const SolverConfig& config) {
  config.validate();

  FitResult result;
  result.weights = uniform_weights(m.source_ids);
  if (config.record_trace) result.trace.entries.reserve(config.steps + 1);

  for (std::size_t step = 0; step <= config.steps; ++step) {
    // The pass at step == steps only records the final trace entry.
    if (step == config.steps && !config.record_trace) break;
    GradientVector g;
    try {
      g = gradient(m, result.weights);
      if (config.record_trace) {
        result.trace.entries.push_back(TraceEntry{
            result.weights, objective(m, result.weights), max_norm(g)});
      }
    } catch (const Error& e) {
      throw Error(std::string(e.what()) + " at step " + std::to_string(step));
    }
    if (step == config.steps) break;
    result.weights = entropic_step(result.weights, g, config.eta);
  }
  return result;
}

PredictionMatrix exact_expectation_matrix(const CategoricalWorld& world,
                                          const std::vector<Pmf>& proxies) {
  world.validate();
  if (proxies.size() != world.num_sources()) {
    throw Error("proxy count does not match world source count");
  }
  for (std::size_t p = 0; p < proxies.size(); ++p) {
    check_pmf(proxies[p], "proxy for source '" + world.source_ids[p] + "'",
              1e-9);
  }

  PredictionMatrix m;
  m.loss_kind = LossKind::kCeUnconditional;
  m.num_sources = world.num_sources();
  m.source_ids = world.source_ids;
  // Zero-mass target symbols are dropped: they contribute nothing to the
  // expectation and would otherwise force weight-0 rows through the
  // log-sum-exp.
  for (std::size_t v = 0; v < world.alphabet_size; ++v) {
    if (world.target[v] <= 0.0) continue;
    for (std::size_t p = 0; p < proxies.size(); ++p) {
      if (proxies[p][v] <= 0.0) {
        throw Error("proxy for source '" + world.source_ids[p] +
                    "' assigns zero probability to symbol " +
                    std::to_string(v) + " which has target mass");
      }
      m.scores.push_back(std::log(proxies[p][v]));
    }
    m.row_weights.push_back(world.target[v]);
    m.sample_ids.push_back("symbol_" + std::to_string(v));
    ++m.num_samples;
  }
  m.validate();
  return m;
}

PredictionMatrix sampled_matrix(const CategoricalWorld& world,
                                const std::vector<Pmf>& proxies,
                                const std::vector<std::size_t>& samples) {
  world.validate();
  if (proxies.size() != world.num_sources()) {
    throw Error("proxy count does not match world source count");
  }
  for (std::size_t p = 0; p < proxies.size(); ++p) {
    check_pmf(proxies[p], "proxy for source '" + world.source_ids[p] + "'",
              1e-9);
  }
  if (samples.empty()) throw Error("no samples");

  PredictionMatrix m;
  m.loss_kind = LossKind::kCeUnconditional;
  m.num_samples = samples.size();
  m.num_sources = world.num_sources();
  m.source_ids = world.source_ids;
  m.scores.reserve(samples.size() * proxies.size());
  m.sample_ids.reserve(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const std::size_t v = samples[i];
    if (v >= world.alphabet_size) {
      throw Error("sample symbol " + std::to_string(v) +
                  " outside the alphabet");
    }
    for (std::size_t p = 0; p < proxies.size(); ++p) {
      // log(0) = -inf is legal storage; it only bites if lambda puts mass on
      // that source at evaluation time.
      m.scores.push_back(std::log(proxies[p][v]));
    }
    m.sample_ids.push_back("sample_" + std::to_string(i));
  }
  m.validate();
  return m;
}

}  // namespace mixmin
