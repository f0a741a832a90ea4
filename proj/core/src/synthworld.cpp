#include "mixmin/synthworld.hpp"

#include <cmath>

#include "mixmin/error.hpp"
#include "mixmin/rng.hpp"

namespace mixmin {

namespace {

void check_probability(double v, const std::string& what) {
  if (!(v >= 0.0 && v <= 1.0)) {
    throw Error(what + " is not a probability: " + std::to_string(v));
  }
}

}  // namespace

void check_pmf(const Pmf& pmf, const std::string& what, double tol) {
  if (pmf.empty()) throw Error(what + ": empty pmf");
  double sum = 0.0;
  for (std::size_t v = 0; v < pmf.size(); ++v) {
    if (!std::isfinite(pmf[v])) {
      throw Error(what + ": non-finite entry at symbol " + std::to_string(v));
    }
    if (pmf[v] < 0.0) {
      throw Error(what + ": negative entry at symbol " + std::to_string(v));
    }
    sum += pmf[v];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw Error(what + ": entries sum to " + std::to_string(sum) +
                ", expected 1");
  }
}

Pmf normalize_pmf(std::vector<double> values, const std::string& what,
                  double tol) {
  check_pmf(values, what, tol);
  double sum = 0.0;
  for (double v : values) sum += v;
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& v : values) v /= sum;
  }
  return values;
}

double entropy(const Pmf& p) {
  double h = 0.0;
  for (double v : p) {
    if (v > 0.0) h -= v * std::log(v);
  }
  return h;
}

double cross_entropy(const Pmf& target, const Pmf& model) {
  if (target.size() != model.size()) {
    throw Error("cross_entropy: pmf lengths differ");
  }
  double h = 0.0;
  for (std::size_t v = 0; v < target.size(); ++v) {
    if (target[v] <= 0.0) continue;
    if (model[v] <= 0.0) {
      throw Error("model assigns zero probability to symbol " +
                  std::to_string(v) + " which has target mass");
    }
    h -= target[v] * std::log(model[v]);
  }
  return h;
}

void CategoricalWorld::validate() const {
  if (alphabet_size < 2) throw Error("alphabet size must be >= 2");
  if (sources.empty()) throw Error("no sources");
  if (source_ids.size() != sources.size()) {
    throw Error("world source_ids length does not match source count");
  }
  for (std::size_t p = 0; p < sources.size(); ++p) {
    if (sources[p].size() != alphabet_size) {
      throw Error("source '" + source_ids[p] + "' pmf has wrong length");
    }
    check_pmf(sources[p], "source '" + source_ids[p] + "'");
  }
  if (target.size() != alphabet_size) throw Error("target pmf has wrong length");
  check_pmf(target, "target");
}

CategoricalWorld gen_world(const WorldSpec& spec) {
  if (spec.alphabet_size < 2) throw Error("alphabet size must be >= 2");
  if (spec.num_sources < 1) throw Error("need at least one source");
  if (!(spec.concentration > 0.0)) {
    throw Error("Dirichlet concentration must be > 0");
  }
  CategoricalWorld world;
  world.alphabet_size = spec.alphabet_size;
  world.source_ids = default_source_ids(spec.num_sources);

  Rng rng = make_rng(spec.seed);
  world.sources.reserve(spec.num_sources);
  for (std::size_t p = 0; p < spec.num_sources; ++p) {
    world.sources.push_back(
        sample_dirichlet(spec.alphabet_size, spec.concentration, rng));
  }
  if (spec.target_weights.empty()) {
    world.target = sample_dirichlet(spec.alphabet_size, spec.concentration, rng);
  } else {
    MixtureWeights lambda = validate_simplex(
        spec.target_weights, kIngestSimplexTolerance, world.source_ids);
    world.target = mixture_pmf(world, lambda);
  }
  world.validate();
  return world;
}

Pmf mixture_pmf(const CategoricalWorld& world, const MixtureWeights& lambda) {
  check_weights(lambda);
  if (lambda.size() != world.num_sources()) {
    throw Error("weight vector has " + std::to_string(lambda.size()) +
                " entries but world has " +
                std::to_string(world.num_sources()) + " sources");
  }
  if (lambda.source_ids != world.source_ids) {
    throw Error("weight source ids do not match world source ids");
  }
  Pmf mix(world.alphabet_size, 0.0);
  for (std::size_t p = 0; p < world.num_sources(); ++p) {
    for (std::size_t v = 0; v < world.alphabet_size; ++v) {
      mix[v] += lambda[p] * world.sources[p][v];
    }
  }
  return mix;
}

std::vector<std::size_t> sample_target(const CategoricalWorld& world,
                                       std::size_t n, std::uint64_t seed) {
  world.validate();
  if (n < 1) throw Error("sample count must be >= 1");
  const auto cum = cumulative_pmf(world.target);
  Rng rng = make_rng(seed);
  std::vector<std::size_t> samples(n);
  for (auto& s : samples) s = sample_categorical(cum, rng);
  return samples;
}

Pmf train_empirical_proxy(const std::vector<std::size_t>& samples,
                          std::size_t alphabet_size, double alpha) {
  if (alphabet_size < 2) throw Error("alphabet size must be >= 2");
  if (!(alpha >= 0.0)) throw Error("smoothing alpha must be >= 0");
  if (samples.empty() && alpha == 0.0) {
    throw Error("empty sample with no smoothing");
  }
  std::vector<double> counts(alphabet_size, 0.0);
  for (std::size_t s : samples) {
    if (s >= alphabet_size) {
      throw Error("sample symbol " + std::to_string(s) +
                  " outside alphabet of size " + std::to_string(alphabet_size));
    }
    counts[s] += 1.0;
  }
  const double denom = static_cast<double>(samples.size()) +
                       alpha * static_cast<double>(alphabet_size);
  Pmf pmf(alphabet_size);
  for (std::size_t v = 0; v < alphabet_size; ++v) {
    pmf[v] = (counts[v] + alpha) / denom;
  }
  return pmf;
}

double dm_oracle(const CategoricalWorld& world, const MixtureWeights& lambda) {
  world.validate();
  return cross_entropy(world.target, mixture_pmf(world, lambda));
}

Pmf retrain_on_mixture(const CategoricalWorld& world,
                       const MixtureWeights& lambda, std::size_t n,
                       std::uint64_t seed, double alpha) {
  world.validate();
  if (n < 1) throw Error("sample count must be >= 1");
  const auto cum = cumulative_pmf(mixture_pmf(world, lambda));
  Rng rng = make_rng(seed);
  std::vector<std::size_t> samples(n);
  for (auto& s : samples) s = sample_categorical(cum, rng);
  return train_empirical_proxy(samples, world.alphabet_size, alpha);
}

void ShiftedConditionalWorld::validate() const {
  if (input_marginals.empty()) throw Error("no sources");
  if (conditionals.size() != input_marginals.size()) {
    throw Error("marginal/conditional source counts differ");
  }
  const std::size_t inputs = num_inputs();
  if (inputs == 0) throw Error("empty input set");
  for (std::size_t p = 0; p < num_sources(); ++p) {
    if (input_marginals[p].size() != inputs ||
        conditionals[p].size() != inputs) {
      throw Error("source " + std::to_string(p) +
                  " tables do not cover the input set");
    }
    check_pmf(input_marginals[p], "source " + std::to_string(p) + " marginal");
    for (std::size_t x = 0; x < inputs; ++x) {
      check_probability(conditionals[p][x], "source " + std::to_string(p) +
                                                " conditional at input " +
                                                std::to_string(x));
    }
  }
  if (!target_marginal.empty()) {
    if (target_marginal.size() != inputs ||
        target_conditional.size() != inputs) {
      throw Error("target tables do not cover the input set");
    }
    check_pmf(target_marginal, "target marginal");
    for (std::size_t x = 0; x < inputs; ++x) {
      check_probability(target_conditional[x],
                        "target conditional at input " + std::to_string(x));
    }
  }
}

double bayes_mixture_with_shift(const ShiftedConditionalWorld& world,
                                const MixtureWeights& lambda, std::size_t x) {
  world.validate();
  check_weights(lambda);
  if (lambda.size() != world.num_sources()) {
    throw Error("weight vector length does not match source count");
  }
  if (x >= world.num_inputs()) {
    throw Error("input index " + std::to_string(x) + " out of range");
  }
  double denom = 0.0;
  double numer = 0.0;
  for (std::size_t p = 0; p < world.num_sources(); ++p) {
    const double mass = lambda[p] * world.input_marginals[p][x];
    denom += mass;
    numer += mass * world.conditionals[p][x];
  }
  if (denom <= 0.0) {
    throw Error("mixture assigns zero probability to input " +
                std::to_string(x));
  }
  return numer / denom;
}

std::vector<Pmf> perturb_proxies(const std::vector<Pmf>& proxies,
                                 const PerturbationSpec& spec) {
  if (!(spec.epsilon >= 0.0)) throw Error("epsilon must be >= 0");
  for (std::size_t p = 0; p < proxies.size(); ++p) {
    check_pmf(proxies[p], "proxy " + std::to_string(p), 1e-9);
  }
  if (spec.epsilon == 0.0) return proxies;

  Rng rng = make_rng(spec.seed);
  std::vector<Pmf> out;
  out.reserve(proxies.size());
  for (std::size_t p = 0; p < proxies.size(); ++p) {
    const Pmf& pmf = proxies[p];
    std::vector<double> raw(pmf.size());
    double mean = 0.0;
    for (auto& r : raw) {
      r = uniform_range(rng, -1.0, 1.0);
      mean += r;
    }
    mean /= static_cast<double>(raw.size());

    Pmf perturbed(pmf.size());
    double sum = 0.0;
    for (std::size_t v = 0; v < pmf.size(); ++v) {
      // Centering keeps the noise sum-free, so renormalization below is a
      // ulp-level correction and the sup-norm move stays within 2*epsilon.
      perturbed[v] = pmf[v] + spec.epsilon * (raw[v] - mean);
      if (perturbed[v] <= 0.0) {
        throw Error("epsilon " + std::to_string(spec.epsilon) +
                    " drives proxy " + std::to_string(p) + " entry " +
                    std::to_string(v) + " nonpositive; reduce epsilon");
      }
      sum += perturbed[v];
    }
    for (auto& v : perturbed) v /= sum;
    out.push_back(std::move(perturbed));
  }
  return out;
}

}  // namespace mixmin
