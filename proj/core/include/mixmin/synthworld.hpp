#pragma once

// Synthetic categorical distributions with closed-form Bayes-optimal models.
// Under unconditional cross-entropy the best unrestricted model of a source is
// the source pmf itself, so mixture quality has an exact oracle: the
// cross-entropy between the target pmf and the lambda-weighted source mixture.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mixmin/simplex.hpp"

namespace mixmin {

using Pmf = std::vector<double>;

// Throws a descriptive error unless `pmf` is entrywise nonnegative, finite,
// and sums to 1 within `tol`. `what` names the pmf in error messages.
void check_pmf(const Pmf& pmf, const std::string& what, double tol = 1e-12);

// Ingestion variant: accepts |sum-1| <= tol (default matches file rounding)
// and renormalizes; values already within 1e-12 of unit sum pass unchanged.
Pmf normalize_pmf(std::vector<double> values, const std::string& what,
                  double tol = kIngestSimplexTolerance);

double entropy(const Pmf& p);

// H(target, model) in nats; infinite model zeros under target support throw.
double cross_entropy(const Pmf& target, const Pmf& model);

struct CategoricalWorld {
  std::size_t alphabet_size = 0;
  std::vector<Pmf> sources;  // one pmf per source, each length alphabet_size
  Pmf target;
  std::vector<std::string> source_ids;

  std::size_t num_sources() const { return sources.size(); }
  void validate() const;
};

struct WorldSpec {
  std::size_t alphabet_size = 0;
  std::size_t num_sources = 0;
  double concentration = 1.0;  // symmetric Dirichlet parameter for the draws
  std::uint64_t seed = 0;
  // Empty: target is an independent Dirichlet draw. Otherwise the target is
  // exactly this mixture of the drawn sources (length must equal num_sources).
  std::vector<double> target_weights;
};

CategoricalWorld gen_world(const WorldSpec& spec);

// Sigma_p lambda_p * source_p, accumulated in source order.
Pmf mixture_pmf(const CategoricalWorld& world, const MixtureWeights& lambda);

// n i.i.d. symbol indices from the target pmf.
std::vector<std::size_t> sample_target(const CategoricalWorld& world,
                                       std::size_t n, std::uint64_t seed);

// Add-alpha smoothed empirical pmf: (count_v + alpha) / (n + alpha*V).
// alpha = 0 yields raw frequencies and may contain zeros.
Pmf train_empirical_proxy(const std::vector<std::size_t>& samples,
                          std::size_t alphabet_size, double alpha);

// Exact downstream error of training on the lambda-mixture: the cross-entropy
// between the target and the mixture pmf. Lower-bounded by entropy(target)
// with equality iff the mixture matches the target.
double dm_oracle(const CategoricalWorld& world, const MixtureWeights& lambda);

// Empirical pmf of n draws from the lambda-mixture: the model one gets by
// actually remixing data and refitting, as opposed to ensembling the sources.
Pmf retrain_on_mixture(const CategoricalWorld& world,
                       const MixtureWeights& lambda, std::size_t n,
                       std::uint64_t seed, double alpha = 0.0);

// Binary-label sources over a finite input set, each with its own input
// marginal. Exposes the regime where the Bayes mixture is NOT the linear
// ensemble of conditionals.
struct ShiftedConditionalWorld {
  std::vector<Pmf> input_marginals;               // per source, over inputs
  std::vector<std::vector<double>> conditionals;  // per source, P(y=1 | x)
  Pmf target_marginal;
  std::vector<double> target_conditional;

  std::size_t num_sources() const { return input_marginals.size(); }
  std::size_t num_inputs() const {
    return input_marginals.empty() ? 0 : input_marginals.front().size();
  }
  void validate() const;
};

// P(y=1 | x) of the lambda-mixture distribution: conditionals weighted by the
// posterior over sources given x. Collapses to the plain linear ensemble
// exactly when all input marginals coincide.
double bayes_mixture_with_shift(const ShiftedConditionalWorld& world,
                                const MixtureWeights& lambda, std::size_t x);

struct PerturbationSpec {
  double epsilon = 0.0;  // sup-norm bound on the raw noise
  std::uint64_t seed = 0;
};

// Adds seeded mean-centered noise with |raw noise| <= epsilon per entry, then
// renormalizes; the result stays within 2*epsilon of the input in sup norm.
// epsilon = 0 returns the input unchanged. Noise for a given seed is a fixed
// direction scaled by epsilon, so sweeps over epsilon move along one ray.
std::vector<Pmf> perturb_proxies(const std::vector<Pmf>& proxies,
                                 const PerturbationSpec& spec);

}  // namespace mixmin
