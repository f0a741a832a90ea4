#pragma once

// Simplex arithmetic and the entropic mirror-descent update.

#include <cstddef>
#include <string>
#include <vector>

namespace mixmin {

// A point on the probability simplex over a fixed, ordered set of sources.
// Invariants (enforced by the factories below): entries are nonnegative,
// sum to 1 within 1e-9, and values/source_ids have equal, nonzero length.
// Zero entries are legal; sparse mixtures are a legitimate output.
struct MixtureWeights {
  std::vector<double> values;
  std::vector<std::string> source_ids;

  std::size_t size() const { return values.size(); }
  double operator[](std::size_t p) const { return values[p]; }
};

// Gradient of an objective with respect to the mixture weights.
using GradientVector = std::vector<double>;

// Tolerance for weights ingested from files (decimal rounding in transit);
// internal operations maintain simplex sums to 1e-12.
inline constexpr double kIngestSimplexTolerance = 1e-6;

std::vector<std::string> default_source_ids(std::size_t count);

// Equal weights 1/|P| over the given sources. Ids must be distinct and
// nonempty.
MixtureWeights uniform_weights(std::vector<std::string> source_ids);

// One step of entropic descent:
//   w_p <- w_p * exp(-eta * g_p) / sum_q w_q * exp(-eta * g_q).
// The exponent is shifted by its maximum over the support of w before
// exponentiation, so the update cannot overflow. Zero entries of w stay
// exactly zero. Adding a constant to every g_p does not change the result.
MixtureWeights entropic_step(const MixtureWeights& weights,
                             const GradientVector& grad, double eta);

// Checks nonnegativity and |sum - 1| <= tol, then renormalizes. Values whose
// sum is already 1 to machine precision pass through bitwise, so a saved
// mixture loads back exactly. If source_ids is empty, names
// source_0..source_{n-1} are assigned.
MixtureWeights validate_simplex(std::vector<double> values, double tol,
                                std::vector<std::string> source_ids = {});

// Throws if `weights` violates the MixtureWeights invariants.
void check_weights(const MixtureWeights& weights);

}  // namespace mixmin
