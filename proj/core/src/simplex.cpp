#include "mixmin/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_set>

#include "mixmin/error.hpp"

namespace mixmin {

std::vector<std::string> default_source_ids(std::size_t count) {
  std::vector<std::string> ids;
  ids.reserve(count);
  for (std::size_t p = 0; p < count; ++p) {
    ids.push_back("source_" + std::to_string(p));
  }
  return ids;
}

static void check_ids(const std::vector<std::string>& ids) {
  if (ids.empty()) throw Error("no sources");
  std::unordered_set<std::string> seen;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) {
      throw Error("duplicate source id '" + id + "'");
    }
  }
}

void check_weights(const MixtureWeights& weights) {
  if (weights.values.empty()) throw Error("no sources");
  if (weights.values.size() != weights.source_ids.size()) {
    throw Error("weights/source_ids length mismatch");
  }
  double sum = 0.0;
  for (double v : weights.values) {
    if (!(v >= 0.0)) throw Error("negative weight");  // also catches NaN
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-9) {
    throw Error("weights sum to " + std::to_string(sum) + ", expected 1");
  }
}

MixtureWeights uniform_weights(std::vector<std::string> source_ids) {
  check_ids(source_ids);
  const std::size_t n = source_ids.size();
  MixtureWeights w;
  w.values.assign(n, 1.0 / static_cast<double>(n));
  w.source_ids = std::move(source_ids);
  return w;
}

MixtureWeights entropic_step(const MixtureWeights& weights,
                             const GradientVector& grad, double eta) {
  check_weights(weights);
  if (grad.size() != weights.size()) {
    throw Error("gradient length does not match weight length");
  }
  if (!(eta > 0.0)) throw Error("step size must be > 0");
  for (double g : grad) {
    if (!std::isfinite(g)) throw Error("non-finite gradient entry");
  }

  const std::size_t n = weights.size();
  // Shift the exponent by its max over the support so exp never overflows.
  double max_arg = -std::numeric_limits<double>::infinity();
  for (std::size_t p = 0; p < n; ++p) {
    if (weights.values[p] > 0.0) max_arg = std::max(max_arg, -eta * grad[p]);
  }

  MixtureWeights out;
  out.source_ids = weights.source_ids;
  out.values.assign(n, 0.0);
  double sum = 0.0;
  for (std::size_t p = 0; p < n; ++p) {
    if (weights.values[p] > 0.0) {
      out.values[p] = weights.values[p] * std::exp(-eta * grad[p] - max_arg);
      sum += out.values[p];
    }
  }
  // The entry attaining max_arg contributes weights[p] * 1, so sum > 0.
  for (std::size_t p = 0; p < n; ++p) out.values[p] /= sum;
  return out;
}

MixtureWeights validate_simplex(std::vector<double> values, double tol,
                                std::vector<std::string> source_ids) {
  if (values.empty()) throw Error("no sources");
  if (!(tol >= 0.0)) throw Error("tolerance must be >= 0");
  if (source_ids.empty()) {
    source_ids = default_source_ids(values.size());
  } else if (source_ids.size() != values.size()) {
    throw Error("weights/source_ids length mismatch");
  }
  check_ids(source_ids);

  double sum = 0.0;
  for (std::size_t p = 0; p < values.size(); ++p) {
    if (!std::isfinite(values[p])) {
      throw Error("non-finite weight at index " + std::to_string(p));
    }
    if (values[p] < 0.0) {
      throw Error("negative weight at index " + std::to_string(p));
    }
    sum += values[p];
  }
  if (std::abs(sum - 1.0) > tol) {
    throw Error("weights sum to " + std::to_string(sum) +
                ", outside tolerance " + std::to_string(tol) + " of 1");
  }
  // Already normalized to machine precision: leave the values untouched so a
  // save/load round trip is bit-exact. Dividing here would only churn ulps.
  if (std::abs(sum - 1.0) > 1e-12) {
    for (auto& v : values) v /= sum;
  }

  MixtureWeights w;
  w.values = std::move(values);
  w.source_ids = std::move(source_ids);
  return w;
}

}  // namespace mixmin
