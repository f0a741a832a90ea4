#include "mixmin/prediction_matrix.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "mixmin/error.hpp"

namespace mixmin {

bool is_ce(LossKind kind) {
  return kind == LossKind::kCeUnconditional || kind == LossKind::kCeConditional;
}

std::string_view to_string(LossKind kind) {
  switch (kind) {
    case LossKind::kCeUnconditional:
      return "ce_unconditional";
    case LossKind::kCeConditional:
      return "ce_conditional";
    case LossKind::kMse:
      return "mse";
  }
  return "unknown";
}

LossKind loss_kind_from_string(std::string_view name) {
  if (name == "ce_unconditional") return LossKind::kCeUnconditional;
  if (name == "ce_conditional") return LossKind::kCeConditional;
  if (name == "mse") return LossKind::kMse;
  throw Error("unknown loss kind '" + std::string(name) +
              "' (expected ce_unconditional, ce_conditional, or mse)");
}

void PredictionMatrix::validate() {
  if (num_samples == 0) throw Error("no samples");
  if (num_sources == 0) throw Error("no sources");
  if (scores.size() != num_samples * num_sources) {
    throw Error("score matrix size does not match N x P");
  }
  if (source_ids.size() != num_sources) {
    throw Error("source_ids length does not match source count");
  }
  {
    std::unordered_set<std::string_view> seen;
    for (const auto& id : source_ids) {
      if (!seen.insert(id).second) {
        throw Error("duplicate source id '" + id + "'");
      }
    }
  }
  if (sample_ids.empty()) {
    sample_ids.reserve(num_samples);
    for (std::size_t i = 0; i < num_samples; ++i) {
      sample_ids.push_back("sample_" + std::to_string(i));
    }
  } else if (sample_ids.size() != num_samples) {
    throw Error("sample_ids length does not match sample count");
  }

  for (std::size_t i = 0; i < num_samples; ++i) {
    for (std::size_t p = 0; p < num_sources; ++p) {
      const double s = score(i, p);
      if (std::isnan(s)) {
        throw Error("NaN score at sample '" + sample_ids[i] + "', source '" +
                    source_ids[p] + "'");
      }
      if (s == std::numeric_limits<double>::infinity()) {
        throw Error("+inf score at sample '" + sample_ids[i] + "', source '" +
                    source_ids[p] + "'");
      }
      if (loss_kind == LossKind::kCeConditional && s > 0.0) {
        throw Error("conditional CE score > 0 (probability > 1) at sample '" +
                    sample_ids[i] + "', source '" + source_ids[p] + "'");
      }
      if (loss_kind == LossKind::kMse && !std::isfinite(s)) {
        throw Error("non-finite prediction at sample '" + sample_ids[i] +
                    "', source '" + source_ids[p] + "'");
      }
    }
  }

  if (loss_kind == LossKind::kMse) {
    if (targets.size() != num_samples) {
      throw Error("mse matrix requires one target per sample");
    }
    for (std::size_t i = 0; i < num_samples; ++i) {
      if (!std::isfinite(targets[i])) {
        throw Error("non-finite target at sample '" + sample_ids[i] + "'");
      }
    }
  } else if (!targets.empty()) {
    throw Error("targets are only valid for mse matrices");
  }

  if (!row_weights.empty()) {
    if (row_weights.size() != num_samples) {
      throw Error("row_weights length does not match sample count");
    }
    double sum = 0.0;
    for (std::size_t i = 0; i < num_samples; ++i) {
      if (!(row_weights[i] >= 0.0) || !std::isfinite(row_weights[i])) {
        throw Error("invalid row weight at sample '" + sample_ids[i] + "'");
      }
      sum += row_weights[i];
    }
    if (sum <= 0.0) throw Error("row weights sum to zero");
    for (auto& w : row_weights) w /= sum;
  }
}

}  // namespace mixmin
