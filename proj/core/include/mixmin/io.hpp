#pragma once

// File formats and pipeline plumbing: the predictions table with its JSON
// manifest, weights/plan/world files, the target train/test split, and
// integer resample plans. Writes are atomic (temp file + rename). All numeric
// text uses locale-independent shortest round-trip decimal form, so a
// save/load cycle reproduces the exact doubles.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mixmin/prediction_matrix.hpp"
#include "mixmin/simplex.hpp"
#include "mixmin/synthworld.hpp"

namespace mixmin {

std::string format_double(double v);

// Parses a full numeric field ("-inf" and "inf" included); trailing garbage,
// empty fields, and locale-style commas are errors naming `where`.
double parse_double(const std::string& field, const std::string& where);

std::string read_text_file(const std::string& path);
void atomic_write_file(const std::string& path, const std::string& content);

// Predictions table: header `sample_id,<source_0>,...[,<target>]`, one row
// per target sample. The manifest (JSON) pins loss_kind, score_space
// ("log" | "linear"), the source column order, and the target column name for
// MSE. Linear-space CE scores must be positive and are converted to log on
// load; files written by save_predictions are always in canonical log space
// for CE and linear for MSE.
PredictionMatrix load_predictions(const std::string& data_path,
                                  const std::string& manifest_path);
void save_predictions(const std::string& data_path,
                      const std::string& manifest_path,
                      const PredictionMatrix& m);

struct SolverEcho {
  double eta = 1.0;
  std::size_t steps = 100;
  std::uint64_t seed = 0;
  double split_fraction = 0.8;
};

struct WeightsRecord {
  MixtureWeights weights;
  std::string method;  // "mixmin", "random", "grid", "regmix-lite", ...
  std::optional<LossKind> loss_kind;
  std::optional<double> objective;
  std::optional<double> held_out_objective;
  std::optional<SolverEcho> solver;
  std::string version;  // stamped on save
};

WeightsRecord load_weights(const std::string& path);
void save_weights(const std::string& path, const WeightsRecord& record);

struct SplitResult {
  PredictionMatrix train;
  PredictionMatrix test;
};

// Seeded uniform shuffle, then the first ceil(train_fraction * N) rows become
// the train part and the rest the test part. Exact partition; both parts
// nonempty or it throws. Weighted-row matrices cannot be split.
SplitResult split_target(const PredictionMatrix& m, double train_fraction,
                         std::uint64_t seed);

enum class ResamplePolicy { kDeterministic, kMultinomial };
const char* to_string(ResamplePolicy policy);
ResamplePolicy resample_policy_from_string(const std::string& name);

struct ResamplePlan {
  std::vector<std::string> source_ids;
  std::vector<std::uint64_t> counts;
  std::uint64_t budget = 0;
  ResamplePolicy policy = ResamplePolicy::kDeterministic;
  std::uint64_t seed = 0;
};

// Integer per-source counts realizing lambda at the budget; counts always sum
// exactly to the budget. Deterministic policy: largest-remainder
// apportionment with ties to the lower index, which keeps every count within
// one unit of budget * lambda_p. Multinomial policy: seeded multinomial draw.
ResamplePlan resample_plan(const MixtureWeights& lambda, std::uint64_t budget,
                           ResamplePolicy policy, std::uint64_t seed);
ResamplePlan load_plan(const std::string& path);
void save_plan(const std::string& path, const ResamplePlan& plan);

CategoricalWorld load_world(const std::string& path);
void save_world(const std::string& path, const CategoricalWorld& world);

// File-facing spec for the synth pipeline: world shape plus how to sample
// from it. proxy_samples = 0 keeps the exact source pmfs as proxies; a
// positive value trains an add-alpha proxy per source on that many draws.
struct SynthSpec {
  std::size_t alphabet_size = 0;
  std::size_t num_sources = 0;
  double concentration = 1.0;
  std::vector<double> target_weights;  // empty: independent target draw
  std::size_t num_samples = 1000;
  std::size_t proxy_samples = 0;
  double alpha = 1.0;
};
SynthSpec load_synth_spec(const std::string& path);

}  // namespace mixmin
