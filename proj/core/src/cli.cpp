#include "mixmin/cli.hpp"

#include <cmath>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mixmin/baselines.hpp"
#include "mixmin/error.hpp"
#include "mixmin/io.hpp"
#include "mixmin/objectives.hpp"
#include "mixmin/rng.hpp"
#include "mixmin/solver.hpp"
#include "mixmin/synthworld.hpp"
#include "mixmin/version.hpp"

namespace mixmin {

namespace {

using Json = nlohmann::ordered_json;

// Flag combinations the parser cannot express; reported like parse errors
// (exit 1), unlike data errors (exit 2).
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t grid_denominator(double resolution) {
  if (!(resolution > 0.0 && resolution <= 1.0)) {
    throw UsageError("--resolution must be in (0, 1]");
  }
  const auto den = std::llround(1.0 / resolution);
  return den < 1 ? 1 : static_cast<std::size_t>(den);
}

std::string join_weights(const MixtureWeights& weights) {
  std::string out;
  for (std::size_t p = 0; p < weights.size(); ++p) {
    if (p > 0) out += ',';
    out += format_double(weights[p]);
  }
  return out;
}

void save_trace(const std::string& path, const SolverTrace& trace) {
  Json entries = Json::array();
  for (std::size_t k = 0; k < trace.entries.size(); ++k) {
    const auto& e = trace.entries[k];
    Json item;
    item["step"] = k;
    item["objective"] = e.objective;
    item["gradient_max_norm"] = e.gradient_max_norm;
    item["weights"] = e.weights.values;
    entries.push_back(std::move(item));
  }
  Json j;
  j["entries"] = std::move(entries);
  atomic_write_file(path, j.dump(2) + "\n");
}

struct FitOptions {
  std::string predictions;
  std::string manifest;
  std::string out;
  std::string trace_out;
  double eta = 1.0;
  std::size_t steps = 100;
  double split = 0.8;
  std::uint64_t seed = 0;
};

void run_fit(const FitOptions& opt) {
  const PredictionMatrix m = load_predictions(opt.predictions, opt.manifest);
  const SplitResult split = split_target(m, opt.split, opt.seed);

  SolverConfig config;
  config.eta = opt.eta;
  config.steps = opt.steps;
  config.seed = opt.seed;
  config.record_trace = !opt.trace_out.empty();
  const FitResult fit = mixmin_fit(split.train, config);

  const double train_objective = objective(split.train, fit.weights);
  const double held_out_objective = objective(split.test, fit.weights);

  WeightsRecord record;
  record.weights = fit.weights;
  record.method = "mixmin";
  record.loss_kind = m.loss_kind;
  record.objective = train_objective;
  record.held_out_objective = held_out_objective;
  record.solver = SolverEcho{opt.eta, opt.steps, opt.seed, opt.split};
  save_weights(opt.out, record);
  if (config.record_trace) save_trace(opt.trace_out, fit.trace);

  std::cout << "weights: " << join_weights(fit.weights) << "\n";
  std::cout << "train_objective: " << format_double(train_objective) << "\n";
  std::cout << "held_out_objective: " << format_double(held_out_objective)
            << "\n";
  std::cout << "weights_file: " << opt.out << "\n";
  if (config.record_trace) {
    std::cout << "trace_file: " << opt.trace_out << "\n";
  }
}

struct BaselineOptions {
  std::string method;
  std::string predictions;
  std::string manifest;
  std::string out;
  std::vector<double> sizes;
  std::size_t candidates = 7;
  double resolution = 0.0;
  std::size_t fit_points = 0;  // 0: 4 * (P + 1)
  std::size_t select_candidates = 10'000;
  std::uint64_t seed = 0;
};

void run_baseline(const BaselineOptions& opt) {
  const bool has_predictions = !opt.predictions.empty();
  if (has_predictions == opt.manifest.empty()) {
    throw UsageError("--predictions and --manifest go together");
  }

  PredictionMatrix m;
  if (has_predictions) m = load_predictions(opt.predictions, opt.manifest);

  WeightsRecord record;
  record.method = opt.method;
  if (opt.method == "random") {
    if (!has_predictions) throw UsageError("random needs --predictions");
    const RandomSearchResult result =
        random_search(m, opt.candidates, opt.seed);
    record.weights = result.best;
    record.objective = result.best_objective;
  } else if (opt.method == "grid") {
    if (!has_predictions) throw UsageError("grid needs --predictions");
    if (opt.resolution == 0.0) throw UsageError("grid needs --resolution");
    const GridSearchResult result =
        grid_search(m, grid_denominator(opt.resolution));
    record.weights = result.best;
    record.objective = result.best_objective;
  } else if (opt.method == "regmix-lite") {
    if (!has_predictions) throw UsageError("regmix-lite needs --predictions");
    const std::size_t points =
        opt.fit_points > 0 ? opt.fit_points : 4 * (m.num_sources + 1);
    Rng rng = make_rng(derive_seed(opt.seed, 0));
    std::vector<CandidateEvaluation> observations;
    observations.reserve(points);
    for (std::size_t i = 0; i < points; ++i) {
      MixtureWeights lambda;
      lambda.values = sample_simplex_uniform(m.num_sources, rng);
      lambda.source_ids = m.source_ids;
      const double obj = objective(m, lambda);
      observations.push_back(CandidateEvaluation{std::move(lambda), obj});
    }
    const RegressionSurrogate surrogate = regmix_lite_fit(observations);
    record.weights = regmix_lite_select(surrogate, opt.select_candidates,
                                        derive_seed(opt.seed, 1));
    record.objective = objective(m, record.weights);
  } else if (opt.method == "natural" || opt.method == "balanced") {
    std::vector<double> sizes = opt.sizes;
    std::vector<std::string> ids;
    if (has_predictions) ids = m.source_ids;
    if (sizes.empty()) {
      if (opt.method == "natural") throw UsageError("natural needs --sizes");
      if (ids.empty()) {
        throw UsageError("balanced needs --predictions or --sizes");
      }
      sizes.assign(ids.size(), 1.0);
    }
    const StaticMixtures mixtures = static_mixtures(sizes, ids);
    record.weights =
        opt.method == "natural" ? mixtures.natural : mixtures.balanced;
    if (has_predictions) record.objective = objective(m, record.weights);
  } else {
    throw UsageError("unknown method '" + opt.method + "'");
  }
  if (has_predictions) record.loss_kind = m.loss_kind;
  save_weights(opt.out, record);

  std::cout << "weights: " << join_weights(record.weights) << "\n";
  if (record.objective) {
    std::cout << "objective: " << format_double(*record.objective) << "\n";
  }
  std::cout << "weights_file: " << opt.out << "\n";
}

struct EvalOptions {
  std::string weights;
  std::string predictions;
  std::string manifest;
  std::string part = "all";
  double split = 0.0;
  std::uint64_t seed = 0;
};

void run_eval(const EvalOptions& opt) {
  const PredictionMatrix m = load_predictions(opt.predictions, opt.manifest);
  const WeightsRecord record = load_weights(opt.weights);

  double value = 0.0;
  if (opt.part == "all") {
    if (opt.split != 0.0) {
      throw UsageError("--split needs --part train or --part test");
    }
    value = objective(m, record.weights);
  } else {
    if (opt.split == 0.0) {
      throw UsageError("--part " + opt.part + " needs --split");
    }
    const SplitResult split = split_target(m, opt.split, opt.seed);
    value = objective(opt.part == "train" ? split.train : split.test,
                      record.weights);
  }
  std::cout << "objective: " << format_double(value) << "\n";
}

struct SynthOptions {
  std::string spec;
  std::string out_dir;
  std::uint64_t seed = 0;
};

void run_synth(const SynthOptions& opt) {
  const SynthSpec spec = load_synth_spec(opt.spec);

  WorldSpec world_spec;
  world_spec.alphabet_size = spec.alphabet_size;
  world_spec.num_sources = spec.num_sources;
  world_spec.concentration = spec.concentration;
  world_spec.seed = derive_seed(opt.seed, 0);
  world_spec.target_weights = spec.target_weights;
  const CategoricalWorld world = gen_world(world_spec);

  std::vector<Pmf> proxies;
  if (spec.proxy_samples == 0) {
    proxies = world.sources;
  } else {
    for (std::size_t p = 0; p < world.num_sources(); ++p) {
      Rng rng = make_rng(derive_seed(opt.seed, 2 + p));
      const auto cum = cumulative_pmf(world.sources[p]);
      std::vector<std::size_t> draws(spec.proxy_samples);
      for (auto& d : draws) d = sample_categorical(cum, rng);
      proxies.push_back(
          train_empirical_proxy(draws, world.alphabet_size, spec.alpha));
    }
  }

  const auto samples =
      sample_target(world, spec.num_samples, derive_seed(opt.seed, 1));
  const PredictionMatrix m = sampled_matrix(world, proxies, samples);

  namespace fs = std::filesystem;
  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  const std::string world_path = (dir / "world.json").string();
  const std::string data_path = (dir / "predictions.csv").string();
  const std::string manifest_path = (dir / "manifest.json").string();
  save_world(world_path, world);
  save_predictions(data_path, manifest_path, m);

  std::cout << "world_file: " << world_path << "\n";
  std::cout << "predictions_file: " << data_path << "\n";
  std::cout << "manifest_file: " << manifest_path << "\n";
  std::cout << "num_samples: " << spec.num_samples << "\n";
}

struct ResampleOptions {
  std::string weights;
  std::string out;
  std::uint64_t budget = 0;
  std::string policy = "deterministic";
  std::uint64_t seed = 0;
};

void run_resample(const ResampleOptions& opt) {
  const WeightsRecord record = load_weights(opt.weights);
  const ResamplePlan plan =
      resample_plan(record.weights, opt.budget,
                    resample_policy_from_string(opt.policy), opt.seed);
  save_plan(opt.out, plan);

  for (std::size_t p = 0; p < plan.source_ids.size(); ++p) {
    std::cout << plan.source_ids[p] << ": " << plan.counts[p] << "\n";
  }
  std::cout << "plan_file: " << opt.out << "\n";
}

struct OracleOptions {
  std::string world;
  std::string weights;
  double grid_resolution = 0.0;
};

void run_oracle(const OracleOptions& opt) {
  const CategoricalWorld world = load_world(opt.world);
  const bool has_weights = !opt.weights.empty();
  const bool has_grid = opt.grid_resolution != 0.0;
  if (has_weights == has_grid) {
    throw UsageError("pass exactly one of --weights or --grid-resolution");
  }

  if (has_weights) {
    const WeightsRecord record = load_weights(opt.weights);
    std::cout << "dm_oracle: " << format_double(dm_oracle(world, record.weights))
              << "\n";
    return;
  }
  const GridSearchResult result = grid_minimize(
      world.num_sources(), grid_denominator(opt.grid_resolution),
      world.source_ids,
      [&world](const MixtureWeights& lambda) {
        return dm_oracle(world, lambda);
      });
  std::cout << "argmin_weights: " << join_weights(result.best) << "\n";
  std::cout << "dm_oracle: " << format_double(result.best_objective) << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Data mixture optimization over proxy-model scores"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  FitOptions fit_opt;
  CLI::App* fit = app.add_subcommand(
      "fit", "Optimize mixture weights on a predictions table");
  fit->add_option("--predictions", fit_opt.predictions, "Predictions table")
      ->required();
  fit->add_option("--manifest", fit_opt.manifest, "Predictions manifest")
      ->required();
  fit->add_option("--eta", fit_opt.eta, "Step size")->capture_default_str();
  fit->add_option("--steps", fit_opt.steps, "Number of update steps")
      ->capture_default_str();
  fit->add_option("--split", fit_opt.split, "Train fraction of the target")
      ->capture_default_str();
  fit->add_option("--seed", fit_opt.seed, "Seed for the split")
      ->capture_default_str();
  fit->add_option("--out", fit_opt.out, "Weights file to write")->required();
  fit->add_option("--trace-out", fit_opt.trace_out,
                  "Optional per-step trace file");
  fit->callback([&fit_opt] { run_fit(fit_opt); });

  BaselineOptions baseline_opt;
  CLI::App* baseline =
      app.add_subcommand("baseline", "Reference mixture-selection methods");
  baseline
      ->add_option("--method", baseline_opt.method,
                   "random | grid | regmix-lite | natural | balanced")
      ->required()
      ->check(CLI::IsMember(
          {"random", "grid", "regmix-lite", "natural", "balanced"}));
  baseline->add_option("--predictions", baseline_opt.predictions,
                       "Predictions table");
  baseline->add_option("--manifest", baseline_opt.manifest,
                       "Predictions manifest");
  baseline
      ->add_option("--candidates", baseline_opt.candidates,
                   "Random-search candidate count")
      ->capture_default_str();
  baseline->add_option("--resolution", baseline_opt.resolution,
                       "Grid resolution (1/m)");
  baseline->add_option("--sizes", baseline_opt.sizes,
                       "Source sizes for natural/balanced")
      ->delimiter(',');
  baseline->add_option("--fit-points", baseline_opt.fit_points,
                       "regmix-lite observation count (0: 4*(P+1))");
  baseline
      ->add_option("--select-candidates", baseline_opt.select_candidates,
                   "regmix-lite selection draws")
      ->capture_default_str();
  baseline->add_option("--seed", baseline_opt.seed, "Seed")
      ->capture_default_str();
  baseline->add_option("--out", baseline_opt.out, "Weights file to write")
      ->required();
  baseline->callback([&baseline_opt] { run_baseline(baseline_opt); });

  EvalOptions eval_opt;
  CLI::App* eval =
      app.add_subcommand("eval", "Evaluate saved weights on a table");
  eval->add_option("--weights", eval_opt.weights, "Weights file")->required();
  eval->add_option("--predictions", eval_opt.predictions, "Predictions table")
      ->required();
  eval->add_option("--manifest", eval_opt.manifest, "Predictions manifest")
      ->required();
  eval->add_option("--split", eval_opt.split,
                   "Reproduce a fit's train/test split");
  eval->add_option("--seed", eval_opt.seed, "Seed used for the split")
      ->capture_default_str();
  eval->add_option("--part", eval_opt.part, "all | train | test")
      ->capture_default_str()
      ->check(CLI::IsMember({"all", "train", "test"}));
  eval->callback([&eval_opt] { run_eval(eval_opt); });

  SynthOptions synth_opt;
  CLI::App* synth = app.add_subcommand(
      "synth", "Generate a synthetic world and sampled predictions");
  synth->add_option("--spec", synth_opt.spec, "World spec file")->required();
  synth->add_option("--seed", synth_opt.seed, "Seed")->capture_default_str();
  synth->add_option("--out-dir", synth_opt.out_dir, "Output directory")
      ->required();
  synth->callback([&synth_opt] { run_synth(synth_opt); });

  ResampleOptions resample_opt;
  CLI::App* resample = app.add_subcommand(
      "resample", "Turn weights into integer per-source counts");
  resample->add_option("--weights", resample_opt.weights, "Weights file")
      ->required();
  resample->add_option("--budget", resample_opt.budget, "Total sample budget")
      ->required();
  resample->add_option("--policy", resample_opt.policy,
                       "deterministic | multinomial")
      ->capture_default_str()
      ->check(CLI::IsMember({"deterministic", "multinomial"}));
  resample->add_option("--seed", resample_opt.seed, "Seed (multinomial)")
      ->capture_default_str();
  resample->add_option("--out", resample_opt.out, "Plan file to write")
      ->required();
  resample->callback([&resample_opt] { run_resample(resample_opt); });

  OracleOptions oracle_opt;
  CLI::App* oracle = app.add_subcommand(
      "oracle", "Exact mixture error on a synthetic world");
  oracle->add_option("--world", oracle_opt.world, "World file")->required();
  oracle->add_option("--weights", oracle_opt.weights, "Weights file");
  oracle->add_option("--grid-resolution", oracle_opt.grid_resolution,
                     "Search the grid instead of scoring one point");
  oracle->callback([&oracle_opt] { run_oracle(oracle_opt); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace mixmin
