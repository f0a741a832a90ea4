#include "mixmin/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <random>
#include <unordered_set>
#include <utility>

#include <json.hpp>

#include "mixmin/error.hpp"
#include "mixmin/rng.hpp"
#include "mixmin/version.hpp"

namespace mixmin {

namespace {

using Json = nlohmann::ordered_json;

// Budgets above 2^53 lose integer exactness in double quotas.
constexpr std::uint64_t kMaxBudget = 1ull << 53;

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw Error(what + ": " + e.what());
  }
}

const Json& require_key(const Json& j, const char* key,
                        const std::string& what) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(what + ": missing key '" + key + "'");
  return *it;
}

std::string json_string(const Json& j, const std::string& what) {
  if (!j.is_string()) throw Error(what + ": expected a string");
  return j.get<std::string>();
}

double json_double(const Json& j, const std::string& what) {
  if (!j.is_number()) throw Error(what + ": expected a number");
  return j.get<double>();
}

std::uint64_t json_uint(const Json& j, const std::string& what) {
  if (j.is_number_unsigned()) return j.get<std::uint64_t>();
  if (j.is_number_integer() && j.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(j.get<std::int64_t>());
  }
  throw Error(what + ": expected a nonnegative integer");
}

std::vector<std::string> json_string_array(const Json& j,
                                           const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array");
  std::vector<std::string> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(json_string(item, what));
  return out;
}

std::vector<double> json_double_array(const Json& j, const std::string& what) {
  if (!j.is_array()) throw Error(what + ": expected an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& item : j) out.push_back(json_double(item, what));
  return out;
}

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) {
    --e;
  }
  return s.substr(b, e - b);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      fields.push_back(trim(line.substr(start)));
      break;
    }
    fields.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return fields;
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t nl = text.find('\n', start);
    if (nl == std::string::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
  return lines;
}

void check_field_text(const std::string& s, const std::string& what) {
  if (s.empty()) throw Error(what + " is empty");
  if (s.find_first_of(",\n\r") != std::string::npos) {
    throw Error(what + " '" + s + "' contains a delimiter character");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& field, const std::string& where) {
  const std::string s = trim(field);
  if (s.empty()) throw Error(where + ": empty numeric field");
  double value = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), value);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw Error(where + ": '" + s + "' is not a number");
  }
  return value;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "' for reading");
  std::string content((std::istreambuf_iterator<char>(in)),
                      std::istreambuf_iterator<char>());
  if (in.bad()) throw Error("failed reading '" + path + "'");
  return content;
}

void atomic_write_file(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp(target);
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(content.data(),
              static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("failed writing '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error("cannot move temporary file into place at '" + path + "'");
  }
}

PredictionMatrix load_predictions(const std::string& data_path,
                                  const std::string& manifest_path) {
  const std::string manifest_what = "manifest '" + manifest_path + "'";
  const Json manifest =
      parse_json(read_text_file(manifest_path), manifest_what);

  const LossKind loss_kind = loss_kind_from_string(
      json_string(require_key(manifest, "loss_kind", manifest_what),
                  manifest_what + " loss_kind"));
  const std::string score_space =
      json_string(require_key(manifest, "score_space", manifest_what),
                  manifest_what + " score_space");
  if (score_space != "log" && score_space != "linear") {
    throw Error(manifest_what + ": score_space must be 'log' or 'linear'");
  }
  if (!is_ce(loss_kind) && score_space != "linear") {
    throw Error(manifest_what + ": mse scores are raw predictions; use "
                                "score_space 'linear'");
  }
  const std::vector<std::string> sources =
      json_string_array(require_key(manifest, "sources", manifest_what),
                        manifest_what + " sources");
  if (sources.empty()) throw Error(manifest_what + ": no sources");

  std::string target_column;
  if (manifest.contains("target_column")) {
    target_column = json_string(manifest.at("target_column"),
                                manifest_what + " target_column");
  }
  if (is_ce(loss_kind) && !target_column.empty()) {
    throw Error(manifest_what + ": target_column is only for mse");
  }
  if (!is_ce(loss_kind) && target_column.empty()) {
    throw Error(manifest_what + ": mse needs a target_column");
  }

  const std::string data_what = "predictions '" + data_path + "'";
  const auto lines = split_lines(read_text_file(data_path));
  if (lines.empty()) throw Error(data_what + ": empty file");

  std::vector<std::string> expected_header;
  expected_header.push_back("sample_id");
  expected_header.insert(expected_header.end(), sources.begin(),
                         sources.end());
  if (!target_column.empty()) expected_header.push_back(target_column);

  const auto header = split_fields(lines.front());
  if (header != expected_header) {
    std::string want;
    for (const auto& h : expected_header) {
      if (!want.empty()) want += ",";
      want += h;
    }
    throw Error(data_what + ": header does not match the manifest (expected '" +
                want + "')");
  }
  if (lines.size() < 2) throw Error(data_what + ": no samples");

  PredictionMatrix m;
  m.loss_kind = loss_kind;
  m.num_sources = sources.size();
  m.source_ids = sources;
  m.num_samples = lines.size() - 1;
  m.scores.reserve(m.num_samples * m.num_sources);
  m.sample_ids.reserve(m.num_samples);
  if (!target_column.empty()) m.targets.reserve(m.num_samples);

  std::unordered_set<std::string> seen_ids;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const std::string row_what = data_what + " row " + std::to_string(r);
    const auto fields = split_fields(lines[r]);
    if (fields.size() != expected_header.size()) {
      throw Error(row_what + ": " + std::to_string(fields.size()) +
                  " fields, expected " +
                  std::to_string(expected_header.size()));
    }
    if (fields[0].empty()) throw Error(row_what + ": empty sample_id");
    if (!seen_ids.insert(fields[0]).second) {
      throw Error(row_what + ": duplicate sample_id '" + fields[0] + "'");
    }
    m.sample_ids.push_back(fields[0]);
    for (std::size_t p = 0; p < sources.size(); ++p) {
      const std::string cell_what = row_what + ", column '" + sources[p] + "'";
      double v = parse_double(fields[p + 1], cell_what);
      if (is_ce(loss_kind) && score_space == "linear") {
        if (!(v > 0.0)) {
          throw Error(cell_what +
                      ": linear-space cross-entropy score must be > 0, got " +
                      format_double(v));
        }
        v = std::log(v);
      }
      m.scores.push_back(v);
    }
    if (!target_column.empty()) {
      m.targets.push_back(parse_double(
          fields.back(), row_what + ", column '" + target_column + "'"));
    }
  }
  m.validate();
  return m;
}

void save_predictions(const std::string& data_path,
                      const std::string& manifest_path,
                      const PredictionMatrix& m) {
  PredictionMatrix copy = m;
  copy.validate();
  if (!copy.row_weights.empty()) {
    throw Error("weighted-row matrices have no file form");
  }
  for (const auto& id : copy.source_ids) check_field_text(id, "source id");
  for (const auto& id : copy.sample_ids) check_field_text(id, "sample id");

  Json manifest;
  manifest["loss_kind"] = to_string(copy.loss_kind);
  manifest["score_space"] = is_ce(copy.loss_kind) ? "log" : "linear";
  manifest["sources"] = copy.source_ids;
  const bool has_target = !is_ce(copy.loss_kind);
  if (has_target) manifest["target_column"] = "y";
  atomic_write_file(manifest_path, manifest.dump(2) + "\n");

  std::string data;
  data.reserve(copy.num_samples * (copy.num_sources + 1) * 20);
  data += "sample_id";
  for (const auto& id : copy.source_ids) {
    data += ',';
    data += id;
  }
  if (has_target) data += ",y";
  data += '\n';
  for (std::size_t i = 0; i < copy.num_samples; ++i) {
    data += copy.sample_ids[i];
    for (std::size_t p = 0; p < copy.num_sources; ++p) {
      data += ',';
      data += format_double(copy.score(i, p));
    }
    if (has_target) {
      data += ',';
      data += format_double(copy.targets[i]);
    }
    data += '\n';
  }
  atomic_write_file(data_path, data);
}

WeightsRecord load_weights(const std::string& path) {
  const std::string what = "weights file '" + path + "'";
  const Json j = parse_json(read_text_file(path), what);

  WeightsRecord record;
  const auto ids = json_string_array(require_key(j, "source_ids", what),
                                     what + " source_ids");
  const auto values =
      json_double_array(require_key(j, "weights", what), what + " weights");
  try {
    record.weights = validate_simplex(values, kIngestSimplexTolerance, ids);
  } catch (const Error& e) {
    throw Error(what + ": " + e.what());
  }
  if (j.contains("method")) {
    record.method = json_string(j.at("method"), what + " method");
  }
  if (j.contains("loss_kind")) {
    record.loss_kind = loss_kind_from_string(
        json_string(j.at("loss_kind"), what + " loss_kind"));
  }
  if (j.contains("objective")) {
    record.objective = json_double(j.at("objective"), what + " objective");
  }
  if (j.contains("held_out_objective")) {
    record.held_out_objective = json_double(j.at("held_out_objective"),
                                            what + " held_out_objective");
  }
  if (j.contains("solver")) {
    const Json& s = j.at("solver");
    SolverEcho echo;
    echo.eta = json_double(require_key(s, "eta", what), what + " solver.eta");
    echo.steps = static_cast<std::size_t>(
        json_uint(require_key(s, "steps", what), what + " solver.steps"));
    echo.seed = json_uint(require_key(s, "seed", what), what + " solver.seed");
    echo.split_fraction =
        json_double(require_key(s, "split_fraction", what),
                    what + " solver.split_fraction");
    record.solver = echo;
  }
  if (j.contains("version")) {
    record.version = json_string(j.at("version"), what + " version");
  }
  return record;
}

void save_weights(const std::string& path, const WeightsRecord& record) {
  check_weights(record.weights);
  Json j;
  j["source_ids"] = record.weights.source_ids;
  j["weights"] = record.weights.values;
  if (!record.method.empty()) j["method"] = record.method;
  if (record.loss_kind) j["loss_kind"] = to_string(*record.loss_kind);
  if (record.objective) j["objective"] = *record.objective;
  if (record.held_out_objective) {
    j["held_out_objective"] = *record.held_out_objective;
  }
  if (record.solver) {
    Json s;
    s["eta"] = record.solver->eta;
    s["steps"] = record.solver->steps;
    s["seed"] = record.solver->seed;
    s["split_fraction"] = record.solver->split_fraction;
    j["solver"] = std::move(s);
  }
  j["version"] = kVersion;
  atomic_write_file(path, j.dump(2) + "\n");
}

namespace {

PredictionMatrix take_rows(const PredictionMatrix& m,
                           const std::vector<std::size_t>& rows) {
  PredictionMatrix out;
  out.loss_kind = m.loss_kind;
  out.num_samples = rows.size();
  out.num_sources = m.num_sources;
  out.source_ids = m.source_ids;
  out.scores.reserve(rows.size() * m.num_sources);
  out.sample_ids.reserve(rows.size());
  for (const std::size_t i : rows) {
    const auto row = m.row(i);
    out.scores.insert(out.scores.end(), row.begin(), row.end());
    out.sample_ids.push_back(m.sample_ids[i]);
    if (!m.targets.empty()) out.targets.push_back(m.targets[i]);
  }
  out.validate();
  return out;
}

}  // namespace

SplitResult split_target(const PredictionMatrix& m, double train_fraction,
                         std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw Error("train fraction must be strictly between 0 and 1");
  }
  if (m.num_samples < 2) throw Error("need at least 2 samples to split");
  if (!m.row_weights.empty()) {
    throw Error("cannot split a weighted-row matrix");
  }

  // The 1e-9 nudge keeps ceil() from rounding N*fraction up across an
  // integer boundary it only crossed through floating-point noise.
  const auto train_n = static_cast<std::size_t>(std::ceil(
      train_fraction * static_cast<double>(m.num_samples) - 1e-9));
  if (train_n == 0 || train_n >= m.num_samples) {
    throw Error("split leaves an empty part (" + std::to_string(train_n) +
                " of " + std::to_string(m.num_samples) + " rows in train)");
  }

  Rng rng = make_rng(seed);
  const auto perm = shuffled_indices(m.num_samples, rng);
  const std::vector<std::size_t> train_rows(perm.begin(),
                                            perm.begin() + train_n);
  const std::vector<std::size_t> test_rows(perm.begin() + train_n, perm.end());
  return SplitResult{take_rows(m, train_rows), take_rows(m, test_rows)};
}

const char* to_string(ResamplePolicy policy) {
  switch (policy) {
    case ResamplePolicy::kDeterministic:
      return "deterministic";
    case ResamplePolicy::kMultinomial:
      return "multinomial";
  }
  throw Error("unknown resample policy");
}

ResamplePolicy resample_policy_from_string(const std::string& name) {
  if (name == "deterministic") return ResamplePolicy::kDeterministic;
  if (name == "multinomial") return ResamplePolicy::kMultinomial;
  throw Error("unknown resample policy '" + name +
              "' (use deterministic or multinomial)");
}

ResamplePlan resample_plan(const MixtureWeights& lambda, std::uint64_t budget,
                           ResamplePolicy policy, std::uint64_t seed) {
  check_weights(lambda);
  if (budget < 1) throw Error("budget must be >= 1");
  if (budget > kMaxBudget) {
    throw Error("budget exceeds 2^53; counts would lose exactness");
  }

  ResamplePlan plan;
  plan.source_ids = lambda.source_ids;
  plan.budget = budget;
  plan.policy = policy;
  plan.seed = seed;
  plan.counts.assign(lambda.size(), 0);

  if (policy == ResamplePolicy::kDeterministic) {
    // Largest-remainder apportionment; stable sort sends ties to the lower
    // index.
    std::vector<double> remainders(lambda.size());
    std::uint64_t allocated = 0;
    for (std::size_t p = 0; p < lambda.size(); ++p) {
      const double quota = static_cast<double>(budget) * lambda[p];
      const double floor_q = std::floor(quota);
      plan.counts[p] = static_cast<std::uint64_t>(floor_q);
      remainders[p] = quota - floor_q;
      allocated += plan.counts[p];
    }
    std::vector<std::size_t> order(lambda.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) {
                       return remainders[a] > remainders[b];
                     });
    for (std::size_t k = 0; allocated < budget; ++k) {
      plan.counts[order[k % order.size()]] += 1;
      ++allocated;
    }
  } else {
    Rng rng = make_rng(seed);
    std::uint64_t remaining = budget;
    double mass = 1.0;
    for (std::size_t p = 0; p + 1 < lambda.size(); ++p) {
      if (remaining == 0) break;
      double prob = mass > 0.0 ? lambda[p] / mass : 1.0;
      prob = std::clamp(prob, 0.0, 1.0);
      std::binomial_distribution<std::uint64_t> binomial(remaining, prob);
      plan.counts[p] = binomial(rng);
      remaining -= plan.counts[p];
      mass -= lambda[p];
    }
    plan.counts.back() += remaining;
  }
  return plan;
}

ResamplePlan load_plan(const std::string& path) {
  const std::string what = "plan file '" + path + "'";
  const Json j = parse_json(read_text_file(path), what);

  ResamplePlan plan;
  plan.budget = json_uint(require_key(j, "budget", what), what + " budget");
  plan.policy = resample_policy_from_string(
      json_string(require_key(j, "policy", what), what + " policy"));
  plan.seed = json_uint(require_key(j, "seed", what), what + " seed");
  const Json& allocations = require_key(j, "allocations", what);
  if (!allocations.is_array() || allocations.empty()) {
    throw Error(what + ": allocations must be a nonempty array");
  }
  std::uint64_t sum = 0;
  for (const auto& item : allocations) {
    plan.source_ids.push_back(json_string(
        require_key(item, "source_id", what), what + " source_id"));
    plan.counts.push_back(
        json_uint(require_key(item, "count", what), what + " count"));
    sum += plan.counts.back();
  }
  if (sum != plan.budget) {
    throw Error(what + ": counts sum to " + std::to_string(sum) +
                ", expected the budget " + std::to_string(plan.budget));
  }
  return plan;
}

void save_plan(const std::string& path, const ResamplePlan& plan) {
  if (plan.source_ids.size() != plan.counts.size()) {
    throw Error("plan source_ids/counts length mismatch");
  }
  std::uint64_t sum = 0;
  for (const auto c : plan.counts) sum += c;
  if (sum != plan.budget) {
    throw Error("plan counts sum to " + std::to_string(sum) +
                ", expected the budget " + std::to_string(plan.budget));
  }
  Json j;
  j["budget"] = plan.budget;
  j["policy"] = to_string(plan.policy);
  j["seed"] = plan.seed;
  Json allocations = Json::array();
  for (std::size_t p = 0; p < plan.source_ids.size(); ++p) {
    Json item;
    item["source_id"] = plan.source_ids[p];
    item["count"] = plan.counts[p];
    allocations.push_back(std::move(item));
  }
  j["allocations"] = std::move(allocations);
  atomic_write_file(path, j.dump(2) + "\n");
}

CategoricalWorld load_world(const std::string& path) {
  const std::string what = "world file '" + path + "'";
  const Json j = parse_json(read_text_file(path), what);

  CategoricalWorld world;
  world.alphabet_size = static_cast<std::size_t>(json_uint(
      require_key(j, "alphabet_size", what), what + " alphabet_size"));
  world.source_ids = json_string_array(require_key(j, "source_ids", what),
                                       what + " source_ids");
  const Json& sources = require_key(j, "sources", what);
  if (!sources.is_array()) throw Error(what + ": sources must be an array");
  for (std::size_t p = 0; p < sources.size(); ++p) {
    world.sources.push_back(normalize_pmf(
        json_double_array(sources.at(p), what + " source pmf"),
        what + " source " + std::to_string(p)));
  }
  world.target =
      normalize_pmf(json_double_array(require_key(j, "target", what),
                                      what + " target"),
                    what + " target");
  try {
    world.validate();
  } catch (const Error& e) {
    throw Error(what + ": " + e.what());
  }
  return world;
}

void save_world(const std::string& path, const CategoricalWorld& world) {
  world.validate();
  Json j;
  j["alphabet_size"] = world.alphabet_size;
  j["source_ids"] = world.source_ids;
  j["sources"] = world.sources;
  j["target"] = world.target;
  atomic_write_file(path, j.dump(2) + "\n");
}

SynthSpec load_synth_spec(const std::string& path) {
  const std::string what = "synth spec '" + path + "'";
  const Json j = parse_json(read_text_file(path), what);

  SynthSpec spec;
  spec.alphabet_size = static_cast<std::size_t>(json_uint(
      require_key(j, "alphabet_size", what), what + " alphabet_size"));
  spec.num_sources = static_cast<std::size_t>(json_uint(
      require_key(j, "num_sources", what), what + " num_sources"));
  if (j.contains("concentration")) {
    spec.concentration =
        json_double(j.at("concentration"), what + " concentration");
  }
  if (j.contains("target_weights")) {
    spec.target_weights =
        json_double_array(j.at("target_weights"), what + " target_weights");
  }
  if (j.contains("num_samples")) {
    spec.num_samples = static_cast<std::size_t>(
        json_uint(j.at("num_samples"), what + " num_samples"));
  }
  if (j.contains("proxy_samples")) {
    spec.proxy_samples = static_cast<std::size_t>(
        json_uint(j.at("proxy_samples"), what + " proxy_samples"));
  }
  if (j.contains("alpha")) {
    spec.alpha = json_double(j.at("alpha"), what + " alpha");
  }
  if (spec.num_samples < 1) throw Error(what + ": num_samples must be >= 1");
  if (!(spec.alpha >= 0.0)) throw Error(what + ": alpha must be >= 0");
  return spec;
}

}  // namespace mixmin
