#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "mixmin/cli.hpp"
#include "mixmin/io.hpp"
#include "test_util.hpp"

using namespace mixmin;
using testutil::contains;
using testutil::TempDir;

namespace {

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("mixmin");
  for (const auto& a : args) argv.push_back(a.c_str());

  std::ostringstream captured_out;
  std::ostringstream captured_err;
  auto* old_out = std::cout.rdbuf(captured_out.rdbuf());
  auto* old_err = std::cerr.rdbuf(captured_err.rdbuf());
  CliResult result;
  result.code = run_cli(static_cast<int>(argv.size()), argv.data());
  std::cout.rdbuf(old_out);
  std::cerr.rdbuf(old_err);
  result.out = captured_out.str();
  result.err = captured_err.str();
  return result;
}

// Value of the first output line starting with "<key>: ", or "".
std::string line_value(const std::string& text, const std::string& key) {
  const std::string prefix = key + ": ";
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string::npos) end = text.size();
    if (text.compare(start, prefix.size(), prefix) == 0) {
      return text.substr(start + prefix.size(), end - start - prefix.size());
    }
    start = end + 1;
  }
  return "";
}

// A small synthetic dataset on disk: world.json + predictions.csv +
// manifest.json under dir/<name>.
std::string make_dataset(const TempDir& dir, const std::string& name,
                         const std::string& seed) {
  const auto spec = dir.file(name + "_spec.json");
  atomic_write_file(spec,
                    R"({"alphabet_size": 5, "num_sources": 3,
                        "num_samples": 60})");
  const auto out_dir = dir.file(name);
  const auto r = run({"synth", "--spec", spec, "--out-dir", out_dir, "--seed",
                      seed});
  REQUIRE(r.code == 0);
  return out_dir;
}

std::string slash(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

}  // namespace

TEST_CASE("version and parse errors") {
  CHECK(run({"--version"}).code == 0);
  CHECK(contains(run({"--version"}).out, "0.1.0"));
  CHECK(run({}).code == 1);              // a subcommand is required
  CHECK(run({"transmogrify"}).code == 1);
  CHECK(run({"fit", "--no-such-flag"}).code == 1);
  CHECK(run({"fit"}).code == 1);  // missing required options
  CHECK(run({"--help"}).code == 0);
  CHECK(run({"baseline", "--method", "annealing", "--out", "x"}).code == 1);
}

TEST_CASE("synth writes a complete, reproducible dataset") {
  TempDir dir;
  const auto a = make_dataset(dir, "a", "7");
  const auto b = make_dataset(dir, "b", "7");
  const auto c = make_dataset(dir, "c", "8");

  for (const char* name : {"world.json", "predictions.csv", "manifest.json"}) {
    CAPTURE(name);
    CHECK(std::filesystem::exists(slash(a, name)));
    CHECK(read_text_file(slash(a, name)) == read_text_file(slash(b, name)));
  }
  CHECK(read_text_file(slash(a, "predictions.csv")) !=
        read_text_file(slash(c, "predictions.csv")));

  SUBCASE("the dataset loads back through the library") {
    const auto m = load_predictions(slash(a, "predictions.csv"),
                                    slash(a, "manifest.json"));
    CHECK(m.num_samples == 60);
    CHECK(m.num_sources == 3);
    const auto world = load_world(slash(a, "world.json"));
    CHECK(world.num_sources() == 3);
  }
  SUBCASE("a bad spec is a data error") {
    const auto spec = dir.file("bad_spec.json");
    atomic_write_file(spec, R"({"alphabet_size": 5})");
    CHECK(run({"synth", "--spec", spec, "--out-dir", dir.file("bad")}).code ==
          2);
  }
}

TEST_CASE("fit, eval, resample, and oracle fit together") {
  TempDir dir;
  const auto data = make_dataset(dir, "data", "3");
  const auto predictions = slash(data, "predictions.csv");
  const auto manifest = slash(data, "manifest.json");
  const auto weights_path = dir.file("weights.json");
  const auto trace_path = dir.file("trace.json");

  const auto fit = run({"fit", "--predictions", predictions, "--manifest",
                        manifest, "--steps", "50", "--seed", "2", "--out",
                        weights_path, "--trace-out", trace_path});
  REQUIRE(fit.code == 0);
  REQUIRE(std::filesystem::exists(weights_path));
  REQUIRE(std::filesystem::exists(trace_path));
  const auto train_objective = line_value(fit.out, "train_objective");
  const auto held_out = line_value(fit.out, "held_out_objective");
  REQUIRE_FALSE(train_objective.empty());
  REQUIRE_FALSE(held_out.empty());

  SUBCASE("refitting is byte-identical") {
    const auto weights2 = dir.file("weights2.json");
    const auto trace2 = dir.file("trace2.json");
    const auto again = run({"fit", "--predictions", predictions, "--manifest",
                            manifest, "--steps", "50", "--seed", "2", "--out",
                            weights2, "--trace-out", trace2});
    REQUIRE(again.code == 0);
    // stdout echoes the output paths, which differ by construction; the
    // value lines and the artifacts themselves must match byte for byte.
    CHECK(line_value(again.out, "weights") == line_value(fit.out, "weights"));
    CHECK(line_value(again.out, "train_objective") == train_objective);
    CHECK(line_value(again.out, "held_out_objective") == held_out);
    CHECK(read_text_file(weights2) == read_text_file(weights_path));
    CHECK(read_text_file(trace2) == read_text_file(trace_path));
  }

  SUBCASE("eval reproduces the fit's objectives through the file") {
    const auto train = run({"eval", "--weights", weights_path, "--predictions",
                            predictions, "--manifest", manifest, "--split",
                            "0.8", "--seed", "2", "--part", "train"});
    REQUIRE(train.code == 0);
    CHECK(line_value(train.out, "objective") == train_objective);

    const auto test = run({"eval", "--weights", weights_path, "--predictions",
                           predictions, "--manifest", manifest, "--split",
                           "0.8", "--seed", "2", "--part", "test"});
    REQUIRE(test.code == 0);
    CHECK(line_value(test.out, "objective") == held_out);

    const auto all = run({"eval", "--weights", weights_path, "--predictions",
                          predictions, "--manifest", manifest});
    CHECK(all.code == 0);

    // --split without a part selection is a usage error, not a data error.
    CHECK(run({"eval", "--weights", weights_path, "--predictions", predictions,
               "--manifest", manifest, "--split", "0.8"})
              .code == 1);
  }

  SUBCASE("resample turns the weights into exact counts") {
    const auto plan_path = dir.file("plan.json");
    const auto r = run({"resample", "--weights", weights_path, "--budget",
                        "1000", "--out", plan_path});
    REQUIRE(r.code == 0);
    CHECK(contains(r.out, "plan_file: "));
    CHECK(contains(r.out, "source_0: "));

    const auto plan = load_plan(plan_path);
    std::uint64_t sum = 0;
    for (const auto c : plan.counts) sum += c;
    CHECK(sum == 1000);

    const auto record = load_weights(weights_path);
    for (std::size_t p = 0; p < plan.counts.size(); ++p) {
      CHECK(std::abs(static_cast<double>(plan.counts[p]) / 1000.0 -
                     record.weights[p]) <= 1.0 / 1000.0);
    }

    const auto plan2 = dir.file("plan2.json");
    REQUIRE(run({"resample", "--weights", weights_path, "--budget", "1000",
                 "--out", plan2})
                .code == 0);
    CHECK(read_text_file(plan2) == read_text_file(plan_path));
  }

  SUBCASE("oracle scores the fitted point and searches the grid") {
    const auto world_path = slash(data, "world.json");
    const auto at_point =
        run({"oracle", "--world", world_path, "--weights", weights_path});
    REQUIRE(at_point.code == 0);
    CHECK_FALSE(line_value(at_point.out, "dm_oracle").empty());

    const auto on_grid = run({"oracle", "--world", world_path,
                              "--grid-resolution", "0.05"});
    REQUIRE(on_grid.code == 0);
    CHECK_FALSE(line_value(on_grid.out, "argmin_weights").empty());
    const auto best = parse_double(line_value(on_grid.out, "dm_oracle"),
                                   "oracle output");
    const auto at = parse_double(line_value(at_point.out, "dm_oracle"),
                                 "oracle output");
    // A 0.05 grid cannot beat the continuous fit by much, nor trail it far.
    CHECK(best <= at + 0.05);

    CHECK(run({"oracle", "--world", world_path}).code == 1);
    CHECK(run({"oracle", "--world", world_path, "--weights", weights_path,
               "--grid-resolution", "0.05"})
              .code == 1);
  }
}

TEST_CASE("baseline methods") {
  TempDir dir;
  const auto data = make_dataset(dir, "data", "5");
  const auto predictions = slash(data, "predictions.csv");
  const auto manifest = slash(data, "manifest.json");

  SUBCASE("random search is deterministic per seed") {
    const auto a = run({"baseline", "--method", "random", "--predictions",
                        predictions, "--manifest", manifest, "--seed", "4",
                        "--out", dir.file("a.json")});
    REQUIRE(a.code == 0);
    CHECK_FALSE(line_value(a.out, "objective").empty());
    const auto b = run({"baseline", "--method", "random", "--predictions",
                        predictions, "--manifest", manifest, "--seed", "4",
                        "--out", dir.file("b.json")});
    REQUIRE(b.code == 0);
    CHECK(read_text_file(dir.file("a.json")) ==
          read_text_file(dir.file("b.json")));
  }
  SUBCASE("grid needs a resolution") {
    CHECK(run({"baseline", "--method", "grid", "--predictions", predictions,
               "--manifest", manifest, "--out", dir.file("g.json")})
              .code == 1);
    const auto g = run({"baseline", "--method", "grid", "--predictions",
                        predictions, "--manifest", manifest, "--resolution",
                        "0.1", "--out", dir.file("g.json")});
    CHECK(g.code == 0);
  }
  SUBCASE("regmix-lite runs end to end") {
    const auto r = run({"baseline", "--method", "regmix-lite", "--predictions",
                        predictions, "--manifest", manifest, "--seed", "1",
                        "--out", dir.file("r.json")});
    REQUIRE(r.code == 0);
    const auto record = load_weights(dir.file("r.json"));
    CHECK(record.method == "regmix-lite");
  }
  SUBCASE("natural and balanced") {
    const auto n = run({"baseline", "--method", "natural", "--sizes", "3,1",
                        "--out", dir.file("n.json")});
    REQUIRE(n.code == 0);
    CHECK(line_value(n.out, "weights") == "0.75,0.25");

    const auto b = run({"baseline", "--method", "balanced", "--predictions",
                        predictions, "--manifest", manifest, "--out",
                        dir.file("b.json")});
    REQUIRE(b.code == 0);
    const auto record = load_weights(dir.file("b.json"));
    for (double v : record.weights.values) {
      CHECK(v == 1.0 / 3.0);
    }

    CHECK(run({"baseline", "--method", "natural", "--out", dir.file("x.json")})
              .code == 1);
    CHECK(
        run({"baseline", "--method", "balanced", "--out", dir.file("x.json")})
            .code == 1);
  }
  SUBCASE("predictions without a manifest is a usage error") {
    CHECK(run({"baseline", "--method", "random", "--predictions", predictions,
               "--out", dir.file("x.json")})
              .code == 1);
  }
}

TEST_CASE("data problems exit with 2") {
  TempDir dir;
  CHECK(run({"fit", "--predictions", dir.file("absent.csv"), "--manifest",
             dir.file("absent.json"), "--out", dir.file("w.json")})
            .code == 2);

  atomic_write_file(dir.file("m.json"), "{broken");
  atomic_write_file(dir.file("p.csv"), "sample_id,a\ns0,-1\n");
  CHECK(run({"fit", "--predictions", dir.file("p.csv"), "--manifest",
             dir.file("m.json"), "--out", dir.file("w.json")})
            .code == 2);

  CHECK(run({"eval", "--weights", dir.file("nope.json"), "--predictions",
             dir.file("p.csv"), "--manifest", dir.file("m.json")})
            .code == 2);
}
