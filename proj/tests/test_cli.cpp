#include <doctest.h>

#include <json.hpp>
#include <map>
#include <sstream>
#include <string>

#include "driftloc/data.hpp"
#include "test_util.hpp"

using namespace driftloc;
using nlohmann::json;
using testutil::run_command;
using testutil::slurp;
using testutil::spit;
using testutil::TempDir;

namespace {

const std::string cli = DRIFTLOC_CLI_PATH;

std::string make_input_csv(const TempDir& dir, int per_window, int drifting, int d,
                           std::uint64_t seed) {
  ClassSwapSpec spec;
  spec.samples_per_window = per_window;
  spec.n_drifting_per_window = drifting;
  spec.dimension = d;
  spec.seed = seed;
  auto [ds, truth] = generate_class_swap_stream(spec);
  const std::string path = dir.file("input.csv");
  save_embedding_csv(path, ds, &truth);
  return path;
}

int count_lines(const std::string& text) {
  int lines = 0;
  for (char c : text) lines += c == '\n' ? 1 : 0;
  return lines;
}

}  // namespace

TEST_CASE("cli localize: cp-dt writes one row per sample plus a manifest") {
  TempDir dir;
  const std::string input = make_input_csv(dir, 60, 5, 3, 11);
  const std::string out = dir.file("out.csv");
  const auto result = run_command(cli + " localize " + input +
                                  " --method cp-dt --n_boot 20 --seed 4 --out " + out);
  REQUIRE(result.exit_code == 0);
  const std::string text = slurp(out);
  CHECK(count_lines(text) == 121);  // header + 120 samples
  CHECK(text.rfind("index,p_or_score,assigned", 0) == 0);

  const json manifest = json::parse(slurp(out + ".manifest.json"));
  CHECK(manifest["command"] == "localize");
  CHECK(manifest["seed"] == 4);
  CHECK(manifest["config"]["n_boot"] == 20);
  CHECK(manifest["config"]["method"] == "cp-dt");
  CHECK(manifest["orientation"] == "p_value");
  CHECK(manifest["tool"] == "driftloc");
}

TEST_CASE("cli localize: kdq assigns every sample") {
  TempDir dir;
  const std::string input = make_input_csv(dir, 60, 5, 3, 12);
  const std::string out = dir.file("kdq.csv");
  const auto result =
      run_command(cli + " localize " + input + " --method kdq --seed 1 --out " + out);
  REQUIRE(result.exit_code == 0);
  std::istringstream in(slurp(out));
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    CHECK(line.substr(line.size() - 2) == ",1");
  }
  CHECK(rows == 120);
}

TEST_CASE("cli localize: unknown method exits 2 listing the valid set") {
  TempDir dir;
  const std::string input = make_input_csv(dir, 10, 2, 2, 13);
  const auto result = run_command(cli + " localize " + input +
                                  " --method foo --out " + dir.file("x.csv"));
  CHECK(result.exit_code == 2);
  for (const char* name : {"cp-dt", "cp-mlp", "split-cp", "mbdl", "rf-heur", "ldd", "kdq"})
    CHECK(result.err.find(name) != std::string::npos);
}

TEST_CASE("cli localize: malformed csv exits 3") {
  TempDir dir;
  const std::string bad = dir.file("bad.csv");
  spit(bad, "t,f0\n0,1.0\n1,zap\n");
  const auto result = run_command(cli + " localize " + bad +
                                  " --method kdq --out " + dir.file("x.csv"));
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("row 3") != std::string::npos);
}

TEST_CASE("cli localize: reruns are byte-identical") {
  TempDir dir;
  const std::string input = make_input_csv(dir, 30, 4, 2, 14);
  const std::string out_a = dir.file("a.csv");
  const std::string out_b = dir.file("b.csv");
  const std::string flags = " --method cp-dt --n_boot 10 --seed 9 --out ";
  REQUIRE(run_command(cli + " localize " + input + flags + out_a).exit_code == 0);
  REQUIRE(run_command(cli + " localize " + input + flags + out_b).exit_code == 0);
  CHECK(slurp(out_a) == slurp(out_b));
  // manifests record inputs and resolved config only, so they match too
  CHECK(slurp(out_a + ".manifest.json") == slurp(out_b + ".manifest.json"));
}

TEST_CASE("cli: help defaults match the manifest's materialized defaults") {
  TempDir dir;
  const auto help = run_command(cli + " localize --help");
  REQUIRE(help.exit_code == 0);

  // parse "--name TYPE [default]" lines
  std::map<std::string, std::string> help_defaults;
  std::istringstream in(help.out);
  std::string line;
  while (std::getline(in, line)) {
    const auto dash = line.find("--");
    if (dash == std::string::npos) continue;
    std::istringstream fields(line.substr(dash + 2));
    std::string name;
    fields >> name;
    const auto open = line.find('[', dash);
    const auto close = line.find(']', open);
    if (open == std::string::npos || close == std::string::npos) continue;
    help_defaults[name] = line.substr(open + 1, close - open - 1);
  }
  REQUIRE(help_defaults.size() >= 15);

  // run with defaults only and read the manifest
  const std::string input = make_input_csv(dir, 10, 2, 2, 15);
  const std::string out = dir.file("defaults.csv");
  REQUIRE(run_command(cli + " localize " + input + " --method kdq --out " + out)
              .exit_code == 0);
  const json manifest = json::parse(slurp(out + ".manifest.json"));
  const json& config = manifest["config"];

  int compared = 0;
  for (const auto& [flag, default_text] : help_defaults) {
    if (!config.contains(flag)) continue;
    ++compared;
    const json& value = config[flag];
    if (value.is_string()) {
      CHECK(value.get<std::string>() == default_text);
    } else {
      CHECK(value.get<double>() == doctest::Approx(std::stod(default_text)).epsilon(1e-12));
    }
  }
  CHECK(compared >= 15);
}

TEST_CASE("cli bench: per-method files, summary, determinism across jobs") {
  TempDir dir;
  const std::string config_path = dir.file("bench.ini");
  spit(config_path,
       "[data]\n"
       "kind = class-swap\n"
       "samples_per_window = 60\n"
       "n_drifting_per_window = 5\n"
       "dimension = 3\n"
       "sigma = 1.0\n"
       "[run]\n"
       "repetitions = 3\n"
       "[method cp-dt]\n"
       "n_boot = 8\n"
       "tree_max_depth = 4\n"
       "[method kdq]\n"
       "kdq_min_leaf = 6\n");

  const std::string out_a = dir.file("run_a");
  const std::string out_b = dir.file("run_b");
  const auto a = run_command(cli + " bench --config " + config_path +
                             " --seed 42 --jobs 1 --plot --out " + out_a);
  REQUIRE(a.exit_code == 0);
  const auto b = run_command(cli + " bench --config " + config_path +
                             " --seed 42 --jobs 4 --plot --out " + out_b);
  REQUIRE(b.exit_code == 0);

  for (const char* name : {"cp-dt.csv", "kdq.csv", "summary.csv", "manifest.json"}) {
    const std::string file_a = slurp(out_a + "/" + name);
    const std::string file_b = slurp(out_b + "/" + name);
    REQUIRE_FALSE(file_a.empty());
    CHECK(file_a == file_b);
  }
  CHECK(testutil::xml_well_formed(slurp(out_a + "/boxplot.svg")));

  // the 2x60 / 10-drifting request is recorded in the manifest
  const json manifest = json::parse(slurp(out_a + "/manifest.json"));
  CHECK(manifest["data"]["samples_per_window"] == 60);
  CHECK(manifest["data"]["n_drifting_per_window"] == 5);
  CHECK(manifest["repetitions"] == 3);
  CHECK(manifest["methods"].size() == 2);
}

TEST_CASE("cli bench: missing --seed is a usage error") {
  TempDir dir;
  const std::string config_path = dir.file("bench.ini");
  spit(config_path, "[data]\nkind = no-drift\n[run]\nrepetitions = 2\n[method kdq]\n");
  const auto result =
      run_command(cli + " bench --config " + config_path + " --out " + dir.file("o"));
  CHECK(result.exit_code == 2);
}

TEST_CASE("cli bench: config diagnostics carry file and line") {
  TempDir dir;
  const std::string config_path = dir.file("broken.ini");
  spit(config_path, "[data]\nkind = class-swap\n[method kdq]\nbogus_key = 1\n");
  const auto result = run_command(cli + " bench --config " + config_path +
                                  " --seed 1 --out " + dir.file("o"));
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("broken.ini:4") != std::string::npos);
  CHECK(result.err.find("bogus_key") != std::string::npos);
}

TEST_CASE("cli sweep: bootstraps grid") {
  TempDir dir;
  const std::string config_path = dir.file("sweep.ini");
  spit(config_path,
       "[data]\n"
       "samples_per_window = 15\n"
       "n_drifting_per_window = 3\n"
       "dimension = 2\n"
       "[run]\n"
       "repetitions = 3\n"
       "[method cp-dt]\n"
       "tree_max_depth = 3\n");
  const std::string out = dir.file("sweep_out");
  const auto result =
      run_command(cli + " sweep --kind bootstraps --config " + config_path +
                  " --grid 2,4,6,8 --seed 3 --out " + out);
  REQUIRE(result.exit_code == 0);
  const std::string curve = slurp(out + "/curve.csv");
  CHECK(count_lines(curve) == 5);  // header + 4 grid points
  CHECK(curve.rfind("grid_value,median_auc,q25,q75", 0) == 0);
  CHECK(testutil::xml_well_formed(slurp(out + "/curve.svg")));

  // rerunning the sweep reproduces the outputs byte for byte
  const std::string out2 = dir.file("sweep_out2");
  REQUIRE(run_command(cli + " sweep --kind bootstraps --config " + config_path +
                      " --grid 2,4,6,8 --seed 3 --out " + out2)
              .exit_code == 0);
  CHECK(slurp(out2 + "/curve.csv") == curve);
  CHECK(slurp(out2 + "/manifest.json") == slurp(out + "/manifest.json"));
}

TEST_CASE("cli: every command documents its flags in --help") {
  for (const std::string command : {"bench", "sweep", "localize"}) {
    const auto help = run_command(cli + " " + command + " --help");
    CHECK(help.exit_code == 0);
    for (const char* flag : {"--seed", "--jobs", "--out"})
      CHECK(help.out.find(flag) != std::string::npos);
  }
}

TEST_CASE("cli sweep: splitsize range grid expands to 8 rows") {
  TempDir dir;
  const std::string config_path = dir.file("sweep.ini");
  spit(config_path,
       "[data]\n"
       "samples_per_window = 25\n"
       "n_drifting_per_window = 8\n"
       "dimension = 2\n"
       "[run]\n"
       "repetitions = 2\n"
       "[method split-cp]\n"
       "model = dt\n");
  const std::string out = dir.file("split_out");
  const auto result =
      run_command(cli + " sweep --kind splitsize --config " + config_path +
                  " --grid '0.2..0.9 step 0.1' --seed 3 --out " + out);
  REQUIRE(result.exit_code == 0);
  CHECK(count_lines(slurp(out + "/curve.csv")) == 9);
}

TEST_CASE("cli sweep: invalid grid tokens name the token and exit 2") {
  TempDir dir;
  const std::string config_path = dir.file("sweep.ini");
  spit(config_path,
       "[data]\nsamples_per_window = 10\nn_drifting_per_window = 2\n"
       "[run]\nrepetitions = 2\n[method cp-dt]\n");
  const auto result =
      run_command(cli + " sweep --kind bootstraps --config " + config_path +
                  " --grid 10,abc --seed 3 --out " + dir.file("o"));
  CHECK(result.exit_code == 2);
  CHECK(result.err.find("abc") != std::string::npos);
}
