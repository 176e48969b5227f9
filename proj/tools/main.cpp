#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "driftloc/errors.hpp"
#include "driftloc/eval.hpp"
#include "driftloc/parallel.hpp"
#include "driftloc/report.hpp"
#include "ini.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace driftloc;
using driftloc::tools::IniSection;
using driftloc::tools::parse_ini_file;

namespace {

constexpr const char* kToolVersion = "0.1.0";

// ---------------------------------------------------------------------------
// small parsing helpers

std::string where(const std::string& file, int line) {
  return file + ":" + std::to_string(line);
}

long to_long(const std::string& text, const std::string& context) {
  long v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(context + ": expected integer, got '" + text + "'");
  return v;
}

double to_double(const std::string& text, const std::string& context) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw ConfigError(context + ": expected number, got '" + text + "'");
  return v;
}

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto comma = text.find(',', pos);
    std::string token = text.substr(
        pos, comma == std::string::npos ? std::string::npos : comma - pos);
    const auto b = token.find_first_not_of(" \t");
    if (b == std::string::npos)
      throw ConfigError("invalid grid token '" + token + "'");
    const auto e = token.find_last_not_of(" \t");
    token = token.substr(b, e - b + 1);

    const auto dots = token.find("..");
    if (dots != std::string::npos) {
      // range syntax: "<from>..<to> step <s>"
      const auto step_kw = token.find("step", dots);
      if (step_kw == std::string::npos)
        throw ConfigError("invalid grid token '" + token + "' (range needs 'step')");
      const std::string from_text = token.substr(0, dots);
      std::string to_text = token.substr(dots + 2, step_kw - dots - 2);
      const auto te = to_text.find_last_not_of(" \t");
      if (te == std::string::npos)
        throw ConfigError("invalid grid token '" + token + "'");
      to_text = to_text.substr(0, te + 1);
      std::string step_text = token.substr(step_kw + 4);
      const auto sb = step_text.find_first_not_of(" \t");
      if (sb == std::string::npos)
        throw ConfigError("invalid grid token '" + token + "'");
      step_text = step_text.substr(sb);
      const double from = to_double(from_text, "grid token '" + token + "'");
      const double to = to_double(to_text, "grid token '" + token + "'");
      const double step = to_double(step_text, "grid token '" + token + "'");
      if (!(step > 0.0) || to < from)
        throw ConfigError("invalid grid token '" + token + "' (bad range)");
      const int count = static_cast<int>(std::floor((to - from) / step + 1e-9)) + 1;
      for (int i = 0; i < count; ++i) grid.push_back(from + i * step);
    } else {
      grid.push_back(to_double(token, "grid"));
    }
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (grid.empty()) throw ConfigError("empty grid");
  return grid;
}

// ---------------------------------------------------------------------------
// method parameters: one flag set shared by the CLI and the config files

struct MethodOptions {
  std::string method = "cp-dt";
  int n_boot = 100;
  int pool_factor = 10;
  int tree_max_depth = 5;
  int tree_min_leaf = 5;
  int hidden_units = 64;
  int epochs = 100;
  double learning_rate = 0.01;
  int batch_size = 32;
  double split_fraction = 0.5;
  std::string model = "dt";
  int n_perm = 100;
  int n_trees = 100;
  int k = 0;
  int n_resample = 100;
  int kdq_max_depth = 20;
  int kdq_min_leaf = 10;

  MethodSpec to_spec() const {
    MethodSpec spec;
    spec.id = method;
    spec.n_boot = n_boot;
    spec.pool_factor = pool_factor;
    spec.tree = TreeParams{tree_max_depth, tree_min_leaf};
    spec.mlp = MlpParams{hidden_units, epochs, learning_rate, batch_size};
    spec.split_fraction = split_fraction;
    spec.split_model = model == "mlp" ? CpModelKind::mlp : CpModelKind::decision_tree;
    spec.kdq = KdqParams{kdq_min_leaf, kdq_max_depth};
    spec.ldd = LddParams{k, n_resample};
    spec.n_perm = n_perm;
    spec.n_trees = n_trees;
    return spec;
  }

  bool apply(const std::string& key, const std::string& value, const std::string& ctx) {
    if (key == "method") method = value;
    else if (key == "n_boot") n_boot = static_cast<int>(to_long(value, ctx));
    else if (key == "pool_factor") pool_factor = static_cast<int>(to_long(value, ctx));
    else if (key == "tree_max_depth") tree_max_depth = static_cast<int>(to_long(value, ctx));
    else if (key == "tree_min_leaf") tree_min_leaf = static_cast<int>(to_long(value, ctx));
    else if (key == "hidden_units") hidden_units = static_cast<int>(to_long(value, ctx));
    else if (key == "epochs") epochs = static_cast<int>(to_long(value, ctx));
    else if (key == "learning_rate") learning_rate = to_double(value, ctx);
    else if (key == "batch_size") batch_size = static_cast<int>(to_long(value, ctx));
    else if (key == "split_fraction") split_fraction = to_double(value, ctx);
    else if (key == "model") model = value;
    else if (key == "n_perm") n_perm = static_cast<int>(to_long(value, ctx));
    else if (key == "n_trees") n_trees = static_cast<int>(to_long(value, ctx));
    else if (key == "k") k = static_cast<int>(to_long(value, ctx));
    else if (key == "n_resample") n_resample = static_cast<int>(to_long(value, ctx));
    else if (key == "kdq_max_depth") kdq_max_depth = static_cast<int>(to_long(value, ctx));
    else if (key == "kdq_min_leaf") kdq_min_leaf = static_cast<int>(to_long(value, ctx));
    else return false;
    return true;
  }

  json to_json() const {
    json j;
    j["method"] = method;
    j["n_boot"] = n_boot;
    j["pool_factor"] = pool_factor;
    j["tree_max_depth"] = tree_max_depth;
    j["tree_min_leaf"] = tree_min_leaf;
    j["hidden_units"] = hidden_units;
    j["epochs"] = epochs;
    j["learning_rate"] = learning_rate;
    j["batch_size"] = batch_size;
    j["split_fraction"] = split_fraction;
    j["model"] = model;
    j["n_perm"] = n_perm;
    j["n_trees"] = n_trees;
    j["k"] = k;
    j["n_resample"] = n_resample;
    j["kdq_max_depth"] = kdq_max_depth;
    j["kdq_min_leaf"] = kdq_min_leaf;
    return j;
  }

  void add_flags(CLI::App* cmd) {
    cmd->add_option("--n_boot", n_boot, "number of bootstraps (cp-*, mbdl)")
        ->capture_default_str();
    cmd->add_option("--pool_factor", pool_factor,
                    "bootstrap candidate pool factor (cp-*)")
        ->capture_default_str();
    cmd->add_option("--tree_max_depth", tree_max_depth, "decision tree max depth")
        ->capture_default_str();
    cmd->add_option("--tree_min_leaf", tree_min_leaf, "decision tree min leaf size")
        ->capture_default_str();
    cmd->add_option("--hidden_units", hidden_units, "MLP hidden layer width")
        ->capture_default_str();
    cmd->add_option("--epochs", epochs, "MLP training epochs")->capture_default_str();
    cmd->add_option("--learning_rate", learning_rate, "MLP learning rate")
        ->capture_default_str();
    cmd->add_option("--batch_size", batch_size, "MLP mini-batch size")
        ->capture_default_str();
    cmd->add_option("--split_fraction", split_fraction,
                    "training fraction (split-cp)")
        ->capture_default_str();
    cmd->add_option("--model", model, "inner model for split-cp: dt or mlp")
        ->check(CLI::IsMember({"dt", "mlp"}))
        ->capture_default_str();
    cmd->add_option("--n_perm", n_perm, "label permutations (mbdl)")
        ->capture_default_str();
    cmd->add_option("--n_trees", n_trees, "forest size (rf-heur)")
        ->capture_default_str();
    cmd->add_option("--k", k, "neighborhood size (ldd), 0 = min(20, n/5)")
        ->capture_default_str();
    cmd->add_option("--n_resample", n_resample, "null permutations (ldd)")
        ->capture_default_str();
    cmd->add_option("--kdq_max_depth", kdq_max_depth, "kdq-tree max depth")
        ->capture_default_str();
    cmd->add_option("--kdq_min_leaf", kdq_min_leaf, "kdq-tree min leaf size")
        ->capture_default_str();
  }
};

// ---------------------------------------------------------------------------
// config file -> experiment pieces

DataSpec parse_data_section(const IniSection& section, const std::string& file) {
  DataSpec spec;
  std::string kind = "class-swap";
  for (const auto& entry : section.entries) {
    const std::string ctx = where(file, entry.line);
    if (entry.key == "kind") kind = entry.value;
    else if (entry.key == "samples_per_window")
      spec.class_swap.samples_per_window = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "n_drifting_per_window")
      spec.class_swap.n_drifting_per_window = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "n_classes")
      spec.class_swap.n_classes = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "dimension")
      spec.class_swap.dimension = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "sigma")
      spec.class_swap.sigma = to_double(entry.value, ctx);
    else if (entry.key == "center_low")
      spec.class_swap.center_low = to_double(entry.value, ctx);
    else if (entry.key == "center_high")
      spec.class_swap.center_high = to_double(entry.value, ctx);
    else if (entry.key == "n")
      spec.no_drift_n = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "d")
      spec.no_drift_d = static_cast<int>(to_long(entry.value, ctx));
    else if (entry.key == "path")
      spec.csv_path = entry.value;
    else
      throw ConfigError(ctx + ": unknown [data] key '" + entry.key + "'");
  }
  if (kind == "class-swap") spec.kind = DataSpec::Kind::class_swap;
  else if (kind == "no-drift") spec.kind = DataSpec::Kind::no_drift;
  else if (kind == "csv") spec.kind = DataSpec::Kind::csv;
  else
    throw ConfigError(where(file, section.line) + ": unknown data kind '" + kind + "'");
  if (spec.kind == DataSpec::Kind::csv && spec.csv_path.empty())
    throw ConfigError(where(file, section.line) + ": kind = csv needs 'path'");
  return spec;
}

json data_to_json(const DataSpec& spec) {
  json j;
  switch (spec.kind) {
    case DataSpec::Kind::class_swap:
      j["kind"] = "class-swap";
      j["samples_per_window"] = spec.class_swap.samples_per_window;
      j["n_drifting_per_window"] = spec.class_swap.n_drifting_per_window;
      j["n_classes"] = spec.class_swap.n_classes;
      j["dimension"] = spec.class_swap.dimension;
      j["sigma"] = spec.class_swap.sigma;
      j["center_low"] = spec.class_swap.center_low;
      j["center_high"] = spec.class_swap.center_high;
      break;
    case DataSpec::Kind::no_drift:
      j["kind"] = "no-drift";
      j["n"] = spec.no_drift_n;
      j["d"] = spec.no_drift_d;
      break;
    case DataSpec::Kind::csv:
      j["kind"] = "csv";
      j["path"] = spec.csv_path;
      break;
  }
  return j;
}

struct BenchConfig {
  DataSpec data;
  int repetitions = 500;
  std::vector<std::pair<std::string, MethodOptions>> methods;  // label, options
};

BenchConfig parse_bench_config(const std::string& path) {
  BenchConfig config;
  bool have_data = false;
  for (const auto& section : parse_ini_file(path)) {
    if (section.name == "data") {
      config.data = parse_data_section(section, path);
      have_data = true;
    } else if (section.name == "run") {
      for (const auto& entry : section.entries) {
        const std::string ctx = where(path, entry.line);
        if (entry.key == "repetitions")
          config.repetitions = static_cast<int>(to_long(entry.value, ctx));
        else
          throw ConfigError(ctx + ": unknown [run] key '" + entry.key + "'");
      }
    } else if (section.name.rfind("method", 0) == 0) {
      std::string label = section.name.substr(6);
      const auto b = label.find_first_not_of(" \t");
      label = b == std::string::npos ? "" : label.substr(b);
      if (label.empty())
        throw ConfigError(where(path, section.line) +
                          ": method section needs a name: [method <name>]");
      MethodOptions options;
      options.method = label;  // implicit; a 'method =' key overrides
      for (const auto& entry : section.entries) {
        const std::string ctx = where(path, entry.line);
        if (!options.apply(entry.key, entry.value, ctx))
          throw ConfigError(ctx + ": unknown method key '" + entry.key + "'");
      }
      config.methods.emplace_back(label, options);
    } else {
      throw ConfigError(where(path, section.line) + ": unknown section [" +
                        section.name + "]");
    }
  }
  if (!have_data) throw ConfigError(path + ": missing [data] section");
  if (config.methods.empty())
    throw ConfigError(path + ": no [method <name>] sections");
  if (config.repetitions < 1) throw ConfigError(path + ": repetitions must be >= 1");
  return config;
}

void write_manifest(const fs::path& path, json manifest) {
  manifest["tool"] = "driftloc";
  manifest["version"] = kToolVersion;
  std::ofstream out(path);
  if (!out) throw SchemaError("cannot write '" + path.string() + "'");
  out << manifest.dump(2) << "\n";
}

std::string sanitize_label(const std::string& label) {
  std::string out;
  for (char c : label)
    out += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
  return out;
}

// ---------------------------------------------------------------------------
// subcommands

struct CommonFlags {
  std::uint64_t seed = 0;
  int jobs = 0;  // 0 = all cores
  std::string out;
};

int cmd_localize(const std::string& input, const MethodOptions& options,
                 const CommonFlags& flags) {
  auto [ds, truth] = load_embedding_csv(input);
  (void)truth;  // localization does not need ground truth
  const LocalTestResult result =
      run_method(options.to_spec(), ds, flags.seed, resolve_jobs(flags.jobs));

  std::ofstream out(flags.out);
  if (!out) throw SchemaError("cannot write '" + flags.out + "'");
  out << "index,p_or_score,assigned\n";
  for (std::size_t i = 0; i < result.values.size(); ++i) {
    const bool assigned = result.assigned.empty() || result.assigned[i];
    out << i << ',' << format_number(result.values[i]) << ',' << (assigned ? 1 : 0)
        << "\n";
  }
  out.close();

  json manifest;
  manifest["command"] = "localize";
  manifest["input"] = input;
  manifest["seed"] = flags.seed;
  manifest["orientation"] = result.orientation == ScoreOrientation::lower_is_drifting
                                ? "p_value"
                                : "drift_score";
  manifest["config"] = options.to_json();
  write_manifest(flags.out + ".manifest.json", std::move(manifest));
  return 0;
}

int cmd_bench(const std::string& config_path, bool plot, const CommonFlags& flags) {
  const BenchConfig config = parse_bench_config(config_path);
  fs::create_directories(flags.out);

  std::vector<std::string> labels;
  std::vector<ResultTable> tables;
  for (const auto& [label, options] : config.methods) {
    ExperimentConfig experiment;
    experiment.method = options.to_spec();
    experiment.data = config.data;
    experiment.n_repetitions = config.repetitions;
    experiment.seed = flags.seed;
    const ResultTable table = run_experiment(experiment, resolve_jobs(flags.jobs));
    const fs::path out_csv = fs::path(flags.out) / (sanitize_label(label) + ".csv");
    emit_results(table, out_csv.string(), EmitFormat::csv);
    labels.push_back(label);
    tables.push_back(table);
  }
  write_bench_summary_csv((fs::path(flags.out) / "summary.csv").string(), labels,
                          tables);
  if (plot)
    write_box_plot_svg((fs::path(flags.out) / "boxplot.svg").string(), labels, tables,
                       "ROC-AUC by method");

  json manifest;
  manifest["command"] = "bench";
  manifest["config_file"] = config_path;
  manifest["seed"] = flags.seed;
  manifest["repetitions"] = config.repetitions;
  manifest["data"] = data_to_json(config.data);
  json methods = json::array();
  for (const auto& [label, options] : config.methods) {
    json m = options.to_json();
    m["name"] = label;
    methods.push_back(std::move(m));
  }
  manifest["methods"] = std::move(methods);
  write_manifest(fs::path(flags.out) / "manifest.json", std::move(manifest));
  return 0;
}

int cmd_sweep(const std::string& kind, const std::string& config_path,
              const std::string& grid_text, const CommonFlags& flags) {
  const BenchConfig config = parse_bench_config(config_path);
  if (config.methods.size() != 1)
    throw ConfigError(config_path + ": sweep needs exactly one [method <name>] section");
  const std::vector<double> grid = parse_grid(grid_text);
  fs::create_directories(flags.out);

  ExperimentConfig experiment;
  experiment.method = config.methods.front().second.to_spec();
  experiment.data = config.data;
  experiment.n_repetitions = config.repetitions;
  experiment.seed = flags.seed;

  std::vector<SweepPoint> curve;
  std::string x_label;
  if (kind == "bootstraps") {
    std::vector<int> n_boot_grid;
    for (double g : grid) {
      const int v = static_cast<int>(std::llround(g));
      if (std::abs(g - v) > 1e-9 || v < 1)
        throw ConfigError("invalid grid token '" + format_number(g) +
                          "' (bootstraps grid needs positive integers)");
      n_boot_grid.push_back(v);
    }
    curve = bootstrap_sweep(experiment, n_boot_grid, resolve_jobs(flags.jobs));
    x_label = "number of bootstraps";
  } else {  // splitsize, enforced by the flag check
    for (double g : grid) {
      if (!(g > 0.0 && g < 1.0))
        throw ConfigError("invalid grid token '" + format_number(g) +
                          "' (split fractions lie in (0,1))");
    }
    curve = split_size_sweep(experiment, grid, resolve_jobs(flags.jobs));
    x_label = "training fraction";
  }

  write_curve_csv((fs::path(flags.out) / "curve.csv").string(), curve);
  write_curve_svg((fs::path(flags.out) / "curve.svg").string(), curve,
                  kind == "bootstraps" ? "Bootstrap count sweep" : "Split size sweep",
                  x_label);

  json manifest;
  manifest["command"] = "sweep";
  manifest["kind"] = kind;
  manifest["config_file"] = config_path;
  manifest["seed"] = flags.seed;
  manifest["repetitions"] = config.repetitions;
  manifest["grid"] = grid;
  manifest["data"] = data_to_json(config.data);
  json m = config.methods.front().second.to_json();
  m["name"] = config.methods.front().first;
  manifest["method"] = std::move(m);
  write_manifest(fs::path(flags.out) / "manifest.json", std::move(manifest));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"driftloc: conformal drift localization on two-window data streams"};
  app.set_version_flag("--version", std::string("driftloc ") + kToolVersion);
  app.require_subcommand(1);

  // localize
  auto* localize = app.add_subcommand(
      "localize", "assign per-sample drift p-values/scores to one CSV dataset");
  std::string input;
  MethodOptions options;
  CommonFlags localize_flags;
  localize->add_option("input", input, "input CSV (schema: t, optional drift, f0..)")
      ->required();
  localize->add_option("--method", options.method, "localization method")
      ->required()
      ->check(CLI::IsMember(valid_method_names()));
  localize->add_option("--seed", localize_flags.seed, "master RNG seed")
      ->capture_default_str();
  localize->add_option("--jobs", localize_flags.jobs, "worker threads, 0 = all cores")
      ->capture_default_str();
  localize->add_option("--out", localize_flags.out, "output CSV path")->required();
  options.add_flags(localize);

  // bench
  auto* bench = app.add_subcommand(
      "bench", "run the repeated-experiment benchmark from a config file");
  std::string bench_config;
  bool bench_plot = false;
  CommonFlags bench_flags;
  bench->add_option("--config", bench_config, "INI config file")->required();
  bench->add_option("--seed", bench_flags.seed, "master RNG seed")->required();
  bench->add_option("--jobs", bench_flags.jobs, "worker threads, 0 = all cores")
      ->capture_default_str();
  bench->add_option("--out", bench_flags.out, "output directory")->required();
  bench->add_flag("--plot", bench_plot, "also write a box-plot SVG");

  // sweep
  auto* sweep = app.add_subcommand(
      "sweep", "sweep bootstrap count or split fraction over a grid");
  std::string sweep_kind;
  std::string sweep_config;
  std::string sweep_grid;
  CommonFlags sweep_flags;
  sweep->add_option("--kind", sweep_kind, "bootstraps or splitsize")
      ->required()
      ->check(CLI::IsMember({"bootstraps", "splitsize"}));
  sweep->add_option("--config", sweep_config, "INI config file (one method section)")
      ->required();
  sweep->add_option("--grid", sweep_grid,
                    "comma list or range, e.g. '10,25,50' or '0.2..0.9 step 0.1'")
      ->required();
  sweep->add_option("--seed", sweep_flags.seed, "master RNG seed")->required();
  sweep->add_option("--jobs", sweep_flags.jobs, "worker threads, 0 = all cores")
      ->capture_default_str();
  sweep->add_option("--out", sweep_flags.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (localize->parsed()) return cmd_localize(input, options, localize_flags);
    if (bench->parsed()) return cmd_bench(bench_config, bench_plot, bench_flags);
    return cmd_sweep(sweep_kind, sweep_config, sweep_grid, sweep_flags);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SchemaError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "numerical error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
}
