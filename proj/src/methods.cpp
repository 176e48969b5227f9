#include "driftloc/methods.hpp"

#include "driftloc/errors.hpp"
#include "driftloc/random.hpp"

namespace driftloc {

const std::vector<std::string>& valid_method_names() {
  static const std::vector<std::string> names = {
      "cp-dt", "cp-mlp", "split-cp", "mbdl", "rf-heur", "ldd", "kdq"};
  return names;
}

namespace {

LocalTestResult from_p_value_table(PValueTable table) {
  LocalTestResult result;
  result.values = std::move(table.aggregated);
  result.assigned = std::move(table.assigned);
  result.orientation = ScoreOrientation::lower_is_drifting;
  return result;
}

}  // namespace

LocalTestResult run_method(const MethodSpec& spec, const LabeledDataset& ds,
                           std::uint64_t seed, int jobs) {
  if (spec.id == "cp-dt" || spec.id == "cp-mlp") {
    CPConfig config;
    config.n_boot = spec.n_boot;
    config.bootstrap_pool_factor = spec.pool_factor;
    config.model_kind =
        spec.id == "cp-dt" ? CpModelKind::decision_tree : CpModelKind::mlp;
    config.tree = spec.tree;
    config.mlp = spec.mlp;
    config.seed = seed;
    return from_p_value_table(cp_drift_localization(ds, config, jobs));
  }
  if (spec.id == "split-cp") {
    return from_p_value_table(split_conformal_localization(
        ds, spec.split_fraction, spec.split_model, spec.tree, spec.mlp, seed));
  }
  if (spec.id == "mbdl") {
    MbdlParams params;
    params.n_boot = spec.n_boot;
    params.n_perm = spec.n_perm;
    params.tree = spec.tree;
    return mbdl_permutation_localize(ds, params, seed, jobs);
  }
  if (spec.id == "rf-heur") {
    RfHeurParams params;
    params.n_trees = spec.n_trees;
    params.tree = spec.tree;
    return rf_heuristic_localize(ds, params, seed);
  }
  if (spec.id == "ldd") {
    return ldd_dis_localize(ds, spec.ldd, seed);
  }
  if (spec.id == "kdq") {
    return kdq_tree_localize(ds, spec.kdq);
  }
  if (spec.id == "random") {  // null method for harness tests
    Rng rng(seed);
    LocalTestResult result;
    result.orientation = ScoreOrientation::higher_is_drifting;
    result.values.resize(static_cast<std::size_t>(ds.size()));
    for (double& v : result.values) v = rng.uniform01();
    result.assigned.assign(static_cast<std::size_t>(ds.size()), true);
    return result;
  }
  std::string names;
  for (const auto& name : valid_method_names()) {
    if (!names.empty()) names += ", ";
    names += name;
  }
  throw ConfigError("unknown method '" + spec.id + "'; valid methods: {" + names + "}");
}

}  // namespace driftloc
