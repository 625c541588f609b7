// Apache License, Version 2.0, refer to LICENSE.txt

// Command-line front end for the smm engine. Everything below talks to the
// shared library through the C API in smm/smm.h; the CLI owns only argument
// parsing, console output and exit codes (0 ok, 1 usage, 2 data, 3 numeric).

#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "CLI11.hpp"
#include "smm/smm.h"

namespace {

struct ParamPairs {
  std::vector<std::pair<std::string, std::string>> pairs;
};

using ParamsHandle = std::unique_ptr<smm_params, decltype(&smm_params_free)>;
using DatasetHandle = std::unique_ptr<smm_dataset, decltype(&smm_dataset_free)>;
using ModelHandle = std::unique_ptr<smm_model, decltype(&smm_model_free)>;
using GenspecHandle = std::unique_ptr<smm_genspec, decltype(&smm_genspec_free)>;

[[noreturn]] void die(smm_status status) {
  std::fprintf(stderr, "smm: %s\n", smm_last_error());
  std::exit(static_cast<int>(status));
}

void check(smm_status status) {
  if (status != SMM_OK) die(status);
}

ParamsHandle build_params(const ParamPairs& collected) {
  ParamsHandle params(smm_params_create(), smm_params_free);
  for (const auto& [key, value] : collected.pairs) {
    check(smm_params_set(params.get(), key.c_str(), value.c_str()));
  }
  return params;
}

DatasetHandle load_dataset(const std::string& csv, const std::string& schema) {
  smm_dataset* raw = nullptr;
  check(smm_dataset_load_csv(csv.c_str(), schema.c_str(), &raw));
  return DatasetHandle(raw, smm_dataset_free);
}

// Registers an engine hyperparameter as a CLI option; the value is handed to
// smm_params_set verbatim, so the option accepts exactly what the engine
// documents. Config-file lines use the same names without the leading dashes.
void add_param_option(CLI::App* cmd, ParamPairs& collected, const char* flag,
                      const char* key, const char* desc) {
  cmd->add_option_function<std::string>(
      flag,
      [key, &collected](const std::string& value) {
        collected.pairs.emplace_back(key, value);
      },
      desc);
}

void add_engine_options(CLI::App* cmd, ParamPairs& collected) {
  add_param_option(cmd, collected, "--task", "task",
                   "density or classification (default density)");
  add_param_option(cmd, collected, "--components", "components",
                   "mixture components K (default 16)");
  add_param_option(cmd, collected, "--max-leaves", "max_leaves",
                   "leaf bound L per tree (default 8)");
  add_param_option(cmd, collected, "--pi-init", "pi_init",
                   "initial mixture weight of a new component (default 0.2)");
  add_param_option(cmd, collected, "--alpha", "alpha",
                   "multinomial leaf smoothing (default 1)");
  add_param_option(cmd, collected, "--variance-floor", "variance_floor",
                   "absolute gaussian variance floor (default 1e-9)");
  add_param_option(cmd, collected, "--gamma", "gamma",
                   "min fractional count per split child (default 1)");
  add_param_option(cmd, collected, "--score", "score",
                   "ml, bic or penalized (default bic)");
  add_param_option(cmd, collected, "--kappa", "kappa",
                   "penalized-score kappa (default 0.9)");
  add_param_option(cmd, collected, "--schedule", "schedule",
                   "s1-s2-s3, or smm for 5-5-20 (default 5-5-20)");
  add_param_option(cmd, collected, "--max-outer", "max_outer",
                   "cap on outer iterations (default 20)");
  add_param_option(cmd, collected, "--conv-tol", "conv_tol",
                   "add-component convergence threshold (default 1e-5)");
  add_param_option(cmd, collected, "--init", "init",
                   "initial component: marginal or uniform (default marginal)");
  add_param_option(cmd, collected, "--stage-gate", "stage_gate",
                   "on/off: accept stages only on score improvement "
                   "(default off)");
  add_param_option(cmd, collected, "--seed", "seed",
                   "random seed for splits/sampling (default 0)");
  add_param_option(cmd, collected, "--threads", "threads",
                   "worker threads, 0 = hardware (default 0)");
  add_param_option(cmd, collected, "--timings", "timings",
                   "on/off: add a seconds column to curve reports "
                   "(default off; off keeps reruns byte-identical)");
  add_param_option(cmd, collected, "--tune-leaf-grid", "tune_leaf_grid",
                   "comma list of L candidates "
                   "(default 2,4,8,16,32,64,128,256,512)");
  add_param_option(cmd, collected, "--tune-pi-grid", "tune_pi_grid",
                   "comma list of pi_init candidates "
                   "(default 0.05,0.1,0.2,0.3,0.5)");
  add_param_option(cmd, collected, "--tune-fraction", "tune_fraction",
                   "train share of the tuning split (default 0.7)");
  add_param_option(cmd, collected, "--tune-components", "tune_components",
                   "stages fitted per tuning cell (default 8)");
  add_param_option(cmd, collected, "--tune-max-outer", "tune_max_outer",
                   "outer-iteration cap while tuning (default 5)");
  add_param_option(cmd, collected, "--baseline-kappa-grid",
                   "baseline_kappa_grid",
                   "baseline kappa candidates (default 0.1,0.5,0.9)");
  add_param_option(cmd, collected, "--baseline-gamma-grid",
                   "baseline_gamma_grid",
                   "baseline gamma candidates (default 1,5,25)");
  add_param_option(cmd, collected, "--backfit-max-iters", "backfit_max_iters",
                   "weight-backfit iteration cap (default 100)");
  add_param_option(cmd, collected, "--backfit-tol", "backfit_tol",
                   "backfit convergence tolerance (default 1e-6)");
  cmd->set_config("--config", "",
                  "key=value config file; command-line flags override it");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"staged mixture modeling engine"};
  app.require_subcommand(1);

  // train
  auto* train_cmd = app.add_subcommand("train", "fit a model and save it");
  ParamPairs train_params;
  std::string train_csv, train_schema, train_model_out;
  std::string train_test_csv, train_curve_out;
  bool train_baseline = false;
  train_cmd->add_option("--train", train_csv, "training CSV")->required();
  train_cmd->add_option("--schema", train_schema, "schema file")->required();
  train_cmd->add_option("--model-out", train_model_out, "model file to write")
      ->required();
  train_cmd->add_option("--test", train_test_csv,
                        "test CSV for per-stage curve scores");
  train_cmd->add_option("--curve-out", train_curve_out,
                        "per-stage curve CSV to write");
  train_cmd->add_flag("--baseline", train_baseline,
                      "fit the single-model baseline instead of a mixture");
  add_engine_options(train_cmd, train_params);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "score a saved model");
  std::string eval_model, eval_test, eval_schema, eval_report;
  eval_cmd->add_option("--model", eval_model, "model file")->required();
  eval_cmd->add_option("--test", eval_test, "test CSV")->required();
  eval_cmd->add_option("--schema", eval_schema,
                       "schema file (default: schema embedded in the model)");
  eval_cmd->add_option("--report-out", eval_report, "one-row CSV to write");

  // tune
  auto* tune_cmd =
      app.add_subcommand("tune", "grid-search max_leaves and pi_init");
  ParamPairs tune_params;
  std::string tune_csv, tune_schema, tune_table;
  tune_cmd->add_option("--train", tune_csv, "training CSV")->required();
  tune_cmd->add_option("--schema", tune_schema, "schema file")->required();
  tune_cmd->add_option("--table-out", tune_table, "holdout table CSV to write");
  add_engine_options(tune_cmd, tune_params);

  // synth
  auto* synth_cmd =
      app.add_subcommand("synth", "sample a CSV from a generative spec");
  std::string synth_spec, synth_out;
  int64_t synth_n = 0;
  uint64_t synth_seed = 0;
  synth_cmd->add_option("--spec", synth_spec, "generative spec file")
      ->required();
  synth_cmd->add_option("--n", synth_n, "cases to sample")->required();
  synth_cmd->add_option("--seed", synth_seed, "sampling seed (default 0)");
  synth_cmd->add_option("--out", synth_out, "CSV to write")->required();

  // backfit
  auto* backfit_cmd =
      app.add_subcommand("backfit", "backfit a saved mixture model");
  ParamPairs backfit_params;
  std::string bf_model, bf_train, bf_mode, bf_report, bf_model_out;
  backfit_cmd->add_option("--model", bf_model, "model file")->required();
  backfit_cmd->add_option("--train", bf_train, "training CSV")->required();
  backfit_cmd->add_option("--mode", bf_mode, "weights or structure")
      ->required();
  backfit_cmd->add_option("--report-out", bf_report,
                          "per-iteration report CSV to write");
  backfit_cmd->add_option("--model-out", bf_model_out,
                          "backfitted model file to write");
  add_engine_options(backfit_cmd, backfit_params);

  // curve
  auto* curve_cmd = app.add_subcommand(
      "curve", "per-stage score curves for one or more schedules");
  ParamPairs curve_params;
  std::string curve_train, curve_schema, curve_test, curve_out;
  std::string curve_schedules = "5-5-20";
  std::string curve_backfit = "none";
  curve_cmd->add_option("--train", curve_train, "training CSV")->required();
  curve_cmd->add_option("--schema", curve_schema, "schema file")->required();
  curve_cmd->add_option("--test", curve_test, "test CSV");
  curve_cmd->add_option("--schedules", curve_schedules,
                        "comma list of s1-s2-s3 (default 5-5-20)");
  curve_cmd->add_option("--backfit", curve_backfit,
                        "none, weights or structure (default none)");
  curve_cmd->add_option("--out", curve_out, "curve CSV to write")->required();
  add_engine_options(curve_cmd, curve_params);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (train_cmd->parsed()) {
    if (train_baseline) train_params.pairs.emplace_back("mode", "baseline");
    ParamsHandle params = build_params(train_params);
    DatasetHandle train = load_dataset(train_csv, train_schema);
    DatasetHandle test(nullptr, smm_dataset_free);
    if (!train_test_csv.empty()) test = load_dataset(train_test_csv, train_schema);
    smm_model* model = nullptr;
    check(smm_train(params.get(), train.get(), test.get(),
                    train_curve_out.empty() ? nullptr : train_curve_out.c_str(),
                    &model));
    ModelHandle owned(model, smm_model_free);
    check(smm_model_save(owned.get(), train_model_out.c_str()));
    std::printf("components %d\n", smm_model_num_components(owned.get()));
    return 0;
  }

  if (eval_cmd->parsed()) {
    smm_model* model = nullptr;
    check(smm_model_load(eval_model.c_str(), &model));
    ModelHandle owned(model, smm_model_free);
    DatasetHandle test(nullptr, smm_dataset_free);
    if (eval_schema.empty()) {
      smm_dataset* raw = nullptr;
      check(smm_model_load_dataset(owned.get(), eval_test.c_str(), &raw));
      test.reset(raw);
    } else {
      test = load_dataset(eval_test, eval_schema);
    }
    double score = 0.0;
    check(smm_model_log_score(owned.get(), test.get(), &score));
    std::printf("log_score %.17g\n", score);
    bool classifier = smm_model_is_classifier(owned.get()) != 0;
    double acc = 0.0;
    if (classifier) {
      check(smm_model_accuracy(owned.get(), test.get(), &acc));
      std::printf("accuracy %.17g\n", acc);
    }
    if (!eval_report.empty()) {
      FILE* out = std::fopen(eval_report.c_str(), "wb");
      if (!out) {
        std::fprintf(stderr, "smm: cannot write %s\n", eval_report.c_str());
        return 2;
      }
      std::fprintf(out, "log_score,accuracy\n");
      if (classifier) {
        std::fprintf(out, "%.17g,%.17g\n", score, acc);
      } else {
        std::fprintf(out, "%.17g,\n", score);
      }
      std::fclose(out);
    }
    return 0;
  }

  if (tune_cmd->parsed()) {
    ParamsHandle params = build_params(tune_params);
    DatasetHandle train = load_dataset(tune_csv, tune_schema);
    int64_t best_leaves = 0;
    double best_pi = 0.0;
    check(smm_tune(params.get(), train.get(),
                   tune_table.empty() ? nullptr : tune_table.c_str(),
                   &best_leaves, &best_pi));
    std::printf("best_max_leaves %" PRId64 "\n", best_leaves);
    std::printf("best_pi_init %.17g\n", best_pi);
    return 0;
  }

  if (synth_cmd->parsed()) {
    smm_genspec* spec = nullptr;
    check(smm_genspec_load(synth_spec.c_str(), &spec));
    GenspecHandle owned(spec, smm_genspec_free);
    smm_dataset* data = nullptr;
    check(smm_genspec_sample(owned.get(), synth_n, synth_seed, &data));
    DatasetHandle dataset(data, smm_dataset_free);
    check(smm_dataset_save_csv(dataset.get(), synth_out.c_str()));
    std::printf("cases %" PRId64 "\n", smm_dataset_num_cases(dataset.get()));
    return 0;
  }

  if (backfit_cmd->parsed()) {
    ParamsHandle params = build_params(backfit_params);
    smm_model* model = nullptr;
    check(smm_model_load(bf_model.c_str(), &model));
    ModelHandle owned(model, smm_model_free);
    smm_dataset* raw = nullptr;
    check(smm_model_load_dataset(owned.get(), bf_train.c_str(), &raw));
    DatasetHandle train(raw, smm_dataset_free);
    smm_model* result = nullptr;
    check(smm_backfit(params.get(), owned.get(), train.get(), bf_mode.c_str(),
                      bf_report.empty() ? nullptr : bf_report.c_str(), &result));
    ModelHandle owned_result(result, smm_model_free);
    if (!bf_model_out.empty()) {
      check(smm_model_save(owned_result.get(), bf_model_out.c_str()));
    }
    std::printf("components %d\n", smm_model_num_components(owned_result.get()));
    return 0;
  }

  if (curve_cmd->parsed()) {
    ParamsHandle params = build_params(curve_params);
    DatasetHandle train = load_dataset(curve_train, curve_schema);
    DatasetHandle test(nullptr, smm_dataset_free);
    if (!curve_test.empty()) test = load_dataset(curve_test, curve_schema);
    check(smm_curve(params.get(), train.get(), test.get(),
                    curve_schedules.c_str(), curve_backfit.c_str(),
                    curve_out.c_str()));
    std::printf("wrote %s\n", curve_out.c_str());
    return 0;
  }

  return 1;
}
