// Apache License, Version 2.0, refer to LICENSE.txt

#include "smm/smm.h"

#include <chrono>
#include <memory>
#include <sstream>
#include <string>

#include "core/data.hpp"
#include "core/error.hpp"
#include "core/evaluate.hpp"
#include "core/model_io.hpp"
#include "core/params.hpp"
#include "core/synth.hpp"

// Opaque handle definitions. Each wraps one core object; the C surface owns
// them via new/delete behind create/free pairs.
struct smm_params {
  smm::RunParams params;
};
struct smm_dataset {
  smm::DatasetPtr data;
};
struct smm_model {
  std::shared_ptr<const smm::StagedMixture> mixture;
};
struct smm_genspec {
  smm::GenerativeSpec spec;
};

namespace {

thread_local std::string g_last_error;

smm_status fail(smm_status status, const char* what) {
  g_last_error = what;
  return status;
}

// Runs `fn` translating core exceptions into status codes.
template <typename F>
smm_status guarded(F&& fn) {
  try {
    fn();
    return SMM_OK;
  } catch (const smm::Error& e) {
    g_last_error = e.what();
    return static_cast<smm_status>(static_cast<int>(e.kind()));
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return SMM_ERR_NUMERIC;
  }
}

std::vector<std::pair<std::string, smm::Schedule>> parse_schedule_list(
    const std::string& text) {
  std::vector<std::pair<std::string, smm::Schedule>> out;
  size_t pos = 0;
  while (pos <= text.size()) {
    size_t comma = text.find(',', pos);
    std::string tok = smm::trim(
        text.substr(pos, comma == std::string::npos ? comma : comma - pos));
    if (!tok.empty()) out.emplace_back(tok, smm::parse_schedule(tok));
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw smm::usage_error("no schedules given");
  return out;
}

smm::BackfitMode parse_backfit_mode(const std::string& mode) {
  if (mode.empty() || mode == "none") return smm::BackfitMode::None;
  if (mode == "weights") return smm::BackfitMode::Weights;
  if (mode == "structure") return smm::BackfitMode::Structure;
  throw smm::usage_error("backfit mode: expected none, weights or structure");
}

}  // namespace

extern "C" {

const char* smm_version(void) { return "1.0.0"; }

const char* smm_last_error(void) { return g_last_error.c_str(); }

smm_params* smm_params_create(void) { return new smm_params(); }

void smm_params_free(smm_params* params) { delete params; }

smm_status smm_params_set(smm_params* params, const char* key,
                          const char* value) {
  if (!params || !key || !value) {
    return fail(SMM_ERR_USAGE, "smm_params_set: null argument");
  }
  return guarded([&] { params->params.set(key, value); });
}

smm_status smm_dataset_load_csv(const char* csv_path, const char* schema_path,
                                smm_dataset** out) {
  if (!csv_path || !schema_path || !out) {
    return fail(SMM_ERR_USAGE, "smm_dataset_load_csv: null argument");
  }
  return guarded([&] {
    auto data =
        std::make_shared<smm::Dataset>(smm::load_csv(csv_path, schema_path));
    *out = new smm_dataset{std::move(data)};
  });
}

smm_status smm_dataset_save_csv(const smm_dataset* dataset,
                                const char* csv_path) {
  if (!dataset || !csv_path) {
    return fail(SMM_ERR_USAGE, "smm_dataset_save_csv: null argument");
  }
  return guarded([&] { smm::save_csv(*dataset->data, csv_path); });
}

smm_status smm_dataset_split(const smm_dataset* dataset, double fraction,
                             uint64_t seed, smm_dataset** train_out,
                             smm_dataset** holdout_out) {
  if (!dataset || !train_out || !holdout_out) {
    return fail(SMM_ERR_USAGE, "smm_dataset_split: null argument");
  }
  return guarded([&] {
    auto [train, holdout] = smm::holdout_split(*dataset->data, fraction, seed);
    *train_out =
        new smm_dataset{std::make_shared<smm::Dataset>(std::move(train))};
    *holdout_out =
        new smm_dataset{std::make_shared<smm::Dataset>(std::move(holdout))};
  });
}

int64_t smm_dataset_num_cases(const smm_dataset* dataset) {
  return dataset ? static_cast<int64_t>(dataset->data->size()) : 0;
}

void smm_dataset_free(smm_dataset* dataset) { delete dataset; }

smm_status smm_train(const smm_params* params, const smm_dataset* train,
                     const smm_dataset* test, const char* curve_csv_path,
                     smm_model** out) {
  if (!params || !train || !out) {
    return fail(SMM_ERR_USAGE, "smm_train: null argument");
  }
  return guarded([&] {
    const smm::RunParams& rp = params->params;
    rp.check_task(train->data->schema());
    if (test) {
      if (test->data->schema() != train->data->schema()) {
        throw smm::data_error("smm_train: train/test schema mismatch");
      }
    }
    if (rp.mode == "baseline") {
      smm::StagedMixture baseline =
          smm::learn_baseline(train->data, rp.baseline_config());
      if (curve_csv_path) {
        smm::CurveResult curve;
        smm::CurvePoint p;
        p.schedule = "baseline";
        p.components = 1;
        p.train_score = smm::task_score(baseline, *train->data);
        if (test) {
          p.has_test = true;
          p.test_score = smm::task_score(baseline, *test->data);
          if (baseline.task() == smm::Task::Classification) {
            p.has_accuracy = true;
            p.test_accuracy = smm::accuracy(baseline, *test->data);
          }
        }
        curve.points.push_back(std::move(p));
        smm::write_curve_csv(curve, curve_csv_path, rp.timings);
      }
      *out = new smm_model{
          std::make_shared<smm::StagedMixture>(std::move(baseline))};
      return;
    }

    auto start = std::chrono::steady_clock::now();
    std::vector<smm::StagedMixture> stages =
        smm::fit_smm(train->data, rp.components, rp.fit_config());
    double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (curve_csv_path) {
      std::ostringstream name;
      name << rp.schedule.s1 << '-' << rp.schedule.s2 << '-' << rp.schedule.s3;
      smm::CurveResult curve;
      for (size_t k = 0; k < stages.size(); ++k) {
        smm::CurvePoint p;
        p.schedule = name.str();
        p.components = static_cast<int>(k + 1);
        p.train_score = smm::task_score(stages[k], *train->data);
        if (test) {
          p.has_test = true;
          p.test_score = smm::task_score(stages[k], *test->data);
          if (stages[k].task() == smm::Task::Classification) {
            p.has_accuracy = true;
            p.test_accuracy = smm::accuracy(stages[k], *test->data);
          }
        }
        p.seconds = seconds;
        curve.points.push_back(std::move(p));
      }
      smm::write_curve_csv(curve, curve_csv_path, rp.timings);
    }
    *out = new smm_model{
        std::make_shared<smm::StagedMixture>(std::move(stages.back()))};
  });
}

smm_status smm_model_save(const smm_model* model, const char* path) {
  if (!model || !path) {
    return fail(SMM_ERR_USAGE, "smm_model_save: null argument");
  }
  return guarded([&] { smm::save_model(*model->mixture, path); });
}

smm_status smm_model_load(const char* path, smm_model** out) {
  if (!path || !out) return fail(SMM_ERR_USAGE, "smm_model_load: null argument");
  return guarded([&] {
    *out = new smm_model{
        std::make_shared<smm::StagedMixture>(smm::load_model(path))};
  });
}

smm_status smm_model_load_dataset(const smm_model* model, const char* csv_path,
                                  smm_dataset** out) {
  if (!model || !csv_path || !out) {
    return fail(SMM_ERR_USAGE, "smm_model_load_dataset: null argument");
  }
  return guarded([&] {
    auto data = std::make_shared<smm::Dataset>(
        smm::parse_csv_dataset(csv_path, model->mixture->schema()));
    *out = new smm_dataset{std::move(data)};
  });
}

int smm_model_num_components(const smm_model* model) {
  return model ? static_cast<int>(model->mixture->num_components()) : 0;
}

int smm_model_is_classifier(const smm_model* model) {
  return model && model->mixture->task() == smm::Task::Classification ? 1 : 0;
}

void smm_model_free(smm_model* model) { delete model; }

smm_status smm_model_log_score(const smm_model* model,
                               const smm_dataset* dataset, double* out) {
  if (!model || !dataset || !out) {
    return fail(SMM_ERR_USAGE, "smm_model_log_score: null argument");
  }
  return guarded([&] { *out = smm::task_score(*model->mixture, *dataset->data); });
}

smm_status smm_model_accuracy(const smm_model* model,
                              const smm_dataset* dataset, double* out) {
  if (!model || !dataset || !out) {
    return fail(SMM_ERR_USAGE, "smm_model_accuracy: null argument");
  }
  return guarded([&] { *out = smm::accuracy(*model->mixture, *dataset->data); });
}

smm_status smm_model_case_log_prob(const smm_model* model,
                                   const smm_dataset* dataset,
                                   int64_t case_index, double* out) {
  if (!model || !dataset || !out) {
    return fail(SMM_ERR_USAGE, "smm_model_case_log_prob: null argument");
  }
  return guarded([&] {
    if (case_index < 0 ||
        case_index >= static_cast<int64_t>(dataset->data->size())) {
      throw smm::usage_error("case index out of range");
    }
    if (dataset->data->schema() != model->mixture->schema()) {
      throw smm::data_error("model and dataset schemas differ");
    }
    *out = model->mixture->log_predictive(*dataset->data,
                                          static_cast<size_t>(case_index));
  });
}

smm_status smm_tune(const smm_params* params, const smm_dataset* train,
                    const char* table_csv_path, int64_t* best_max_leaves,
                    double* best_pi_init) {
  if (!params || !train || !best_max_leaves || !best_pi_init) {
    return fail(SMM_ERR_USAGE, "smm_tune: null argument");
  }
  return guarded([&] {
    const smm::RunParams& rp = params->params;
    rp.check_task(train->data->schema());
    smm::TuneResult result =
        smm::tune(train->data, rp.tune_config(), rp.fit_config());
    if (table_csv_path) smm::write_tune_csv(result, table_csv_path);
    *best_max_leaves = static_cast<int64_t>(result.best_leaves);
    *best_pi_init = result.best_pi;
  });
}

smm_status smm_backfit(const smm_params* params, const smm_model* model,
                       const smm_dataset* train, const char* mode,
                       const char* report_csv_path, smm_model** out) {
  if (!params || !model || !train || !mode || !out) {
    return fail(SMM_ERR_USAGE, "smm_backfit: null argument");
  }
  return guarded([&] {
    const smm::RunParams& rp = params->params;
    if (train->data->schema() != model->mixture->schema()) {
      throw smm::data_error("smm_backfit: model and data schemas differ");
    }
    smm::BackfitMode bf = parse_backfit_mode(mode);
    if (bf == smm::BackfitMode::None) {
      throw smm::usage_error("smm_backfit: mode must be weights or structure");
    }
    smm::BackfitReport report;
    smm::StagedMixture result =
        bf == smm::BackfitMode::Weights
            ? smm::mixture_weight_backfit(*model->mixture, train->data,
                                          rp.backfit_config(), &report)
            : smm::structure_backfit(*model->mixture, train->data, rp.schedule,
                                     rp.learn_config(), rp.backfit_config(),
                                     &report);
    if (report_csv_path) smm::write_backfit_csv(report, report_csv_path);
    *out = new smm_model{
        std::make_shared<smm::StagedMixture>(std::move(result))};
  });
}

smm_status smm_curve(const smm_params* params, const smm_dataset* train,
                     const smm_dataset* test, const char* schedules,
                     const char* backfit_mode, const char* out_csv_path) {
  if (!params || !train || !schedules || !out_csv_path) {
    return fail(SMM_ERR_USAGE, "smm_curve: null argument");
  }
  return guarded([&] {
    const smm::RunParams& rp = params->params;
    rp.check_task(train->data->schema());
    if (test && test->data->schema() != train->data->schema()) {
      throw smm::data_error("smm_curve: train/test schema mismatch");
    }
    smm::CurveResult result = smm::curve_experiment(
        train->data, test ? test->data : nullptr, rp.fit_config(),
        rp.components, parse_schedule_list(schedules),
        parse_backfit_mode(backfit_mode ? backfit_mode : "none"),
        rp.backfit_config());
    smm::write_curve_csv(result, out_csv_path, rp.timings);
  });
}

smm_status smm_genspec_load(const char* path, smm_genspec** out) {
  if (!path || !out) {
    return fail(SMM_ERR_USAGE, "smm_genspec_load: null argument");
  }
  return guarded([&] { *out = new smm_genspec{smm::load_genspec(path)}; });
}

smm_status smm_genspec_sample(const smm_genspec* spec, int64_t n,
                              uint64_t seed, smm_dataset** out) {
  if (!spec || !out) {
    return fail(SMM_ERR_USAGE, "smm_genspec_sample: null argument");
  }
  return guarded([&] {
    if (n < 1) throw smm::usage_error("smm_genspec_sample: n must be >= 1");
    *out = new smm_dataset{std::make_shared<smm::Dataset>(
        smm::sample(spec->spec, static_cast<size_t>(n), seed))};
  });
}

smm_status smm_genspec_case_log_density(const smm_genspec* spec,
                                        const smm_dataset* dataset,
                                        int64_t case_index, double* out) {
  if (!spec || !dataset || !out) {
    return fail(SMM_ERR_USAGE, "smm_genspec_case_log_density: null argument");
  }
  return guarded([&] {
    if (case_index < 0 ||
        case_index >= static_cast<int64_t>(dataset->data->size())) {
      throw smm::usage_error("case index out of range");
    }
    if (dataset->data->schema() != spec->spec.schema) {
      throw smm::data_error("spec and dataset schemas differ");
    }
    *out = smm::true_log_density(spec->spec, *dataset->data,
                                 static_cast<size_t>(case_index));
  });
}

void smm_genspec_free(smm_genspec* spec) { delete spec; }

}  // extern "C"
