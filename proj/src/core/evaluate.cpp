// Apache License, Version 2.0, refer to LICENSE.txt

#include "core/evaluate.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <thread>

#include "core/csv.hpp"
#include "core/error.hpp"

namespace smm {

double log_score(const StagedMixture& m, const Dataset& t) {
  if (t.size() == 0) throw data_error("log_score: empty test set");
  if (m.schema() != t.schema()) {
    throw data_error("log_score: model and test schemas differ");
  }
  double sum = 0.0;
  for (size_t r = 0; r < t.size(); ++r) sum += m.log_predictive(t, r);
  return sum / static_cast<double>(t.size());
}

double conditional_log_score(const StagedMixture& m, const Dataset& t) {
  if (m.task() != Task::Classification) {
    throw usage_error("conditional_log_score: classification models only");
  }
  return log_score(m, t);
}

double accuracy(const StagedMixture& m, const Dataset& t) {
  if (m.task() != Task::Classification) {
    throw usage_error("accuracy: classification models only");
  }
  if (t.size() == 0) throw data_error("accuracy: empty test set");
  if (m.schema() != t.schema()) {
    throw data_error("accuracy: model and test schemas differ");
  }
  int target = m.schema().target_index();
  size_t hits = 0;
  for (size_t r = 0; r < t.size(); ++r) {
    std::vector<double> posterior = m.class_posterior(t, r);
    size_t argmax = 0;
    for (size_t s = 1; s < posterior.size(); ++s) {
      if (posterior[s] > posterior[argmax]) argmax = s;
    }
    if (static_cast<int>(argmax) == t.state(r, target)) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(t.size());
}

double task_score(const StagedMixture& m, const Dataset& t) {
  return m.task() == Task::Classification ? conditional_log_score(m, t)
                                          : log_score(m, t);
}

TuneResult tune(DatasetPtr d, const TuneConfig& cfg, const FitConfig& base) {
  if (cfg.leaf_grid.empty() || cfg.pi_grid.empty()) {
    throw usage_error("tune: empty grid");
  }
  auto [train, holdout] = holdout_split(*d, cfg.fraction, cfg.seed);
  auto train_ptr = std::make_shared<Dataset>(std::move(train));
  auto holdout_ptr = std::make_shared<Dataset>(std::move(holdout));

  struct Pair {
    size_t leaves;
    double pi;
  };
  std::vector<Pair> pairs;
  for (size_t leaves : cfg.leaf_grid) {
    for (double pi : cfg.pi_grid) pairs.push_back({leaves, pi});
  }

  std::vector<std::vector<TuneCell>> cells(pairs.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t idx = next.fetch_add(1); idx < pairs.size();
         idx = next.fetch_add(1)) {
      FitConfig fit = base;
      fit.add.learn.max_leaves = pairs[idx].leaves;
      fit.add.pi_init = pairs[idx].pi;
      fit.add.schedule.max_outer =
          std::min(fit.add.schedule.max_outer, cfg.max_outer);
      std::vector<StagedMixture> stages =
          fit_smm(train_ptr, cfg.components, fit);
      for (size_t k = 0; k < stages.size(); ++k) {
        cells[idx].push_back({pairs[idx].leaves, pairs[idx].pi,
                              static_cast<int>(k + 1),
                              task_score(stages[k], *holdout_ptr)});
      }
    }
  };

  unsigned n_threads = cfg.threads > 0
                           ? static_cast<unsigned>(cfg.threads)
                           : std::max(1u, std::thread::hardware_concurrency());
  n_threads = std::min<unsigned>(n_threads, pairs.size());
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  TuneResult result;
  double best = 0.0;
  bool first = true;
  for (size_t idx = 0; idx < pairs.size(); ++idx) {
    double pair_score = 0.0;
    for (size_t k = 0; k < cells[idx].size(); ++k) {
      double s = cells[idx][k].holdout_score;
      if (k == 0 || s > pair_score) pair_score = s;
      result.table.push_back(cells[idx][k]);
    }
    if (first || pair_score > best) {
      first = false;
      best = pair_score;
      result.best_leaves = pairs[idx].leaves;
      result.best_pi = pairs[idx].pi;
    }
  }
  return result;
}

CurveResult curve_experiment(
    DatasetPtr train, DatasetPtr test, const FitConfig& cfg, int num_components,
    const std::vector<std::pair<std::string, Schedule>>& schedules,
    BackfitMode backfit, const BackfitConfig& backfit_cfg) {
  if (schedules.empty()) throw usage_error("curve_experiment: no schedules");
  CurveResult result;
  for (const auto& [name, schedule] : schedules) {
    FitConfig fit = cfg;
    fit.add.schedule = schedule;
    auto start = std::chrono::steady_clock::now();
    std::vector<StagedMixture> stages = fit_smm(train, num_components, fit);
    for (size_t k = 0; k < stages.size(); ++k) {
      const StagedMixture* m = &stages[k];
      StagedMixture refit = stages[k];
      if (backfit == BackfitMode::Weights) {
        refit = mixture_weight_backfit(stages[k], train, backfit_cfg);
        m = &refit;
      } else if (backfit == BackfitMode::Structure) {
        refit = structure_backfit(stages[k], train, fit.add.schedule,
                                  fit.add.learn, backfit_cfg);
        m = &refit;
      }
      CurvePoint p;
      p.schedule = name;
      p.components = static_cast<int>(k + 1);
      p.train_score = task_score(*m, *train);
      if (test) {
        p.has_test = true;
        p.test_score = task_score(*m, *test);
        if (m->task() == Task::Classification) {
          p.has_accuracy = true;
          p.test_accuracy = accuracy(*m, *test);
        }
      }
      p.seconds = std::chrono::duration<double>(
                      std::chrono::steady_clock::now() - start)
                      .count();
      result.points.push_back(std::move(p));
    }
  }
  return result;
}

StagedMixture learn_baseline(DatasetPtr d, const BaselineConfig& cfg) {
  Task task = task_of(d->schema());
  auto [train, holdout] = holdout_split(*d, cfg.fraction, cfg.seed);
  auto train_ptr = std::make_shared<Dataset>(std::move(train));

  auto learn_with = [&](DatasetPtr data, double kappa, double gamma) {
    LearnConfig learn;
    learn.max_leaves = kUnboundedLeaves;
    learn.score = ModelScore{ScoreKind::PenalizedML, kappa};
    learn.alpha = cfg.alpha;
    learn.variance_floor = cfg.variance_floor;
    learn.gamma = gamma;
    Component c = learn_component(uniform_weights(data), learn, task);
    return StagedMixture(data->schema(), std::vector<Component>{std::move(c)},
                         std::vector<double>{1.0});
  };

  double best_kappa = 0.0, best_gamma = 0.0, best_score = 0.0;
  bool first = true;
  for (double kappa : cfg.kappa_grid) {
    for (double gamma : cfg.gamma_grid) {
      StagedMixture m = learn_with(train_ptr, kappa, gamma);
      double s = task_score(m, holdout);
      if (first || s > best_score) {
        first = false;
        best_score = s;
        best_kappa = kappa;
        best_gamma = gamma;
      }
    }
  }
  return learn_with(d, best_kappa, best_gamma);
}

std::string format_double(double x) {
  char buf[40];
  snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

std::ofstream open_report(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error(path + ": cannot open for writing");
  return out;
}

}  // namespace

void write_curve_csv(const CurveResult& result, const std::string& path,
                     bool timings) {
  std::ofstream out = open_report(path);
  std::vector<std::string> row{"schedule", "components", "train_log_score",
                               "test_log_score", "test_accuracy"};
  if (timings) row.push_back("seconds");
  write_csv_row(out, row);
  for (const auto& p : result.points) {
    row = {p.schedule, std::to_string(p.components),
           format_double(p.train_score),
           p.has_test ? format_double(p.test_score) : "",
           p.has_accuracy ? format_double(p.test_accuracy) : ""};
    if (timings) row.push_back(format_double(p.seconds));
    write_csv_row(out, row);
  }
}

void write_tune_csv(const TuneResult& result, const std::string& path) {
  std::ofstream out = open_report(path);
  write_csv_row(out, {"max_leaves", "pi_init", "components", "holdout_score"});
  for (const auto& c : result.table) {
    write_csv_row(out, {std::to_string(c.max_leaves), format_double(c.pi_init),
                        std::to_string(c.components),
                        format_double(c.holdout_score)});
  }
}

void write_backfit_csv(const BackfitReport& report, const std::string& path) {
  std::ofstream out = open_report(path);
  size_t n = report.rows.empty() ? 0 : report.rows[0].pi.size();
  std::vector<std::string> row{"iteration", "train_ll"};
  for (size_t i = 0; i < n; ++i) row.push_back("pi_" + std::to_string(i));
  write_csv_row(out, row);
  for (const auto& r : report.rows) {
    row = {std::to_string(r.iteration), format_double(r.train_ll)};
    for (double pi : r.pi) row.push_back(format_double(pi));
    write_csv_row(out, row);
  }
}

void write_eval_csv(double score, bool has_accuracy, double acc,
                    const std::string& path) {
  std::ofstream out = open_report(path);
  write_csv_row(out, {"log_score", "accuracy"});
  write_csv_row(out,
                {format_double(score), has_accuracy ? format_double(acc) : ""});
}

}  // namespace smm
