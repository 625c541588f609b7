// Apache License, Version 2.0, refer to LICENSE.txt

#ifndef SMM_CORE_EVALUATE_HPP
#define SMM_CORE_EVALUATE_HPP

#include <string>
#include <vector>

#include "core/backfit.hpp"
#include "core/mixture.hpp"

namespace smm {

// Mean natural-log predictive density over a test set: the joint density for
// density models, p(target | inputs) for classifiers.
double log_score(const StagedMixture& m, const Dataset& t);

// As log_score but only defined for classification schemas.
double conditional_log_score(const StagedMixture& m, const Dataset& t);

// Fraction of cases whose argmax-probability class equals the label; argmax
// ties resolve to the lowest class index.
double accuracy(const StagedMixture& m, const Dataset& t);

// conditional_log_score for classifiers, log_score for density models.
double task_score(const StagedMixture& m, const Dataset& t);

struct TuneConfig {
  std::vector<size_t> leaf_grid{2, 4, 8, 16, 32, 64, 128, 256, 512};
  std::vector<double> pi_grid{0.05, 0.1, 0.2, 0.3, 0.5};
  double fraction = 0.7;
  uint64_t seed = 0;
  int components = 8;   // stages fitted per grid cell
  int max_outer = 5;    // outer-iteration cap while tuning
  int threads = 0;      // 0 = hardware concurrency
};

struct TuneCell {
  size_t max_leaves;
  double pi_init;
  int components;
  double holdout_score;
};

struct TuneResult {
  size_t best_leaves = 0;
  double best_pi = 0.0;
  // one row per (max_leaves, pi_init, stage); a pair's score is the max
  // over its stages, so the winning pair attains the table maximum
  std::vector<TuneCell> table;
};

// Holdout grid search over (max_leaves, pi_init) on a deterministic
// fraction/holdout split of `d`. Grid cells are independent and run on up
// to cfg.threads workers; results are identical at any thread count.
TuneResult tune(DatasetPtr d, const TuneConfig& cfg, const FitConfig& base);

enum class BackfitMode { None, Weights, Structure };

struct CurvePoint {
  std::string schedule;
  int components = 0;
  double train_score = 0.0;  // mean train log predictive
  double test_score = 0.0;
  double test_accuracy = 0.0;
  bool has_test = false;
  bool has_accuracy = false;
  double seconds = 0.0;  // cumulative fit time at this stage
};

struct CurveResult {
  std::vector<CurvePoint> points;
};

// Fits K stages per schedule and scores every intermediate mixture on the
// test set (when given). With a backfit mode, each evaluated stage is
// backfitted before scoring; the staged fit itself stays frozen.
CurveResult curve_experiment(
    DatasetPtr train, DatasetPtr test, const FitConfig& cfg, int num_components,
    const std::vector<std::pair<std::string, Schedule>>& schedules,
    BackfitMode backfit = BackfitMode::None,
    const BackfitConfig& backfit_cfg = {});

struct BaselineConfig {
  std::vector<double> kappa_grid{0.1, 0.5, 0.9};
  std::vector<double> gamma_grid{1.0, 5.0, 25.0};
  double fraction = 0.7;
  uint64_t seed = 0;
  double alpha = 1.0;
  double variance_floor = 1e-9;
};

// Single unbounded-leaves tree (classification) or network (density) under
// the kappa^d penalized score; kappa and gamma are picked on an internal
// fraction/holdout split, then the model is refit on all of `d`. Returned
// as a one-component mixture so persistence and scoring are uniform.
StagedMixture learn_baseline(DatasetPtr d, const BaselineConfig& cfg);

// --- report files (all CSV, headers documented in the README) ---

void write_curve_csv(const CurveResult& result, const std::string& path,
                     bool timings);
void write_tune_csv(const TuneResult& result, const std::string& path);
void write_backfit_csv(const BackfitReport& report, const std::string& path);
void write_eval_csv(double score, bool has_accuracy, double acc,
                    const std::string& path);

std::string format_double(double x);  // shortest round-trip decimal, %.17g

}  // namespace smm

#endif  // SMM_CORE_EVALUATE_HPP
